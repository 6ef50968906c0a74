#include "qdarwin/dynamics.hpp"

#include "qdarwin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace qdarwin {

namespace {

// Independent deterministic stream per (seed, purpose, site list), so results
// do not depend on candidate enumeration order.
Rng derive_rng(std::uint64_t seed, std::uint64_t purpose,
               const std::vector<int>& sites) {
  std::uint64_t h = 1469598103934665603ull ^ seed;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 1099511628211ull;
  };
  mix(purpose);
  for (int s : sites) mix(static_cast<std::uint64_t>(s) + 1);
  return Rng(h);
}

double entropy_bits(const Matrix& density) {
  const Eigen::VectorXd evs = clipped_eigenvalues(density, 1e-10, 1e-7);
  double s = 0.0;
  for (long i = 0; i < evs.size(); ++i) {
    if (evs[i] > 0.0) s -= evs[i] * std::log2(evs[i]);
  }
  return s;
}

}  // namespace

Channel::Channel(int d_in, SiteSpace out, std::vector<Matrix> ops, double tp_tol)
    : input_dim(d_in), output_space(std::move(out)), kraus(std::move(ops)) {
  if (input_dim < 1) throw std::invalid_argument("Channel: input dimension must be >= 1");
  if (kraus.empty()) throw std::invalid_argument("Channel: no Kraus operators");
  for (const Matrix& k : kraus) {
    if (k.rows() != output_space.total_dim() || k.cols() != input_dim) {
      throw std::invalid_argument("Channel: Kraus operator shape mismatch");
    }
  }
  if (trace_preservation_residual() > tp_tol) {
    throw std::invalid_argument("Channel: Kraus operators are not trace preserving");
  }
}

double Channel::trace_preservation_residual() const {
  Matrix acc = Matrix::Zero(input_dim, input_dim);
  for (const Matrix& k : kraus) acc += k.adjoint() * k;
  return (acc - Matrix::Identity(input_dim, input_dim)).norm();
}

DenseOperator Channel::apply(const Matrix& sigma) const {
  if (sigma.rows() != input_dim || sigma.cols() != input_dim) {
    throw std::invalid_argument("Channel::apply: input dimension mismatch");
  }
  Matrix out = Matrix::Zero(output_space.total_dim(), output_space.total_dim());
  for (const Matrix& k : kraus) out += k * sigma * k.adjoint();
  return DenseOperator(output_space, std::move(out));
}

SiteSpace ChoiState::joint_space() const {
  std::vector<int> dims;
  dims.push_back(reference_dim);
  for (int d : system_space.site_dims()) dims.push_back(d);
  return SiteSpace(dims);
}

std::vector<int> ChoiState::joint_sites_of_system(
    const std::vector<int>& system_sites) const {
  std::vector<int> out;
  out.reserve(system_sites.size());
  for (int s : system_sites) {
    if (s < 0 || s >= system_space.num_sites()) {
      throw std::invalid_argument("ChoiState: system site out of range");
    }
    out.push_back(s + 1);
  }
  return out;
}

Channel random_channel(int d_in, const std::vector<int>& site_dims, int rank,
                       std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("random_channel: rank must be >= 1");
  SiteSpace out_space(site_dims);
  const long d_out = out_space.total_dim();
  if (d_in > d_out) {
    throw std::invalid_argument("random_channel: input dimension exceeds output");
  }
  Rng rng(seed);
  // Haar isometry into output x ancilla, ancilla (least significant) traced.
  const Matrix v = haar_isometry(d_out * rank, d_in, rng);
  std::vector<Matrix> kraus;
  kraus.reserve(rank);
  for (int j = 0; j < rank; ++j) {
    Matrix k(d_out, d_in);
    for (long x = 0; x < d_out; ++x) k.row(x) = v.row(x * rank + j);
    kraus.push_back(std::move(k));
  }
  return Channel(d_in, out_space, std::move(kraus), 1e-10);
}

ChoiState choi_state(const Channel& ch) {
  const int d_r = ch.input_dim;
  const long d_sys = ch.output_space.total_dim();
  ChoiState choi;
  choi.reference_dim = d_r;
  choi.system_space = ch.output_space;

  Matrix rho = Matrix::Zero(d_r * d_sys, d_r * d_sys);
  for (const Matrix& k : ch.kraus) {
    for (int i = 0; i < d_r; ++i) {
      for (int j = 0; j < d_r; ++j) {
        rho.block(i * d_sys, j * d_sys, d_sys, d_sys) +=
            (1.0 / d_r) * (k.col(i) * k.col(j).adjoint());
      }
    }
  }
  choi.rho = DenseOperator(choi.joint_space(), std::move(rho));
  return choi;
}

DenseOperator apply_via_choi(const ChoiState& choi, const Matrix& sigma) {
  const int d_r = choi.reference_dim;
  if (sigma.rows() != d_r || sigma.cols() != d_r) {
    throw std::invalid_argument("apply_via_choi: input dimension mismatch");
  }
  const long d_sys = choi.system_space.total_dim();
  Matrix out = Matrix::Zero(d_sys, d_sys);
  for (int i = 0; i < d_r; ++i) {
    for (int j = 0; j < d_r; ++j) {
      if (sigma(i, j) == Complex(0.0, 0.0)) continue;
      out += sigma(i, j) * choi.rho.entries.block(i * d_sys, j * d_sys, d_sys, d_sys);
    }
  }
  out *= static_cast<double>(d_r);
  return DenseOperator(choi.system_space, std::move(out));
}

double blanket_delta_bound(int d_r, int w_f, int w_q) {
  if (d_r < 1 || w_f < 1 || w_q < 1) {
    throw std::invalid_argument("blanket_delta_bound: arguments must be >= 1");
  }
  return d_r * std::sqrt(2.0 * std::log(static_cast<double>(d_r)) *
                         static_cast<double>(w_f) / static_cast<double>(w_q));
}

// ---------------------------------------------------------------------------
// Conditional decompositions
// ---------------------------------------------------------------------------

std::vector<PreparedComponent> basis_measurement_conditionals(
    const DenseOperator& rho, const std::vector<int>& measured,
    const Matrix& basis, const std::vector<int>& keep,
    double probability_floor) {
  std::vector<int> combined = keep;
  combined.insert(combined.end(), measured.begin(), measured.end());
  const DenseOperator reduced = partial_trace(rho, combined);

  long d_keep = 1;
  for (int s : keep) d_keep *= rho.space.site_dim(s);
  const long d_m = reduced.dim() / d_keep;
  if (basis.rows() != d_m) {
    throw std::invalid_argument(
        "basis_measurement_conditionals: basis row count does not match measured sites");
  }
  const long n_out = basis.cols();
  const SiteSpace keep_space = rho.space.restricted_to(keep);

  // For each kept-index pair, project the measured block on every outcome
  // vector at once.
  std::vector<Matrix> raw(n_out, Matrix(d_keep, d_keep));
  for (long k = 0; k < d_keep; ++k) {
    for (long kp = 0; kp < d_keep; ++kp) {
      const auto block = reduced.entries.block(k * d_m, kp * d_m, d_m, d_m);
      const Matrix projected = block * basis;
      for (long t = 0; t < n_out; ++t) {
        raw[t](k, kp) = basis.col(t).dot(projected.col(t));
      }
    }
  }

  std::vector<PreparedComponent> out(n_out);
  for (long t = 0; t < n_out; ++t) {
    PreparedComponent& c = out[t];
    c.probability = raw[t].trace().real();
    if (c.probability <= probability_floor) {
      c.flagged_zero = true;
      c.conditional = DenseOperator(
          keep_space, Matrix::Identity(d_keep, d_keep) / static_cast<double>(d_keep));
    } else {
      c.conditional = DenseOperator(keep_space, hermitize(raw[t] / c.probability));
    }
  }
  return out;
}

std::vector<PreparedComponent> effect_measurement_conditionals(
    const DenseOperator& rho, const std::vector<int>& measured,
    const std::vector<Matrix>& effects, const std::vector<int>& keep,
    double probability_floor) {
  std::vector<int> combined = keep;
  combined.insert(combined.end(), measured.begin(), measured.end());
  const DenseOperator reduced = partial_trace(rho, combined);

  long d_keep = 1;
  for (int s : keep) d_keep *= rho.space.site_dim(s);
  const long d_m = reduced.dim() / d_keep;
  const SiteSpace keep_space = rho.space.restricted_to(keep);

  std::vector<PreparedComponent> out(effects.size());
  for (size_t t = 0; t < effects.size(); ++t) {
    const Matrix& e = effects[t];
    if (e.rows() != d_m || e.cols() != d_m) {
      throw std::invalid_argument(
          "effect_measurement_conditionals: effect dimension mismatch");
    }
    Matrix raw(d_keep, d_keep);
    const Matrix e_t = e.transpose();
    for (long k = 0; k < d_keep; ++k) {
      for (long kp = 0; kp < d_keep; ++kp) {
        raw(k, kp) =
            reduced.entries.block(k * d_m, kp * d_m, d_m, d_m).cwiseProduct(e_t).sum();
      }
    }
    PreparedComponent& c = out[t];
    c.probability = raw.trace().real();
    if (c.probability <= probability_floor) {
      c.flagged_zero = true;
      c.conditional = DenseOperator(
          keep_space, Matrix::Identity(d_keep, d_keep) / static_cast<double>(d_keep));
    } else {
      c.conditional = DenseOperator(keep_space, hermitize(raw / c.probability));
    }
  }
  return out;
}

std::vector<PreparedComponent> measure_prepare_decomposition(
    const ChoiState& choi, const std::vector<int>& q, const Povm& t_q,
    double probability_floor) {
  std::set<int> q_set(q.begin(), q.end());
  std::set<int> support_set(t_q.support.begin(), t_q.support.end());
  if (q_set != support_set) {
    throw std::invalid_argument(
        "measure_prepare_decomposition: POVM support differs from q");
  }

  std::vector<int> keep;
  keep.push_back(0);  // reference
  for (int s = 0; s < choi.system_space.num_sites(); ++s) {
    if (!q_set.count(s)) keep.push_back(s + 1);
  }
  const std::vector<int> measured = choi.joint_sites_of_system(t_q.support);
  return effect_measurement_conditionals(choi.rho, measured, t_q.effects, keep,
                                         probability_floor);
}

double measured_cmi(const DenseOperator& rho, const std::vector<int>& keep,
                    const std::vector<int>& measured_a, const Matrix& basis_a,
                    const std::vector<int>& measured_b, const Matrix& basis_b) {
  // Outer split on the b-outcomes, inner split on the a-outcomes; both
  // registers are classical afterwards, so
  //   I(keep : b | a) = sum_a p_a [ S(rho^a) - sum_b p(b|a) S(rho^{ab}) ].
  std::vector<int> keep_and_a = keep;
  keep_and_a.insert(keep_and_a.end(), measured_a.begin(), measured_a.end());
  const std::vector<PreparedComponent> outer =
      basis_measurement_conditionals(rho, measured_b, basis_b, keep_and_a);

  const long n_keep = static_cast<long>(keep.size());
  std::vector<int> rel_keep(n_keep), rel_a(measured_a.size());
  std::iota(rel_keep.begin(), rel_keep.end(), 0);
  std::iota(rel_a.begin(), rel_a.end(), static_cast<int>(n_keep));

  long d_keep = 1;
  for (int s : keep) d_keep *= rho.space.site_dim(s);
  const long n_theta = basis_a.cols();

  // Joint weights and conditional kept states indexed by (theta, beta).
  const long n_beta = static_cast<long>(outer.size());
  std::vector<std::vector<double>> weight(n_theta, std::vector<double>(n_beta, 0.0));
  std::vector<std::vector<Matrix>> cond(n_theta, std::vector<Matrix>(n_beta));
  for (long b = 0; b < n_beta; ++b) {
    if (outer[b].flagged_zero) continue;
    const std::vector<PreparedComponent> inner = basis_measurement_conditionals(
        outer[b].conditional, rel_a, basis_a, rel_keep);
    for (long t = 0; t < n_theta; ++t) {
      if (inner[t].flagged_zero) continue;
      weight[t][b] = outer[b].probability * inner[t].probability;
      cond[t][b] = inner[t].conditional.entries;
    }
  }

  double cmi = 0.0;
  for (long t = 0; t < n_theta; ++t) {
    double p_theta = 0.0;
    Matrix mix = Matrix::Zero(d_keep, d_keep);
    for (long b = 0; b < n_beta; ++b) {
      if (weight[t][b] <= 0.0) continue;
      p_theta += weight[t][b];
      mix += weight[t][b] * cond[t][b];
    }
    if (p_theta <= 1e-14) continue;
    cmi += p_theta * entropy_bits(mix / p_theta);
    for (long b = 0; b < n_beta; ++b) {
      if (weight[t][b] <= 1e-14) continue;
      cmi -= weight[t][b] * entropy_bits(cond[t][b]);
    }
  }
  return cmi;
}

// ---------------------------------------------------------------------------
// Markov-blanket search
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<int>> subsets_of_size(const std::vector<int>& universe,
                                              int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > static_cast<int>(universe.size())) return out;
  std::vector<int> pick(k);
  auto rec = [&](auto&& self, int from, int depth) -> void {
    if (depth == k) {
      std::vector<int> subset(k);
      for (int i = 0; i < k; ++i) subset[i] = universe[pick[i]];
      out.push_back(std::move(subset));
      return;
    }
    for (int c = from; c <= static_cast<int>(universe.size()) - (k - depth); ++c) {
      pick[depth] = c;
      self(self, c + 1, depth + 1);
    }
  };
  rec(rec, 0, 0);
  return out;
}

Matrix random_product_basis(const SiteSpace& space, const std::vector<int>& sites,
                            Rng& rng) {
  Matrix basis = Matrix::Identity(1, 1);
  for (int s : sites) basis = kron(basis, random_unitary(space.site_dim(s), rng));
  return basis;
}

struct QCandidateScore {
  double score = 0.0;
  Matrix best_basis;
  std::vector<std::vector<int>> fragments;
};

}  // namespace

BlanketResult find_markov_blanket(const ChoiState& choi, const BlanketOptions& opt) {
  const int n = choi.system_space.num_sites();
  if (opt.w_q < 1 || opt.w_f < 1 || opt.w_q + opt.w_f > n) {
    throw std::invalid_argument("find_markov_blanket: invalid w_q/w_f for this system");
  }

  std::vector<int> all_sites(n);
  std::iota(all_sites.begin(), all_sites.end(), 0);

  std::vector<std::vector<int>> candidates;
  const int min_size = opt.include_smaller_subsets ? 1 : opt.w_q;
  for (int size = opt.w_q; size >= min_size; --size) {
    auto of_size = subsets_of_size(all_sites, size);
    candidates.insert(candidates.end(), of_size.begin(), of_size.end());
    if (static_cast<long>(candidates.size()) > opt.max_candidates) {
      throw EnvelopeError("find_markov_blanket: candidate subset cap exceeded");
    }
  }

  auto score_candidate = [&](const std::vector<int>& q) {
    const std::vector<int> joint_q = choi.joint_sites_of_system(q);
    long d_q = 1;
    for (int s : q) d_q *= choi.system_space.site_dim(s);

    // Fragment sample: lexicographic enumeration, evenly thinned to the
    // requested sample count.
    std::vector<int> complement;
    for (int s = 0; s < n; ++s) {
      if (!std::binary_search(q.begin(), q.end(), s)) complement.push_back(s);
    }
    auto all_fragments = subsets_of_size(complement, opt.w_f);
    std::vector<std::vector<int>> fragments;
    if (static_cast<int>(all_fragments.size()) <= opt.f_samples) {
      fragments = all_fragments;
    } else {
      for (int i = 0; i < opt.f_samples; ++i) {
        fragments.push_back(
            all_fragments[i * all_fragments.size() / opt.f_samples]);
      }
    }

    // T_q family: computational, eigenbasis of the reduced state, seeded
    // random product bases.
    std::vector<Matrix> family;
    family.push_back(Matrix::Identity(d_q, d_q));
    {
      const DenseOperator rho_q = partial_trace(choi.rho, joint_q);
      Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(rho_q.entries));
      family.push_back(es.eigenvectors());
    }
    Rng rng_q = derive_rng(opt.seed, 0x71, q);
    for (int r = 0; r < opt.random_bases_q; ++r) {
      family.push_back(random_product_basis(choi.system_space, q, rng_q));
    }

    QCandidateScore result;
    result.fragments = fragments;
    bool first = true;
    for (const Matrix& t_basis : family) {
      double worst = 0.0;
      for (const auto& f : fragments) {
        const std::vector<int> joint_f = choi.joint_sites_of_system(f);
        std::vector<Matrix> xi_family;
        long d_f = 1;
        for (int s : f) d_f *= choi.system_space.site_dim(s);
        xi_family.push_back(Matrix::Identity(d_f, d_f));
        Rng rng_f = derive_rng(opt.seed, 0xf1, joint_f);
        for (int r = 0; r < opt.random_bases_f; ++r) {
          xi_family.push_back(random_product_basis(choi.system_space, f, rng_f));
        }
        for (const Matrix& xi : xi_family) {
          worst = std::max(worst, measured_cmi(choi.rho, {0}, joint_q, t_basis,
                                               joint_f, xi));
        }
      }
      if (first || worst < result.score) {
        result.score = worst;
        result.best_basis = t_basis;
        first = false;
      }
    }
    return result;
  };

  BlanketResult best;
  best.w_q_param = opt.w_q;
  best.w_f_param = opt.w_f;
  best.delta_bound = blanket_delta_bound(choi.reference_dim, opt.w_f, opt.w_q);
  bool have_best = false;
  QCandidateScore best_score;
  // Explicit ordering so the winner does not depend on enumeration order:
  // lowest score, then largest subset, then lexicographically smallest.
  auto improves = [&](double score, const std::vector<int>& q) {
    if (!have_best) return true;
    if (score != best_score.score) return score < best_score.score;
    if (q.size() != best.q.size()) return q.size() > best.q.size();
    return q < best.q;
  };
  for (const auto& q : candidates) {
    const QCandidateScore s = score_candidate(q);
    ++best.candidates_scored;
    if (improves(s.score, q)) {
      best_score = s;
      best.q = q;
      have_best = true;
    }
  }

  // Materialize the winning measurement as a POVM on q.
  long d_q = 1;
  std::vector<int> q_dims;
  for (int s : best.q) {
    q_dims.push_back(choi.system_space.site_dim(s));
    d_q *= q_dims.back();
  }
  std::vector<std::string> labels;
  std::vector<Matrix> effects;
  for (long t = 0; t < d_q; ++t) {
    labels.push_back("t" + std::to_string(t));
    const Vector v = best_score.best_basis.col(t);
    effects.push_back(v * v.adjoint());
  }
  best.t_q = Povm(best.q, q_dims, std::move(labels), std::move(effects));
  best.score = best_score.score;

  // Outcome distribution and conditional fragment states of the winner.
  const std::vector<int> joint_q = choi.joint_sites_of_system(best.q);
  for (const auto& f : best_score.fragments) {
    const std::vector<int> joint_f = choi.joint_sites_of_system(f);
    const auto comps = basis_measurement_conditionals(
        choi.rho, joint_q, best_score.best_basis, joint_f);
    std::vector<Matrix> states;
    states.reserve(comps.size());
    for (const auto& c : comps) states.push_back(c.conditional.entries);
    best.prepared_f[f] = std::move(states);
    if (best.p_theta.empty()) {
      for (const auto& c : comps) best.p_theta.push_back(c.probability);
    }
  }
  if (best.p_theta.empty()) {
    const auto comps = basis_measurement_conditionals(choi.rho, joint_q,
                                                      best_score.best_basis, {0});
    for (const auto& c : comps) best.p_theta.push_back(c.probability);
  }
  return best;
}

BoundReport verify_deviation_bound(const ChoiState& choi, const BlanketResult& blanket,
                                 const std::vector<BoundTrial>& trials) {
  BoundReport report;
  report.delta_actual = blanket_delta_bound(
      choi.reference_dim, blanket.w_f_param, static_cast<int>(blanket.q.size()));
  report.delta_param = blanket.delta_bound;
  report.bound_used = std::min(1.0, report.delta_actual);

  // sigma-independent conditional fragment states from the Choi state,
  // cached per fragment.
  std::map<std::vector<int>, std::vector<Matrix>> f_conditionals;
  const std::vector<int> joint_q = choi.joint_sites_of_system(blanket.q);

  auto conditionals_for = [&](const std::vector<int>& f) {
    auto it = f_conditionals.find(f);
    if (it != f_conditionals.end()) return it->second;
    const auto comps = effect_measurement_conditionals(
        choi.rho, joint_q, blanket.t_q.effects, choi.joint_sites_of_system(f));
    std::vector<Matrix> states;
    states.reserve(comps.size());
    for (const auto& c : comps) states.push_back(c.conditional.entries);
    f_conditionals[f] = states;
    return states;
  };

  for (const BoundTrial& trial : trials) {
    for (int s : trial.f) {
      if (std::binary_search(blanket.q.begin(), blanket.q.end(), s)) {
        throw std::invalid_argument("verify_deviation_bound: fragment intersects q");
      }
    }
    const DenseOperator varrho = apply_via_choi(choi, trial.sigma);

    // tr(T^theta varrho) with a single reduction onto q.
    const DenseOperator varrho_q = partial_trace(varrho, blanket.q);
    std::vector<double> t_probs;
    t_probs.reserve(blanket.t_q.num_outcomes());
    for (const Matrix& e : blanket.t_q.effects) {
      t_probs.push_back(
          e.cwiseProduct(varrho_q.entries.transpose()).sum().real());
    }

    const std::vector<Matrix>& rho_theta_f = conditionals_for(trial.f);
    double worst = 0.0;
    for (int a = 0; a < trial.f_povm.num_outcomes(); ++a) {
      const double actual =
          subset_expectation(varrho, trial.f_povm.effects[a], trial.f).real();
      double predicted = 0.0;
      for (size_t theta = 0; theta < rho_theta_f.size(); ++theta) {
        const double p_a_theta =
            (trial.f_povm.effects[a] * rho_theta_f[theta]).trace().real();
        predicted += p_a_theta * t_probs[theta];
      }
      worst = std::max(worst, std::abs(actual - predicted));
    }
    report.per_trial.push_back(worst);
    report.max_deviation = std::max(report.max_deviation, worst);
  }
  report.within_bound = report.max_deviation <= report.bound_used + 1e-9;
  return report;
}

std::pair<double, double> pinsker_check(const DenseOperator& rho_joint,
                                        const std::vector<int>& a,
                                        const std::vector<int>& b) {
  std::vector<int> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const DenseOperator rho_ab = partial_trace(rho_joint, ab);
  const DenseOperator rho_a = partial_trace(rho_joint, a);
  const DenseOperator rho_b = partial_trace(rho_joint, b);
  const double t1 = 2.0 * trace_norm_half(rho_ab.entries -
                                          kron(rho_a.entries, rho_b.entries));
  const double lhs = t1 * t1 / (2.0 * std::log(2.0));
  const double rhs = mutual_information(rho_joint, a, b);
  return {lhs, rhs};
}

}  // namespace qdarwin
