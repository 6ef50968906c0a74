#include "qdarwin/compat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace qdarwin {

namespace {

void check_disjoint(const std::vector<int>& a, const std::vector<int>& b,
                    const char* what) {
  for (int s : a) {
    for (int t : b) {
      if (s == t) {
        throw std::invalid_argument(std::string(what) + ": supports overlap at site " +
                                    std::to_string(s));
      }
    }
  }
}

std::string joined_label(const std::vector<std::string>& parts) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ",";
    out += parts[i];
  }
  return out;
}

}  // namespace

JmVerification verify_jm_witness(const std::vector<Povm>& members,
                                 const JmWitness& witness, const StateSet& d_set) {
  if (witness.conditionals.size() != members.size()) {
    throw std::invalid_argument("verify_jm_witness: one conditional table per member required");
  }
  for (size_t m = 0; m < members.size(); ++m) {
    const auto& table = witness.conditionals[m];
    if (table.rows() != witness.parent.num_outcomes() ||
        table.cols() != members[m].num_outcomes()) {
      throw std::invalid_argument("verify_jm_witness: conditional table shape mismatch");
    }
    for (long t = 0; t < table.rows(); ++t) {
      if (table.row(t).minCoeff() < -1e-9 ||
          std::abs(table.row(t).sum() - 1.0) > 1e-9) {
        throw std::invalid_argument(
            "verify_jm_witness: conditional row is not a probability distribution");
      }
    }
  }

  JmVerification v;
  for (size_t state_idx = 0; state_idx < d_set.states.size(); ++state_idx) {
    const SystemState& state = d_set.states[state_idx];
    std::vector<double> parent_probs(witness.parent.num_outcomes());
    for (int t = 0; t < witness.parent.num_outcomes(); ++t) {
      parent_probs[t] =
          subset_expectation(state, witness.parent.effects[t], witness.parent.support)
              .real();
    }
    for (size_t m = 0; m < members.size(); ++m) {
      for (int w = 0; w < members[m].num_outcomes(); ++w) {
        const double actual =
            subset_expectation(state, members[m].effects[w], members[m].support).real();
        double predicted = 0.0;
        for (int t = 0; t < witness.parent.num_outcomes(); ++t) {
          predicted += witness.conditionals[m](t, w) * parent_probs[t];
        }
        const double dev = std::abs(actual - predicted);
        if (dev > v.max_residual) {
          v.max_residual = dev;
          v.worst_member = static_cast<int>(m);
          v.worst_outcome = w;
          v.worst_state = static_cast<int>(state_idx);
        }
      }
    }
  }
  return v;
}

JmWitness constructive_parent(const Povm& f_povm, const Povm& g_povm,
                              const Povm& f_sub, const Povm& g_sub) {
  if (f_povm.labels != f_sub.labels || g_povm.labels != g_sub.labels) {
    throw std::invalid_argument("constructive_parent: label sets differ from replacements");
  }
  check_disjoint(f_sub.support, g_sub.support, "constructive_parent (f', g')");
  check_disjoint(f_povm.support, g_sub.support, "constructive_parent (f, g')");
  check_disjoint(g_povm.support, f_sub.support, "constructive_parent (g, f')");
  return constructive_tuple_parent({f_sub, g_sub});
}

JmWitness constructive_tuple_parent(const std::vector<Povm>& member_subs) {
  if (member_subs.empty()) {
    throw std::invalid_argument("constructive_tuple_parent: no members");
  }
  for (size_t a = 0; a < member_subs.size(); ++a) {
    for (size_t b = a + 1; b < member_subs.size(); ++b) {
      check_disjoint(member_subs[a].support, member_subs[b].support,
                     "constructive_tuple_parent");
    }
  }

  std::vector<int> support, dims;
  long n_parent = 1;
  for (const Povm& p : member_subs) {
    support.insert(support.end(), p.support.begin(), p.support.end());
    dims.insert(dims.end(), p.local_dims.begin(), p.local_dims.end());
    n_parent *= p.num_outcomes();
  }

  JmWitness witness;
  std::vector<std::string> labels(n_parent);
  std::vector<Matrix> effects(n_parent);
  std::vector<int> tuple(member_subs.size(), 0);
  for (long t = 0; t < n_parent; ++t) {
    std::vector<std::string> parts;
    Matrix effect = Matrix::Identity(1, 1);
    for (size_t m = 0; m < member_subs.size(); ++m) {
      parts.push_back(member_subs[m].labels[tuple[m]]);
      effect = kron(effect, member_subs[m].effects[tuple[m]]);
    }
    labels[t] = joined_label(parts);
    effects[t] = std::move(effect);
    for (int m = static_cast<int>(member_subs.size()) - 1; m >= 0; --m) {
      if (++tuple[m] < member_subs[m].num_outcomes()) break;
      tuple[m] = 0;
    }
  }
  witness.parent = Povm(std::move(support), std::move(dims), std::move(labels),
                        std::move(effects));

  // Deterministic marginalization: parent outcome tuple theta reports its
  // m-th coordinate for member m.
  std::fill(tuple.begin(), tuple.end(), 0);
  witness.conditionals.assign(member_subs.size(), Eigen::MatrixXd());
  for (size_t m = 0; m < member_subs.size(); ++m) {
    witness.conditionals[m] =
        Eigen::MatrixXd::Zero(n_parent, member_subs[m].num_outcomes());
  }
  for (long t = 0; t < n_parent; ++t) {
    for (size_t m = 0; m < member_subs.size(); ++m) {
      witness.conditionals[m](t, tuple[m]) = 1.0;
    }
    for (int m = static_cast<int>(member_subs.size()) - 1; m >= 0; --m) {
      if (++tuple[m] < member_subs[m].num_outcomes()) break;
      tuple[m] = 0;
    }
  }
  return witness;
}

// ---------------------------------------------------------------------------
// Feasibility search
// ---------------------------------------------------------------------------

namespace {

// Least-squares projection onto the affine set
//   { x : sum_{theta : theta_m = omega} x_theta = target_{m,omega} }.
// The Gram matrix of the constraint rows has closed-form entries and is
// entry-independent, so its pseudo-inverse is computed once and applied to
// every matrix entry of the residual stack.
class MarginalProjector {
 public:
  MarginalProjector(const std::vector<int>& outcome_counts,
                    const std::vector<std::vector<Matrix>>& targets, long dim)
      : counts_(outcome_counts), dim_(dim) {
    n_parent_ = 1;
    for (int c : counts_) n_parent_ *= c;
    for (int c : counts_) {
      offsets_.push_back(total_constraints_);
      total_constraints_ += c;
    }

    Eigen::MatrixXd gram(total_constraints_, total_constraints_);
    for (size_t m = 0; m < counts_.size(); ++m) {
      for (int w = 0; w < counts_[m]; ++w) {
        for (size_t mp = 0; mp < counts_.size(); ++mp) {
          for (int wp = 0; wp < counts_[mp]; ++wp) {
            double overlap;
            if (m == mp) {
              overlap = (w == wp) ? static_cast<double>(n_parent_) / counts_[m] : 0.0;
            } else {
              overlap = static_cast<double>(n_parent_) / (counts_[m] * counts_[mp]);
            }
            gram(offsets_[m] + w, offsets_[mp] + wp) = overlap;
          }
        }
      }
    }
    gram_pinv_ = gram.completeOrthogonalDecomposition().pseudoInverse();

    targets_.assign(total_constraints_, Matrix());
    for (size_t m = 0; m < counts_.size(); ++m) {
      for (int w = 0; w < counts_[m]; ++w) {
        targets_[offsets_[m] + w] = targets[m][w];
      }
    }
  }

  int coordinate(long theta, int member) const {
    long rem = theta;
    for (int m = static_cast<int>(counts_.size()) - 1; m > member; --m) {
      rem /= counts_[m];
    }
    return static_cast<int>(rem % counts_[member]);
  }

  std::vector<Matrix> marginal_residuals(const std::vector<Matrix>& x) const {
    std::vector<Matrix> r(total_constraints_, Matrix::Zero(dim_, dim_));
    for (size_t m = 0; m < counts_.size(); ++m) {
      for (long t = 0; t < n_parent_; ++t) {
        r[offsets_[m] + coordinate(t, static_cast<int>(m))] += x[t];
      }
    }
    for (int c = 0; c < total_constraints_; ++c) r[c] = targets_[c] - r[c];
    return r;
  }

  void project(std::vector<Matrix>& x) const {
    const std::vector<Matrix> r = marginal_residuals(x);
    // lambda = pinv(G) r, entrywise over the matrix entries.
    std::vector<Matrix> lambda(total_constraints_, Matrix::Zero(dim_, dim_));
    for (int c = 0; c < total_constraints_; ++c) {
      for (int cp = 0; cp < total_constraints_; ++cp) {
        const double w = gram_pinv_(c, cp);
        if (w != 0.0) lambda[c] += w * r[cp];
      }
    }
    for (long t = 0; t < n_parent_; ++t) {
      for (size_t m = 0; m < counts_.size(); ++m) {
        x[t] += lambda[offsets_[m] + coordinate(t, static_cast<int>(m))];
      }
    }
  }

  double max_violation(const std::vector<Matrix>& x) const {
    double worst = 0.0;
    for (const Matrix& r : marginal_residuals(x)) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(r), Eigen::EigenvaluesOnly);
      worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    return worst;
  }

  long n_parent() const { return n_parent_; }

 private:
  std::vector<int> counts_;
  long dim_;
  long n_parent_ = 1;
  int total_constraints_ = 0;
  std::vector<int> offsets_;
  Eigen::MatrixXd gram_pinv_;
  std::vector<Matrix> targets_;
};

Matrix psd_projection(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(hermitian));
  Eigen::VectorXd evs = es.eigenvalues();
  for (long i = 0; i < evs.size(); ++i) evs[i] = std::max(evs[i], 0.0);
  return es.eigenvectors() * evs.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

FeasibilitySearchResult jm_feasibility_search(const std::vector<Povm>& members,
                                              const SiteSpace& space,
                                              const FeasibilityOptions& opt) {
  if (members.empty()) {
    throw std::invalid_argument("jm_feasibility_search: no members");
  }
  const long dim = space.total_dim();

  std::vector<int> counts;
  std::vector<std::vector<Matrix>> embedded(members.size());
  for (size_t m = 0; m < members.size(); ++m) {
    counts.push_back(members[m].num_outcomes());
    for (const Matrix& e : members[m].effects) {
      const SiteSpace local = space.restricted_to(members[m].support);
      embedded[m].push_back(
          embed_on_subset(DenseOperator(local, e), members[m].support, space).entries);
    }
  }

  MarginalProjector projector(counts, embedded, dim);
  const long n_parent = projector.n_parent();

  // Initial iterate: Hermitized ordered products of the member effects.
  std::vector<Matrix> x(n_parent);
  for (long t = 0; t < n_parent; ++t) {
    Matrix prod = Matrix::Identity(dim, dim);
    for (size_t m = 0; m < members.size(); ++m) {
      prod = prod * embedded[m][projector.coordinate(t, static_cast<int>(m))];
    }
    x[t] = hermitize(prod);
  }

  std::vector<Matrix> correction(n_parent, Matrix::Zero(dim, dim));
  FeasibilitySearchResult result;
  double best_residual = std::numeric_limits<double>::infinity();
  double window_best = std::numeric_limits<double>::infinity();

  for (long iter = 1; iter <= opt.max_iters; ++iter) {
    projector.project(x);
    // Dykstra correction on the cone step only; the other set is affine.
    for (long t = 0; t < n_parent; ++t) {
      const Matrix shifted = x[t] + correction[t];
      const Matrix projected = psd_projection(shifted);
      correction[t] = shifted - projected;
      x[t] = projected;
    }

    const double residual = projector.max_violation(x);
    result.residual_trace.push_back(residual);
    result.iterations = iter;
    best_residual = std::min(best_residual, residual);

    if (residual <= opt.tol) {
      result.status = FeasibilitySearchResult::Status::converged;
      break;
    }
    if (iter % opt.plateau_window == 0) {
      if (std::isfinite(window_best) &&
          (window_best - best_residual) <=
              opt.plateau_rel_improvement * std::max(window_best, 1e-300)) {
        result.status = FeasibilitySearchResult::Status::plateau;
        break;
      }
      window_best = best_residual;
    }
  }
  result.residual = result.residual_trace.empty() ? 0.0 : result.residual_trace.back();
  result.feasible = result.residual <= opt.tol;

  // Package the PSD iterate as a witness with marginalization conditionals.
  std::vector<std::string> labels(n_parent);
  for (long t = 0; t < n_parent; ++t) {
    std::vector<std::string> parts;
    for (size_t m = 0; m < members.size(); ++m) {
      parts.push_back(members[m].labels[projector.coordinate(t, static_cast<int>(m))]);
    }
    labels[t] = joined_label(parts);
  }
  std::vector<int> full_sites(space.num_sites());
  std::iota(full_sites.begin(), full_sites.end(), 0);
  result.witness.parent =
      Povm(full_sites, space.site_dims(), std::move(labels), std::move(x));
  result.witness.conditionals.assign(members.size(), Eigen::MatrixXd());
  for (size_t m = 0; m < members.size(); ++m) {
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(n_parent, counts[m]);
    for (long t = 0; t < n_parent; ++t) {
      table(t, projector.coordinate(t, static_cast<int>(m))) = 1.0;
    }
    result.witness.conditionals[m] = std::move(table);
  }
  result.witness.residual = result.residual;
  return result;
}

// ---------------------------------------------------------------------------
// Commutation chain
// ---------------------------------------------------------------------------

double CommutationChainReport::max_step_residual() const {
  double worst = 0.0;
  for (double r : step_residuals) worst = std::max(worst, r);
  return worst;
}

CommutationChainReport commutation_chain_check(const Povm& f_povm, const Povm& g_povm,
                                               const Povm& f_sub, const Povm& g_sub,
                                               const StateVector& psi,
                                               double delta_tol) {
  CommutationChainReport report;
  report.preconditions_ok = true;

  for (const auto* p : {&f_povm, &g_povm, &f_sub, &g_sub}) {
    const PovmValidation v = validate_povm(*p);
    if (!v.valid() || !v.projective) {
      report.preconditions_ok = false;
      report.violations.push_back("POVM is not a valid projective measurement");
      break;
    }
  }
  if (f_povm.labels != f_sub.labels || g_povm.labels != g_sub.labels) {
    report.preconditions_ok = false;
    report.violations.push_back("label sets differ within a family");
  }

  auto overlap = [](const std::vector<int>& a, const std::vector<int>& b) {
    for (int s : a) {
      for (int t : b) {
        if (s == t) return true;
      }
    }
    return false;
  };
  if (overlap(f_povm.support, g_sub.support)) {
    report.preconditions_ok = false;
    report.violations.push_back("f intersects g'");
  }
  if (overlap(f_sub.support, g_sub.support)) {
    report.preconditions_ok = false;
    report.violations.push_back("f' intersects g'");
  }
  if (overlap(f_sub.support, g_povm.support)) {
    report.preconditions_ok = false;
    report.violations.push_back("f' intersects g");
  }

  const SystemState state(psi);
  auto check_records = [&](const Povm& a, const Povm& b, const char* name) {
    if (overlap(a.support, b.support)) return;  // already reported
    const double d1 = record_delta(a, b, state).delta;
    const double d2 = record_delta(b, a, state).delta;
    if (std::max(d1, d2) > delta_tol) {
      report.preconditions_ok = false;
      report.violations.push_back(std::string(name) + " records are not 0-delta");
    }
  };
  if (!overlap(f_povm.support, f_sub.support)) {
    check_records(f_povm, f_sub, "F");
  }
  if (!overlap(g_povm.support, g_sub.support)) {
    check_records(g_povm, g_sub, "G");
  }

  const auto apply = [&psi](const Vector& v, const Povm& p, int outcome) {
    return apply_subset_operator(v, psi.space, p.effects[outcome], p.support);
  };

  for (int a = 0; a < f_povm.num_outcomes(); ++a) {
    for (int mu = 0; mu < g_povm.num_outcomes(); ++mu) {
      const Vector g_psi = apply(psi.amplitudes, g_povm, mu);
      const Vector gp_psi = apply(psi.amplitudes, g_sub, mu);
      const Vector v1 = apply(g_psi, f_povm, a);    // F_f G_g psi
      const Vector v2 = apply(gp_psi, f_povm, a);   // F_f G_g' psi
      const Vector v3 = apply(gp_psi, f_sub, a);    // F_f' G_g' psi
      const Vector fp_psi = apply(psi.amplitudes, f_sub, a);
      const Vector v4 = apply(fp_psi, g_sub, mu);   // G_g' F_f' psi
      const Vector v5 = apply(fp_psi, g_povm, mu);  // G_g F_f' psi
      const Vector f_psi = apply(psi.amplitudes, f_povm, a);
      const Vector v6 = apply(f_psi, g_povm, mu);   // G_g F_f psi

      report.step_residuals[0] = std::max(report.step_residuals[0], (v1 - v2).norm());
      report.step_residuals[1] = std::max(report.step_residuals[1], (v2 - v3).norm());
      report.step_residuals[2] = std::max(report.step_residuals[2], (v3 - v4).norm());
      report.step_residuals[3] = std::max(report.step_residuals[3], (v4 - v5).norm());
      report.step_residuals[4] = std::max(report.step_residuals[4], (v5 - v6).norm());
      report.commutator_residual =
          std::max(report.commutator_residual, (v1 - v6).norm());
    }
  }
  return report;
}

}  // namespace qdarwin
