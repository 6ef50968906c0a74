#include "qdarwin/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qdarwin {

Povm::Povm(std::vector<int> support_sites, std::vector<int> dims,
           std::vector<std::string> outcome_labels,
           std::vector<Matrix> outcome_effects)
    : support(std::move(support_sites)),
      local_dims(std::move(dims)),
      labels(std::move(outcome_labels)),
      effects(std::move(outcome_effects)) {
  if (support.size() != local_dims.size()) {
    throw std::invalid_argument("Povm: support/local_dims size mismatch");
  }
  if (labels.size() != effects.size()) {
    throw std::invalid_argument("Povm: labels/effects size mismatch");
  }
  const long d = local_dim();
  for (const Matrix& e : effects) {
    if (e.rows() != d || e.cols() != d) {
      throw std::invalid_argument("Povm: effect dimension does not match support");
    }
  }
}

long Povm::local_dim() const {
  long d = 1;
  for (int dim : local_dims) d *= dim;
  return d;
}

int Povm::outcome_index(const std::string& label) const {
  for (int i = 0; i < num_outcomes(); ++i) {
    if (labels[i] == label) return i;
  }
  return -1;
}

PovmValidation validate_povm(const Povm& p, double tol) {
  PovmValidation v;
  std::set<std::string> seen(p.labels.begin(), p.labels.end());
  v.labels_unique = seen.size() == p.labels.size();

  const long d = p.local_dim();
  Matrix sum = Matrix::Zero(d, d);
  double min_ev = 0.0;
  for (const Matrix& e : p.effects) {
    sum += e;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(e), Eigen::EigenvaluesOnly);
    min_ev = std::min(min_ev, es.eigenvalues().minCoeff());
    if ((e - e.adjoint()).cwiseAbs().maxCoeff() > tol) v.psd = false;
  }
  v.min_eigenvalue = min_ev;
  if (min_ev < -tol) v.psd = false;
  v.completeness_residual = (sum - Matrix::Identity(d, d)).norm();
  v.complete = v.completeness_residual <= tol;

  // Projective: each effect idempotent and distinct effects orthogonal.
  v.projective = true;
  for (int i = 0; i < p.num_outcomes() && v.projective; ++i) {
    if ((p.effects[i] * p.effects[i] - p.effects[i]).cwiseAbs().maxCoeff() > tol) {
      v.projective = false;
    }
    for (int j = i + 1; j < p.num_outcomes() && v.projective; ++j) {
      if ((p.effects[i] * p.effects[j]).cwiseAbs().maxCoeff() > tol) {
        v.projective = false;
      }
    }
  }
  return v;
}

std::vector<double> outcome_probabilities(const Povm& p, const SystemState& state) {
  std::vector<double> probs;
  probs.reserve(p.num_outcomes());
  for (const Matrix& e : p.effects) {
    probs.push_back(subset_expectation(state, e, p.support).real());
  }
  return probs;
}

long JointDistribution::flatten(const std::vector<int>& outcomes) const {
  long idx = 0;
  for (size_t m = 0; m < outcome_counts.size(); ++m) {
    idx = idx * outcome_counts[m] + outcomes[m];
  }
  return idx;
}

std::vector<int> JointDistribution::unflatten(long index) const {
  std::vector<int> outcomes(outcome_counts.size());
  for (int m = static_cast<int>(outcome_counts.size()) - 1; m >= 0; --m) {
    outcomes[m] = static_cast<int>(index % outcome_counts[m]);
    index /= outcome_counts[m];
  }
  return outcomes;
}

std::vector<double> JointDistribution::marginal(int member) const {
  std::vector<double> out(outcome_counts[member], 0.0);
  for (long i = 0; i < static_cast<long>(probabilities.size()); ++i) {
    out[unflatten(i)[member]] += probabilities[i];
  }
  return out;
}

JointDistribution joint_outcome_probabilities(const std::vector<Povm>& ps,
                                              const SystemState& state) {
  std::set<int> seen;
  std::vector<int> joint_support;
  for (const Povm& p : ps) {
    for (int s : p.support) {
      if (!seen.insert(s).second) {
        throw std::invalid_argument(
            "joint_outcome_probabilities: POVM supports overlap");
      }
      joint_support.push_back(s);
    }
  }

  JointDistribution dist;
  long n_tuples = 1;
  for (const Povm& p : ps) {
    dist.outcome_counts.push_back(p.num_outcomes());
    n_tuples *= p.num_outcomes();
  }
  dist.probabilities.assign(n_tuples, 0.0);

  for (long t = 0; t < n_tuples; ++t) {
    const std::vector<int> outcomes = dist.unflatten(t);
    Matrix effect = ps[0].effects[outcomes[0]];
    for (size_t m = 1; m < ps.size(); ++m) {
      effect = kron(effect, ps[m].effects[outcomes[m]]);
    }
    dist.probabilities[t] = subset_expectation(state, effect, joint_support).real();
  }
  return dist;
}

RecordDelta record_delta(const Povm& f_povm, const Povm& fprime_povm,
                         const SystemState& state, double weight_floor) {
  if (f_povm.labels != fprime_povm.labels) {
    throw std::invalid_argument("record_delta: outcome label sets differ");
  }
  for (int s : f_povm.support) {
    for (int t : fprime_povm.support) {
      if (s == t) {
        throw std::invalid_argument("record_delta: POVM supports overlap");
      }
    }
  }

  std::vector<int> joint_support = f_povm.support;
  joint_support.insert(joint_support.end(), fprime_povm.support.begin(),
                       fprime_povm.support.end());

  RecordDelta out;
  for (int a = 0; a < f_povm.num_outcomes(); ++a) {
    const double base =
        subset_expectation(state, f_povm.effects[a], f_povm.support).real();
    out.weight[f_povm.labels[a]] = base;
    if (base <= weight_floor) {
      // Vacuous conditioning: the record inequality holds trivially.
      out.agreement[f_povm.labels[a]] = 1.0;
      continue;
    }
    const Matrix joint_effect = kron(f_povm.effects[a], fprime_povm.effects[a]);
    const double joint =
        subset_expectation(state, joint_effect, joint_support).real();
    const double agreement = joint / base;
    out.agreement[f_povm.labels[a]] = agreement;
    out.delta = std::max(out.delta, std::min(1.0, std::max(0.0, 1.0 - agreement)));
  }
  return out;
}

RecordAudit redundancy_audit(const std::vector<Povm>& block_povms,
                             const Partition& partition, const SystemState& state,
                             double weight_floor) {
  if (static_cast<int>(block_povms.size()) != partition.num_blocks()) {
    throw std::invalid_argument("redundancy_audit: one POVM per block required");
  }
  for (int b = 0; b < partition.num_blocks(); ++b) {
    std::vector<int> sorted_support = block_povms[b].support;
    std::sort(sorted_support.begin(), sorted_support.end());
    for (int s : sorted_support) {
      if (!std::binary_search(partition.blocks[b].begin(),
                              partition.blocks[b].end(), s)) {
        throw std::invalid_argument(
            "redundancy_audit: POVM support escapes its block");
      }
    }
    if (block_povms[b].labels != block_povms[0].labels) {
      throw std::invalid_argument("redundancy_audit: label sets differ across blocks");
    }
  }

  RecordAudit audit;
  audit.partition = partition;
  for (int i = 0; i < partition.num_blocks(); ++i) {
    for (int j = 0; j < partition.num_blocks(); ++j) {
      if (i == j) continue;
      const RecordDelta rd =
          record_delta(block_povms[i], block_povms[j], state, weight_floor);
      audit.per_pair_delta[{i, j}] = rd.delta;
      audit.overall_delta = std::max(audit.overall_delta, rd.delta);
      for (const auto& [label, agreement] : rd.agreement) {
        audit.per_outcome[{i, j, label}] = agreement;
      }
    }
  }
  return audit;
}

LemmaReport verify_perfect_imprint_lemma(const Povm& f_povm, const Povm& fprime_povm,
                                         const StateVector& psi, double delta_tol) {
  LemmaReport report;
  report.preconditions_ok = true;

  const PovmValidation vf = validate_povm(f_povm);
  const PovmValidation vf2 = validate_povm(fprime_povm);
  if (!vf.valid() || !vf.projective) {
    report.preconditions_ok = false;
    report.violations.push_back("first POVM is not a valid projective measurement");
  }
  if (!vf2.valid() || !vf2.projective) {
    report.preconditions_ok = false;
    report.violations.push_back("second POVM is not a valid projective measurement");
  }
  if (f_povm.labels != fprime_povm.labels) {
    report.preconditions_ok = false;
    report.violations.push_back("outcome label sets differ");
  }

  bool overlap = false;
  for (int s : f_povm.support) {
    for (int t : fprime_povm.support) overlap |= (s == t);
  }
  if (overlap) {
    report.preconditions_ok = false;
    report.violations.push_back("supports overlap");
    return report;
  }

  const RecordDelta rd = record_delta(f_povm, fprime_povm, SystemState(psi));
  if (rd.delta > delta_tol) {
    report.preconditions_ok = false;
    report.violations.push_back("record delta exceeds tolerance (" +
                                std::to_string(rd.delta) + ")");
  }

  for (int a = 0; a < f_povm.num_outcomes(); ++a) {
    const Vector f_psi = apply_subset_operator(psi.amplitudes, psi.space,
                                               f_povm.effects[a], f_povm.support);
    const Vector fp_psi = apply_subset_operator(
        psi.amplitudes, psi.space, fprime_povm.effects[a], fprime_povm.support);
    const Vector joint_psi = apply_subset_operator(
        f_psi, psi.space, fprime_povm.effects[a], fprime_povm.support);
    report.max_joint_residual =
        std::max(report.max_joint_residual, (joint_psi - f_psi).norm());
    report.max_swap_residual =
        std::max(report.max_swap_residual, (f_psi - fp_psi).norm());
  }
  return report;
}

}  // namespace qdarwin
