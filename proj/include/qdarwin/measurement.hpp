#pragma once

#include "qdarwin/covering.hpp"
#include "qdarwin/tensor.hpp"

#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace qdarwin {

/// Finite list of labeled effects on a site subset. Validity (PSD effects,
/// completeness, unique labels) is checked by validate_povm, not enforced at
/// construction.
struct Povm {
  std::vector<int> support;      // ordered global site indices
  std::vector<int> local_dims;   // dimension per support site
  std::vector<std::string> labels;
  std::vector<Matrix> effects;   // same order as labels

  Povm() = default;
  Povm(std::vector<int> support_sites, std::vector<int> dims,
       std::vector<std::string> outcome_labels, std::vector<Matrix> outcome_effects);

  int num_outcomes() const { return static_cast<int>(effects.size()); }
  long local_dim() const;
  int outcome_index(const std::string& label) const;  // -1 when absent
};

struct PovmValidation {
  bool labels_unique = true;
  bool psd = true;                 // every effect PSD within tolerance
  double min_eigenvalue = 0.0;     // most negative effect eigenvalue seen
  double completeness_residual = 0.0;  // Frobenius norm of (sum effects - I)
  bool complete = true;
  bool projective = false;  // idempotent and mutually orthogonal effects

  bool valid() const { return labels_unique && psd && complete; }
};

PovmValidation validate_povm(const Povm& p, double tol = 1e-9);

/// Outcome distribution of a single POVM: tr(embed(effect) rho) per label.
/// Probabilities are reported in effect order.
std::vector<double> outcome_probabilities(const Povm& p, const SystemState& state);

/// Joint distribution of several POVMs on pairwise-disjoint supports, indexed
/// row-major over the outcome tuples (first POVM most significant).
struct JointDistribution {
  std::vector<int> outcome_counts;  // per POVM
  std::vector<double> probabilities;

  long flatten(const std::vector<int>& outcomes) const;
  std::vector<int> unflatten(long index) const;
  /// Marginal over one member (summing out all others).
  std::vector<double> marginal(int member) const;
};

JointDistribution joint_outcome_probabilities(const std::vector<Povm>& ps,
                                              const SystemState& state);

/// Smallest delta for which `fprime_povm` delta-approximately records
/// `f_povm` on the state: max over outcomes of
///   1 - tr(F^a x F'^a rho) / tr(F^a rho).
/// Outcomes whose base probability tr(F^a rho) <= weight_floor are vacuously
/// recorded and contribute 0.
struct RecordDelta {
  double delta = 0.0;
  std::map<std::string, double> agreement;  // conditional agreement per outcome
  std::map<std::string, double> weight;     // tr(F^a rho) per outcome
};

RecordDelta record_delta(const Povm& f_povm, const Povm& fprime_povm,
                         const SystemState& state, double weight_floor = 1e-12);

/// Redundancy audit over a partition: record_delta for every ordered block
/// pair, overall delta = max. Records are audited for ordered pairs; both
/// directions are reported.
struct RecordAudit {
  Partition partition;
  std::map<std::pair<int, int>, double> per_pair_delta;
  double overall_delta = 0.0;
  std::map<std::tuple<int, int, std::string>, double> per_outcome;  // agreement
};

RecordAudit redundancy_audit(const std::vector<Povm>& block_povms,
                             const Partition& partition, const SystemState& state,
                             double weight_floor = 1e-12);

/// Checks the perfect-imprint consequence of a 0-delta projective record:
///   max_a ||(F^a x F'^a)|psi> - F^a|psi>||  and  max_a ||F^a|psi> - F'^a|psi>||
/// are both <= 1e-8 when the preconditions hold.
struct LemmaReport {
  bool preconditions_ok = false;
  std::vector<std::string> violations;
  double max_joint_residual = 0.0;   // ||(F^a x F'^a)psi - F^a psi||
  double max_swap_residual = 0.0;    // ||F^a psi - F'^a psi||
  double max_residual() const {
    return std::max(max_joint_residual, max_swap_residual);
  }
};

LemmaReport verify_perfect_imprint_lemma(const Povm& f_povm, const Povm& fprime_povm,
                                         const StateVector& psi,
                                         double delta_tol = 1e-9);

}  // namespace qdarwin
