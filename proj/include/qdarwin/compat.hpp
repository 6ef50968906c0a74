#pragma once

#include "qdarwin/measurement.hpp"
#include "qdarwin/tensor.hpp"

#include <string>
#include <vector>

namespace qdarwin {

/// The set of attainable states a joint-measurability statement is scoped to.
struct StateSet {
  std::vector<SystemState> states;
  std::string tag;
};

/// Parent POVM plus classical post-processing tables. conditionals[m] is an
/// (n_parent_outcomes x n_member_outcomes) row-stochastic matrix giving
/// p(omega | member m, theta).
struct JmWitness {
  Povm parent;
  std::vector<Eigen::MatrixXd> conditionals;
  double residual = 0.0;
};

struct JmVerification {
  double max_residual = 0.0;
  int worst_member = -1;
  int worst_outcome = -1;
  int worst_state = -1;
};

/// Max over members O, outcomes omega and states rho of
///   | tr(O^omega rho) - sum_theta p(omega|O,theta) tr(T^theta rho) |.
JmVerification verify_jm_witness(const std::vector<Povm>& members,
                                 const JmWitness& witness, const StateSet& d_set);

/// Parent F_{f'} x G_{g'} with marginalization conditionals. Requires the
/// disjointness pattern f' n g' = f n g' = g n f' = {} and matching label
/// sets between each member and its primed replacement.
JmWitness constructive_parent(const Povm& f_povm, const Povm& g_povm,
                              const Povm& f_sub, const Povm& g_sub);

/// Product parent over any number of pairwise-disjoint primed blocks, with
/// per-member marginalization conditionals.
JmWitness constructive_tuple_parent(const std::vector<Povm>& member_subs);

struct FeasibilityOptions {
  double tol = 1e-8;
  long max_iters = 10000;
  int plateau_window = 100;
  double plateau_rel_improvement = 1e-10;
};

struct FeasibilitySearchResult {
  enum class Status { converged, plateau, iteration_limit };
  Status status = Status::iteration_limit;
  bool feasible = false;       // residual <= tol
  double residual = 0.0;       // max constraint violation at the last iterate
  long iterations = 0;
  JmWitness witness;           // best PSD iterate, always populated
  std::vector<double> residual_trace;
};

/// Searches for a parent POVM with outcome set = product of member label sets
/// and deterministic marginalization conditionals, by Dykstra-corrected
/// alternating projections between the PSD cone (per effect) and the affine
/// set of marginal constraints. Members may live on subsets of `space`; they
/// are embedded before the search. Non-convergence is reported, not thrown.
FeasibilitySearchResult jm_feasibility_search(const std::vector<Povm>& members,
                                              const SiteSpace& space,
                                              const FeasibilityOptions& opt = {});

/// Residual audit of the five-step commutation chain that moves F through G
/// via the primed replacement blocks, plus the end-to-end commutator
/// ||[F^a_f, G^m_g]|psi>||. All five step residuals are <= 1e-8 when the
/// preconditions (projective 0-delta records, witness disjointness pattern)
/// hold; the commutator is reported even when they fail.
struct CommutationChainReport {
  bool preconditions_ok = false;
  std::vector<std::string> violations;
  // max over outcome pairs of the residual of each chain step
  double step_residuals[5] = {0, 0, 0, 0, 0};
  double commutator_residual = 0.0;
  double max_step_residual() const;
};

CommutationChainReport commutation_chain_check(const Povm& f_povm, const Povm& g_povm,
                                               const Povm& f_sub, const Povm& g_sub,
                                               const StateVector& psi,
                                               double delta_tol = 1e-9);

}  // namespace qdarwin
