#pragma once

#include "qdarwin/measurement.hpp"
#include "qdarwin/tensor.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace qdarwin {

/// CPTP map from a d_in-dimensional input to a multi-site output, in Kraus
/// form. Trace preservation (sum K^dag K = I) is validated on construction.
struct Channel {
  int input_dim = 0;
  SiteSpace output_space;
  std::vector<Matrix> kraus;  // each output_dim x input_dim

  Channel() = default;
  Channel(int d_in, SiteSpace out, std::vector<Matrix> ops, double tp_tol = 1e-9);

  double trace_preservation_residual() const;
  DenseOperator apply(const Matrix& sigma) const;
};

/// Normalized Choi state (1 x Lambda)(|phi><phi|) on reference x system, with
/// |phi> the maximally entangled state of reference dimension d_R. Site 0 of
/// the joint space is the reference; system site s sits at joint site s + 1.
struct ChoiState {
  int reference_dim = 0;
  SiteSpace system_space;
  DenseOperator rho;  // on reference x system

  SiteSpace joint_space() const;
  std::vector<int> joint_sites_of_system(const std::vector<int>& system_sites) const;
};

Channel random_channel(int d_in, const std::vector<int>& site_dims, int rank,
                       std::uint64_t seed);

ChoiState choi_state(const Channel& ch);

/// Channel output reconstructed from the Choi state:
///   Lambda(sigma) = d_R tr_ref(rho (sigma^T x 1)).
DenseOperator apply_via_choi(const ChoiState& choi, const Matrix& sigma);

/// One component of a measure-and-prepare decomposition of a Choi state:
/// outcome probability p = tr(T^theta rho) and the normalized conditional
/// state on reference x (system minus q), ordered reference first then the
/// remaining system sites ascending. Outcomes with p below the floor are
/// flagged and carry the maximally mixed conditional.
struct PreparedComponent {
  double probability = 0.0;
  DenseOperator conditional;  // on reference + system \ q
  bool flagged_zero = false;
};

std::vector<PreparedComponent> measure_prepare_decomposition(
    const ChoiState& choi, const std::vector<int>& q, const Povm& t_q,
    double probability_floor = 1e-12);

/// Analytic deviation bound d_R sqrt(2 ln(d_R) w_f / w_q).
double blanket_delta_bound(int d_r, int w_f, int w_q);

struct BlanketOptions {
  int w_q = 1;
  int w_f = 1;
  /// When false, only subsets of size exactly w_q are scored; when true, all
  /// nonempty subsets of size <= w_q are scored (sizes descending, so equal
  /// scores resolve to the largest allowed blanket).
  bool include_smaller_subsets = true;
  long max_candidates = 100000;
  int random_bases_q = 2;   // random product bases tried for T_q per subset
  int random_bases_f = 2;   // random product bases tried per fragment
  int f_samples = 4;        // fragments sampled per candidate subset
  std::uint64_t seed = 0;
};

struct BlanketResult {
  std::vector<int> q;
  Povm t_q;                       // best-scoring measurement on q
  std::vector<double> p_theta;    // outcome distribution of t_q on the Choi state
  /// Conditional fragment states rho^theta_f for every fragment evaluated
  /// during scoring of the returned q, keyed by fragment.
  std::map<std::vector<int>, std::vector<Matrix>> prepared_f;
  double score = 0.0;             // max sampled CMI for the returned (q, T_q)
  double delta_bound = 0.0;       // analytic bound at the requested w_q
  int w_q_param = 0;
  int w_f_param = 0;
  long candidates_scored = 0;
};

BlanketResult find_markov_blanket(const ChoiState& choi, const BlanketOptions& opt);

struct BoundTrial {
  Matrix sigma;          // input state on the reference
  std::vector<int> f;    // fragment, disjoint from q, |f| = w_f
  Povm f_povm;           // measurement on f
};

/// Deviation report for the decomposition induced by a blanket:
///   | tr(F^a Lambda(sigma)) - sum_theta p(a|F,theta) tr(T^theta Lambda(sigma)) |
/// with p(a|F,theta) = tr(F^a rho^theta_f) taken from the Choi decomposition
/// (independent of sigma by construction).
struct BoundReport {
  double max_deviation = 0.0;
  std::vector<double> per_trial;
  double delta_actual = 0.0;   // analytic bound at the achieved |q|
  double delta_param = 0.0;    // analytic bound at the requested w_q
  double bound_used = 0.0;     // min(1, delta_actual)
  bool within_bound = false;
};

BoundReport verify_deviation_bound(const ChoiState& choi, const BlanketResult& blanket,
                                 const std::vector<BoundTrial>& trials);

/// (lhs, rhs) of the Pinsker-type inequality
///   ||rho_ab - rho_a x rho_b||_1^2 / (2 ln 2) <= I(a:b)  [bits].
std::pair<double, double> pinsker_check(const DenseOperator& rho_joint,
                                        const std::vector<int>& a,
                                        const std::vector<int>& b);

// ---------------------------------------------------------------------------
// Conditional-state machinery shared by the blanket search and the bound
// verifier (exposed for tests).
// ---------------------------------------------------------------------------

/// Conditional states of `rho` on `keep` after a basis measurement on
/// `measured`: outcome theta has probability p_theta and conditional state
/// proportional to <t_theta| rho |t_theta> (partial inner products), where
/// |t_theta> is the theta-th column of `basis` on the measured subspace.
std::vector<PreparedComponent> basis_measurement_conditionals(
    const DenseOperator& rho, const std::vector<int>& measured,
    const Matrix& basis, const std::vector<int>& keep,
    double probability_floor = 1e-12);

/// The same decomposition for a general effect list on `measured`.
std::vector<PreparedComponent> effect_measurement_conditionals(
    const DenseOperator& rho, const std::vector<int>& measured,
    const std::vector<Matrix>& effects, const std::vector<int>& keep,
    double probability_floor = 1e-12);

/// I(keep : B | theta-register) for the classical-quantum state produced by
/// measuring `measured_a` (outcomes theta, conditioning register) and
/// `measured_b` (outcomes alpha) in the given product of bases: equals
/// sum_theta p_theta [ S(rho^theta) - sum_a p(a|theta) S(rho^{theta a}) ].
double measured_cmi(const DenseOperator& rho, const std::vector<int>& keep,
                    const std::vector<int>& measured_a, const Matrix& basis_a,
                    const std::vector<int>& measured_b, const Matrix& basis_b);

}  // namespace qdarwin
