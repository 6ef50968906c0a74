#pragma once

#include <Eigen/Dense>

#include <complex>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace qdarwin {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Rng = std::mt19937_64;

/// Labeled multi-site Hilbert space. Site 0 is the most significant tensor
/// factor: the flat index of a basis state is sum_k digit_k * stride_k with
/// stride_k = prod of the dimensions of all sites after k. Every basis-state
/// integer encoding in the library follows this convention.
class SiteSpace {
 public:
  SiteSpace() = default;
  explicit SiteSpace(std::vector<int> site_dims);
  static SiteSpace qubits(int n);

  int num_sites() const { return static_cast<int>(dims_.size()); }
  int site_dim(int site) const;
  long stride(int site) const;
  long total_dim() const { return total_; }
  const std::vector<int>& site_dims() const { return dims_; }

  /// Space spanned by `sites`, in the given order.
  SiteSpace restricted_to(const std::vector<int>& sites) const;

  bool operator==(const SiteSpace& other) const { return dims_ == other.dims_; }

 private:
  std::vector<int> dims_;
  std::vector<long> strides_;
  long total_ = 1;
};

/// Complex square matrix on a labeled multi-site space. Hermiticity, PSD-ness
/// and unit trace are checkable predicates, not construction-time
/// requirements.
struct DenseOperator {
  SiteSpace space;
  Matrix entries;

  DenseOperator() = default;
  DenseOperator(SiteSpace s, Matrix m);

  long dim() const { return space.total_dim(); }
  Complex trace() const { return entries.trace(); }
  bool is_hermitian(double tol = 1e-9) const;
  bool is_psd(double tol = 1e-9) const;
  bool is_density_matrix(double tol = 1e-8) const;
};

/// Normalized state vector on a labeled multi-site space.
struct StateVector {
  SiteSpace space;
  Vector amplitudes;

  StateVector() = default;
  /// Normalizes on construction; throws if the input norm deviates from 1 by
  /// more than `norm_tol` (1e-10 by default) or is numerically zero.
  StateVector(SiteSpace s, Vector amps, double norm_tol = 1e-10);

  long dim() const { return space.total_dim(); }
  DenseOperator density() const;
};

/// A state that is either pure (vector) or mixed (density matrix). Operations
/// that only need expectation values accept either representation; pure
/// states stay at vector cost.
class SystemState {
 public:
  SystemState() = default;
  SystemState(StateVector psi) : rep_(std::move(psi)) {}
  SystemState(DenseOperator rho) : rep_(std::move(rho)) {}

  bool is_pure() const { return std::holds_alternative<StateVector>(rep_); }
  const SiteSpace& space() const;
  const StateVector& vector() const { return std::get<StateVector>(rep_); }
  const DenseOperator& matrix() const { return std::get<DenseOperator>(rep_); }
  /// Density-matrix view (materializes |psi><psi| for pure states).
  DenseOperator to_density() const;

 private:
  std::variant<StateVector, DenseOperator> rep_;
};

/// Flat-index bookkeeping for a subset of sites: full index = sub_index
/// contribution + rest_index contribution. `subset` order defines the local
/// index ordering; the remaining sites keep ascending order.
class SubsetIndexer {
 public:
  SubsetIndexer(const SiteSpace& space, const std::vector<int>& subset);

  long subset_dim() const { return static_cast<long>(sub_contrib_.size()); }
  long rest_dim() const { return static_cast<long>(rest_contrib_.size()); }
  long compose(long sub_index, long rest_index) const {
    return sub_contrib_[sub_index] + rest_contrib_[rest_index];
  }
  const std::vector<int>& subset() const { return subset_; }
  const std::vector<int>& rest() const { return rest_; }

 private:
  std::vector<int> subset_;
  std::vector<int> rest_;
  std::vector<long> sub_contrib_;
  std::vector<long> rest_contrib_;
};

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

/// Tensor `op` (acting on `subset`, in subset order) with the identity on all
/// other sites of `target`, permuted to the target site ordering.
DenseOperator embed_on_subset(const DenseOperator& op,
                              const std::vector<int>& subset,
                              const SiteSpace& target);

/// Partial trace onto `keep`. The result lives on the space restricted to
/// `keep` in the given order; all other sites are traced out.
DenseOperator partial_trace(const DenseOperator& rho,
                            const std::vector<int>& keep);

/// Von Neumann entropy in bits: -sum lambda log2 lambda. Eigenvalues in
/// [-1e-10, 0] are clipped to 0; values below -psd_tol raise.
double von_neumann_entropy(const DenseOperator& rho, double psd_tol = 1e-8);

/// Mutual information I(a:b) = S(a) + S(b) - S(ab), in bits.
double mutual_information(const DenseOperator& rho, const std::vector<int>& a,
                          const std::vector<int>& b);

/// Conditional mutual information I(a:b|c) = S(ac) + S(bc) - S(abc) - S(c),
/// in bits. The three subsets must be pairwise disjoint; c may be empty.
double conditional_mutual_information(const DenseOperator& rho,
                                      const std::vector<int>& a,
                                      const std::vector<int>& b,
                                      const std::vector<int>& c);

/// Trace distance 0.5 * ||a - b||_1 via singular values of the difference.
double trace_distance(const DenseOperator& a, const DenseOperator& b);

/// 0.5 * ||m||_1 of a raw matrix (no space bookkeeping).
double trace_norm_half(const Matrix& m);

// ---------------------------------------------------------------------------
// Expectation values and local maps
// ---------------------------------------------------------------------------

/// tr(embed(op) rho) without materializing the embedding.
Complex subset_expectation(const DenseOperator& rho, const Matrix& op,
                           const std::vector<int>& subset);
/// <psi| embed(op) |psi> without materializing the embedding.
Complex subset_expectation(const StateVector& psi, const Matrix& op,
                           const std::vector<int>& subset);
Complex subset_expectation(const SystemState& state, const Matrix& op,
                           const std::vector<int>& subset);

/// embed(op) |psi| as a raw (possibly unnormalized) vector.
Vector apply_subset_operator(const Vector& amplitudes, const SiteSpace& space,
                             const Matrix& op, const std::vector<int>& subset);

/// rho -> sum_k K rho K^dag with each Kraus operator acting on `subset`.
DenseOperator apply_subset_kraus(const DenseOperator& rho,
                                 const std::vector<int>& subset,
                                 const std::vector<Matrix>& kraus);

/// Kronecker product, first factor most significant.
Matrix kron(const Matrix& a, const Matrix& b);

/// Hermitian part (A + A^dag)/2.
Matrix hermitize(const Matrix& a);

/// Largest singular value (operator norm).
double operator_norm(const Matrix& a);

/// Ascending eigenvalues of a Hermitian matrix, with values in [-clip_tol, 0]
/// clipped to 0. Throws if any eigenvalue is below -fail_tol.
Eigen::VectorXd clipped_eigenvalues(const Matrix& hermitian,
                                    double clip_tol = 1e-10,
                                    double fail_tol = 1e-8);

// ---------------------------------------------------------------------------
// Random structures (all deterministic under the caller's generator)
// ---------------------------------------------------------------------------

Matrix random_unitary(long dim, Rng& rng);
Matrix random_density_matrix(long dim, Rng& rng);
StateVector random_state_vector(const SiteSpace& space, Rng& rng);
/// First `cols` columns of a Haar-random `rows x rows` unitary; requires
/// cols <= rows.
Matrix haar_isometry(long rows, long cols, Rng& rng);

}  // namespace qdarwin
