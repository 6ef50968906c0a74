#include "qdarwin/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace qdarwin {

namespace {

void check_sites_valid(const SiteSpace& space, const std::vector<int>& sites,
                       const char* what) {
  std::unordered_set<int> seen;
  for (int s : sites) {
    if (s < 0 || s >= space.num_sites()) {
      throw std::invalid_argument(std::string(what) + ": site index " +
                                  std::to_string(s) + " out of range");
    }
    if (!seen.insert(s).second) {
      throw std::invalid_argument(std::string(what) + ": duplicate site " +
                                  std::to_string(s));
    }
  }
}

}  // namespace

SiteSpace::SiteSpace(std::vector<int> site_dims) : dims_(std::move(site_dims)) {
  for (int d : dims_) {
    if (d < 1) throw std::invalid_argument("SiteSpace: site dimension must be >= 1");
  }
  strides_.assign(dims_.size(), 1);
  for (int k = static_cast<int>(dims_.size()) - 2; k >= 0; --k) {
    strides_[k] = strides_[k + 1] * dims_[k + 1];
  }
  total_ = dims_.empty() ? 1 : strides_[0] * dims_[0];
}

SiteSpace SiteSpace::qubits(int n) {
  if (n < 0) throw std::invalid_argument("SiteSpace::qubits: negative count");
  return SiteSpace(std::vector<int>(n, 2));
}

int SiteSpace::site_dim(int site) const {
  if (site < 0 || site >= num_sites()) {
    throw std::invalid_argument("SiteSpace::site_dim: index out of range");
  }
  return dims_[site];
}

long SiteSpace::stride(int site) const {
  if (site < 0 || site >= num_sites()) {
    throw std::invalid_argument("SiteSpace::stride: index out of range");
  }
  return strides_[site];
}

SiteSpace SiteSpace::restricted_to(const std::vector<int>& sites) const {
  check_sites_valid(*this, sites, "SiteSpace::restricted_to");
  std::vector<int> dims;
  dims.reserve(sites.size());
  for (int s : sites) dims.push_back(dims_[s]);
  return SiteSpace(dims);
}

DenseOperator::DenseOperator(SiteSpace s, Matrix m)
    : space(std::move(s)), entries(std::move(m)) {
  if (entries.rows() != entries.cols() ||
      entries.rows() != space.total_dim()) {
    throw std::invalid_argument(
        "DenseOperator: matrix shape does not match space dimension");
  }
}

bool DenseOperator::is_hermitian(double tol) const {
  return (entries - entries.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool DenseOperator::is_psd(double tol) const {
  if (!is_hermitian(std::max(tol, 1e-9))) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(entries),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

bool DenseOperator::is_density_matrix(double tol) const {
  return is_psd(tol) && std::abs(trace() - Complex(1.0, 0.0)) <= tol;
}

StateVector::StateVector(SiteSpace s, Vector amps, double norm_tol)
    : space(std::move(s)), amplitudes(std::move(amps)) {
  if (amplitudes.size() != space.total_dim()) {
    throw std::invalid_argument("StateVector: length does not match space");
  }
  const double norm = amplitudes.norm();
  if (norm < 1e-14) throw std::invalid_argument("StateVector: zero vector");
  if (std::abs(norm - 1.0) > norm_tol) {
    throw std::invalid_argument("StateVector: norm deviates from 1 beyond tolerance");
  }
  amplitudes /= norm;
}

DenseOperator StateVector::density() const {
  return DenseOperator(space, amplitudes * amplitudes.adjoint());
}

const SiteSpace& SystemState::space() const {
  if (is_pure()) return std::get<StateVector>(rep_).space;
  return std::get<DenseOperator>(rep_).space;
}

DenseOperator SystemState::to_density() const {
  if (is_pure()) return std::get<StateVector>(rep_).density();
  return std::get<DenseOperator>(rep_);
}

SubsetIndexer::SubsetIndexer(const SiteSpace& space,
                             const std::vector<int>& subset)
    : subset_(subset) {
  check_sites_valid(space, subset, "SubsetIndexer");
  std::unordered_set<int> in_subset(subset.begin(), subset.end());
  for (int s = 0; s < space.num_sites(); ++s) {
    if (!in_subset.count(s)) rest_.push_back(s);
  }

  auto build = [&space](const std::vector<int>& sites) {
    long dim = 1;
    for (int s : sites) dim *= space.site_dim(s);
    std::vector<long> contrib(dim, 0);
    // Local flat index over `sites` in order; decompose and re-target.
    for (long idx = 0; idx < dim; ++idx) {
      long rem = idx;
      long value = 0;
      for (int k = static_cast<int>(sites.size()) - 1; k >= 0; --k) {
        const int d = space.site_dim(sites[k]);
        value += (rem % d) * space.stride(sites[k]);
        rem /= d;
      }
      contrib[idx] = value;
    }
    return contrib;
  };
  sub_contrib_ = build(subset_);
  rest_contrib_ = build(rest_);
}

DenseOperator embed_on_subset(const DenseOperator& op,
                              const std::vector<int>& subset,
                              const SiteSpace& target) {
  SubsetIndexer ix(target, subset);
  if (op.dim() != ix.subset_dim()) {
    throw std::invalid_argument(
        "embed_on_subset: operator dimension does not match subset dimensions");
  }
  Matrix out = Matrix::Zero(target.total_dim(), target.total_dim());
  const long ds = ix.subset_dim(), dr = ix.rest_dim();
  for (long a = 0; a < ds; ++a) {
    for (long b = 0; b < ds; ++b) {
      const Complex v = op.entries(a, b);
      if (v == Complex(0.0, 0.0)) continue;
      for (long r = 0; r < dr; ++r) {
        out(ix.compose(a, r), ix.compose(b, r)) = v;
      }
    }
  }
  return DenseOperator(target, std::move(out));
}

DenseOperator partial_trace(const DenseOperator& rho,
                            const std::vector<int>& keep) {
  SubsetIndexer ix(rho.space, keep);
  const long dk = ix.subset_dim(), dr = ix.rest_dim();
  Matrix out = Matrix::Zero(dk, dk);
  for (long a = 0; a < dk; ++a) {
    for (long b = 0; b < dk; ++b) {
      Complex acc = 0.0;
      for (long r = 0; r < dr; ++r) {
        acc += rho.entries(ix.compose(a, r), ix.compose(b, r));
      }
      out(a, b) = acc;
    }
  }
  return DenseOperator(rho.space.restricted_to(keep), std::move(out));
}

Eigen::VectorXd clipped_eigenvalues(const Matrix& hermitian, double clip_tol,
                                    double fail_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(hermitian),
                                           Eigen::EigenvaluesOnly);
  Eigen::VectorXd evs = es.eigenvalues();
  for (long i = 0; i < evs.size(); ++i) {
    if (evs[i] < -fail_tol) {
      throw std::invalid_argument(
          "clipped_eigenvalues: eigenvalue " + std::to_string(evs[i]) +
          " below PSD tolerance");
    }
    if (evs[i] < 0.0 && evs[i] >= -std::max(clip_tol, fail_tol)) evs[i] = 0.0;
  }
  return evs;
}

double von_neumann_entropy(const DenseOperator& rho, double psd_tol) {
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > 1e-8) {
    throw std::invalid_argument("von_neumann_entropy: trace deviates from 1");
  }
  const Eigen::VectorXd evs = clipped_eigenvalues(rho.entries, 1e-10, psd_tol);
  double s = 0.0;
  for (long i = 0; i < evs.size(); ++i) {
    if (evs[i] > 0.0) s -= evs[i] * std::log2(evs[i]);
  }
  return s;
}

namespace {

std::vector<int> concat_disjoint(std::initializer_list<const std::vector<int>*> parts,
                                 const char* what) {
  std::vector<int> all;
  std::unordered_set<int> seen;
  for (const auto* p : parts) {
    for (int s : *p) {
      if (!seen.insert(s).second) {
        throw std::invalid_argument(std::string(what) +
                                    ": subsets are not pairwise disjoint");
      }
      all.push_back(s);
    }
  }
  return all;
}

double subsystem_entropy(const DenseOperator& rho, const std::vector<int>& sites) {
  return von_neumann_entropy(partial_trace(rho, sites));
}

}  // namespace

double mutual_information(const DenseOperator& rho, const std::vector<int>& a,
                          const std::vector<int>& b) {
  const std::vector<int> ab = concat_disjoint({&a, &b}, "mutual_information");
  return subsystem_entropy(rho, a) + subsystem_entropy(rho, b) -
         subsystem_entropy(rho, ab);
}

double conditional_mutual_information(const DenseOperator& rho,
                                      const std::vector<int>& a,
                                      const std::vector<int>& b,
                                      const std::vector<int>& c) {
  const std::vector<int> abc =
      concat_disjoint({&a, &b, &c}, "conditional_mutual_information");
  std::vector<int> ac = a;
  ac.insert(ac.end(), c.begin(), c.end());
  std::vector<int> bc = b;
  bc.insert(bc.end(), c.begin(), c.end());
  return subsystem_entropy(rho, ac) + subsystem_entropy(rho, bc) -
         subsystem_entropy(rho, abc) - subsystem_entropy(rho, c);
}

double trace_norm_half(const Matrix& m) {
  if (m.rows() <= 32) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return 0.5 * svd.singularValues().sum();
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return 0.5 * svd.singularValues().sum();
}

double trace_distance(const DenseOperator& a, const DenseOperator& b) {
  if (!(a.space == b.space)) {
    throw std::invalid_argument("trace_distance: operators on different spaces");
  }
  return trace_norm_half(a.entries - b.entries);
}

Complex subset_expectation(const DenseOperator& rho, const Matrix& op,
                           const std::vector<int>& subset) {
  const DenseOperator reduced = partial_trace(rho, subset);
  if (op.rows() != reduced.dim() || op.cols() != reduced.dim()) {
    throw std::invalid_argument("subset_expectation: operator/subset dimension mismatch");
  }
  return (op.cwiseProduct(reduced.entries.transpose())).sum();
}

Complex subset_expectation(const StateVector& psi, const Matrix& op,
                           const std::vector<int>& subset) {
  SubsetIndexer ix(psi.space, subset);
  const long ds = ix.subset_dim(), dr = ix.rest_dim();
  if (op.rows() != ds || op.cols() != ds) {
    throw std::invalid_argument("subset_expectation: operator/subset dimension mismatch");
  }
  Complex acc = 0.0;
  Vector local(ds);
  for (long r = 0; r < dr; ++r) {
    for (long b = 0; b < ds; ++b) local[b] = psi.amplitudes[ix.compose(b, r)];
    acc += local.dot(op * local);  // Eigen's dot conjugates the left argument
  }
  return acc;
}

Complex subset_expectation(const SystemState& state, const Matrix& op,
                           const std::vector<int>& subset) {
  if (state.is_pure()) return subset_expectation(state.vector(), op, subset);
  return subset_expectation(state.matrix(), op, subset);
}

Vector apply_subset_operator(const Vector& amplitudes, const SiteSpace& space,
                             const Matrix& op, const std::vector<int>& subset) {
  SubsetIndexer ix(space, subset);
  const long ds = ix.subset_dim(), dr = ix.rest_dim();
  if (op.rows() != ds || op.cols() != ds || amplitudes.size() != space.total_dim()) {
    throw std::invalid_argument("apply_subset_operator: dimension mismatch");
  }
  Vector out = Vector::Zero(amplitudes.size());
  Vector local(ds);
  for (long r = 0; r < dr; ++r) {
    for (long b = 0; b < ds; ++b) local[b] = amplitudes[ix.compose(b, r)];
    Vector mapped = op * local;
    for (long a = 0; a < ds; ++a) out[ix.compose(a, r)] = mapped[a];
  }
  return out;
}

DenseOperator apply_subset_kraus(const DenseOperator& rho,
                                 const std::vector<int>& subset,
                                 const std::vector<Matrix>& kraus) {
  SubsetIndexer ix(rho.space, subset);
  const long ds = ix.subset_dim(), dr = ix.rest_dim();
  const long dim = rho.dim();
  for (const Matrix& k : kraus) {
    if (k.rows() != ds || k.cols() != ds) {
      throw std::invalid_argument("apply_subset_kraus: Kraus dimension mismatch");
    }
  }
  Matrix out = Matrix::Zero(dim, dim);
  Matrix left(dim, dim);
  for (const Matrix& k : kraus) {
    // left = embed(k) * rho, then out += left * embed(k)^dag, both without
    // materializing the embedding.
    left.setZero();
    for (long r = 0; r < dr; ++r) {
      for (long a = 0; a < ds; ++a) {
        const long row = ix.compose(a, r);
        for (long b = 0; b < ds; ++b) {
          const Complex v = k(a, b);
          if (v == Complex(0.0, 0.0)) continue;
          left.row(row) += v * rho.entries.row(ix.compose(b, r));
        }
      }
    }
    for (long r = 0; r < dr; ++r) {
      for (long a = 0; a < ds; ++a) {
        const long col = ix.compose(a, r);
        for (long b = 0; b < ds; ++b) {
          const Complex v = std::conj(k(a, b));
          if (v == Complex(0.0, 0.0)) continue;
          out.col(col) += v * left.col(ix.compose(b, r));
        }
      }
    }
  }
  return DenseOperator(rho.space, std::move(out));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i) {
    for (long j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix hermitize(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

double operator_norm(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()[0];
}

Matrix random_unitary(long dim, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(dim, dim);
  for (long i = 0; i < dim; ++i) {
    for (long j = 0; j < dim; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase ambiguity so the distribution is Haar.
  for (long i = 0; i < dim; ++i) {
    const Complex d = r(i, i);
    const double mag = std::abs(d);
    q.col(i) *= (mag > 0.0) ? d / mag : Complex(1.0, 0.0);
  }
  return q;
}

Matrix random_density_matrix(long dim, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(dim, dim);
  for (long i = 0; i < dim; ++i) {
    for (long j = 0; j < dim; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  }
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return hermitize(rho);
}

StateVector random_state_vector(const SiteSpace& space, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(space.total_dim());
  for (long i = 0; i < v.size(); ++i) v[i] = Complex(gauss(rng), gauss(rng));
  v /= v.norm();
  return StateVector(space, std::move(v));
}

Matrix haar_isometry(long rows, long cols, Rng& rng) {
  if (cols > rows) throw std::invalid_argument("haar_isometry: cols > rows");
  return random_unitary(rows, rng).leftCols(cols);
}

}  // namespace qdarwin
