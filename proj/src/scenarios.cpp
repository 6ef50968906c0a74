#include "qdarwin/scenarios.hpp"

#include "qdarwin/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace qdarwin {

namespace {

void check_grid_index(int i, int n, const char* what) {
  if (i < 1 || i > n) {
    throw std::invalid_argument(std::string(what) + ": index out of range");
  }
}

}  // namespace

int grid_site(int i, int j, int n) {
  check_grid_index(i, n, "grid_site");
  check_grid_index(j, n, "grid_site");
  return (i - 1) * n + (j - 1);
}

std::vector<int> grid_row_sites(int i, int n) {
  check_grid_index(i, n, "grid_row_sites");
  std::vector<int> sites(n);
  std::iota(sites.begin(), sites.end(), (i - 1) * n);
  return sites;
}

std::vector<int> grid_column_sites(int j, int n) {
  check_grid_index(j, n, "grid_column_sites");
  std::vector<int> sites;
  for (int i = 1; i <= n; ++i) sites.push_back(grid_site(i, j, n));
  return sites;
}

StateVector grid_code_vector(int n, int bit) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("grid_code_vector: bit must be 0 or 1");
  if (n < 1) throw std::invalid_argument("grid_code_vector: n must be >= 1");
  const double sign = (bit == 0) ? 1.0 : -1.0;
  const long row_dim = 1l << n;
  Vector row_zero = Vector::Zero(row_dim);
  Vector row_one = Vector::Zero(row_dim);
  row_zero[0] = 1.0;
  row_one[row_dim - 1] = 1.0;
  const Vector row_factor = (row_zero + sign * row_one) / std::sqrt(2.0);

  // Rows occupy consecutive sites, so the full vector is the row-ordered
  // Kronecker product of the per-row factors.
  Vector full = Vector::Ones(1);
  for (int i = 0; i < n; ++i) {
    Vector next(full.size() * row_dim);
    for (long a = 0; a < full.size(); ++a) {
      next.segment(a * row_dim, row_dim) = full[a] * row_factor;
    }
    full = std::move(next);
  }
  return StateVector(SiteSpace::qubits(n * n), std::move(full));
}

StateVector grid_code_vector_sum_form(int n, int bit) {
  if (bit != 0 && bit != 1) {
    throw std::invalid_argument("grid_code_vector_sum_form: bit must be 0 or 1");
  }
  if (n < 1) throw std::invalid_argument("grid_code_vector_sum_form: n must be >= 1");
  const SiteSpace space = SiteSpace::qubits(n * n);
  Vector full = Vector::Zero(space.total_dim());
  const double norm = std::pow(2.0, -0.5 * n);
  // Every column of the grid carries the same n-bit pattern b; the |1bar>
  // branch weights each pattern by the parity of its Hamming weight.
  for (unsigned long b = 0; b < (1ul << n); ++b) {
    long index = 0;
    for (int i = 1; i <= n; ++i) {
      const long row_bit = (b >> (n - i)) & 1ul;  // bit of row i
      if (row_bit) {
        for (int j = 1; j <= n; ++j) index += space.stride(grid_site(i, j, n));
      }
    }
    const int weight = std::popcount(b);
    const double sign = (bit == 1 && (weight % 2 == 1)) ? -1.0 : 1.0;
    full[index] = sign * norm;
  }
  return StateVector(space, std::move(full));
}

StateVector build_grid_vector(const GridScenario& s) {
  if (s.noise_p != 0.0) {
    throw std::invalid_argument("build_grid_vector: pure construction requires noise_p = 0");
  }
  if (s.n > 4) throw EnvelopeError("build_grid_vector: n > 4 exceeds the dense envelope");
  const double norm2 = std::norm(s.alpha) + std::norm(s.beta);
  if (std::abs(norm2 - 1.0) > 1e-9) {
    throw std::invalid_argument("build_grid_vector: |alpha|^2 + |beta|^2 must be 1");
  }
  const StateVector zero = grid_code_vector(s.n, 0);
  const StateVector one = grid_code_vector(s.n, 1);
  return StateVector(zero.space, s.alpha * zero.amplitudes + s.beta * one.amplitudes);
}

SystemState build_grid_state(const GridScenario& s) {
  if (s.noise_p < 0.0 || s.noise_p > 1.0) {
    throw std::invalid_argument("build_grid_state: noise probability outside [0, 1]");
  }
  if (s.noise_p == 0.0) return SystemState(build_grid_vector(s));
  if (s.n > 3) {
    throw EnvelopeError("build_grid_state: n > 3 exceeds the density-matrix envelope");
  }
  GridScenario pure = s;
  pure.noise_p = 0.0;
  DenseOperator rho = build_grid_vector(pure).density();
  std::vector<int> all_sites(s.total_sites());
  std::iota(all_sites.begin(), all_sites.end(), 0);
  return SystemState(depolarize_sites(rho, all_sites, s.noise_p));
}

Povm row_povm(int i, int n) {
  check_grid_index(i, n, "row_povm");
  const long d = 1l << n;
  Vector plus = Vector::Zero(d), minus = Vector::Zero(d);
  plus[0] = 1.0 / std::sqrt(2.0);
  plus[d - 1] = 1.0 / std::sqrt(2.0);
  minus[0] = 1.0 / std::sqrt(2.0);
  minus[d - 1] = -1.0 / std::sqrt(2.0);
  Matrix p_plus = plus * plus.adjoint();
  Matrix p_minus = minus * minus.adjoint();
  Matrix p_perp = Matrix::Identity(d, d) - p_plus - p_minus;
  return Povm(grid_row_sites(i, n), std::vector<int>(n, 2), {"+", "-", "perp"},
              {std::move(p_plus), std::move(p_minus), std::move(p_perp)});
}

Povm column_parity_povm(int j, int n) {
  check_grid_index(j, n, "column_parity_povm");
  const long d = 1l << n;
  Matrix even = Matrix::Zero(d, d), odd = Matrix::Zero(d, d);
  for (unsigned long x = 0; x < static_cast<unsigned long>(d); ++x) {
    if (std::popcount(x) % 2 == 0) even(x, x) = 1.0;
    else odd(x, x) = 1.0;
  }
  return Povm(grid_column_sites(j, n), std::vector<int>(n, 2), {"even", "odd"},
              {std::move(even), std::move(odd)});
}

std::pair<Partition, Partition> grid_partitions(int n) {
  std::vector<std::vector<int>> rows, columns;
  for (int i = 1; i <= n; ++i) rows.push_back(grid_row_sites(i, n));
  for (int j = 1; j <= n; ++j) columns.push_back(grid_column_sites(j, n));
  return {Partition(n * n, std::move(rows)), Partition(n * n, std::move(columns))};
}

Povm row_record_povm(const std::vector<int>& rows, int n) {
  if (rows.empty()) throw std::invalid_argument("row_record_povm: empty row block");
  std::vector<int> sorted_rows = rows;
  std::sort(sorted_rows.begin(), sorted_rows.end());
  const Povm base = row_povm(sorted_rows.front(), n);

  std::vector<int> support;
  for (int r : sorted_rows) {
    const auto sites = grid_row_sites(r, n);
    support.insert(support.end(), sites.begin(), sites.end());
  }
  const long rest_dim = 1l << (n * static_cast<int>(sorted_rows.size() - 1));
  std::vector<Matrix> effects;
  for (const Matrix& e : base.effects) {
    effects.push_back(kron(e, Matrix::Identity(rest_dim, rest_dim)));
  }
  return Povm(support, std::vector<int>(support.size(), 2), base.labels,
              std::move(effects));
}

Povm repetition_record_povm(const std::vector<int>& sites) {
  if (sites.empty()) throw std::invalid_argument("repetition_record_povm: empty block");
  const long d = 1l << sites.size();
  Matrix zero = Matrix::Zero(d, d), one = Matrix::Zero(d, d);
  zero(0, 0) = 1.0;
  one(d - 1, d - 1) = 1.0;
  Matrix other = Matrix::Identity(d, d) - zero - one;
  return Povm(sites, std::vector<int>(sites.size(), 2), {"zero", "one", "other"},
              {std::move(zero), std::move(one), std::move(other)});
}

Povm qubit_x_povm(int site) {
  Matrix plus(2, 2), minus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  minus << 0.5, -0.5, -0.5, 0.5;
  return Povm({site}, {2}, {"+", "-"}, {std::move(plus), std::move(minus)});
}

Povm qubit_z_povm(int site) {
  Matrix zero = Matrix::Zero(2, 2), one = Matrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  one(1, 1) = 1.0;
  return Povm({site}, {2}, {"0", "1"}, {std::move(zero), std::move(one)});
}

StateVector ghz_vector(int m, Complex alpha, Complex beta) {
  if (m < 1) throw std::invalid_argument("ghz_vector: need at least one qubit");
  const SiteSpace space = SiteSpace::qubits(m);
  Vector v = Vector::Zero(space.total_dim());
  v[0] = alpha;
  v[space.total_dim() - 1] = beta;
  return StateVector(space, std::move(v));
}

std::vector<Matrix> depolarizing_kraus(double p) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("depolarizing_kraus: probability outside [0, 1]");
  }
  Matrix id = Matrix::Identity(2, 2);
  Matrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  z << 1, 0, 0, -1;
  return {std::sqrt(1.0 - 0.75 * p) * id, std::sqrt(0.25 * p) * x,
          std::sqrt(0.25 * p) * y, std::sqrt(0.25 * p) * z};
}

DenseOperator depolarize_sites(const DenseOperator& rho,
                               const std::vector<int>& sites, double p) {
  const std::vector<Matrix> kraus = depolarizing_kraus(p);
  DenseOperator out = rho;
  for (int s : sites) {
    if (rho.space.site_dim(s) != 2) {
      throw std::invalid_argument("depolarize_sites: non-qubit site");
    }
    out = apply_subset_kraus(out, {s}, kraus);
  }
  return out;
}

Channel grid_channel(int n) {
  const StateVector zero = grid_code_vector(n, 0);
  const StateVector one = grid_code_vector(n, 1);
  Matrix k(zero.dim(), 2);
  k.col(0) = zero.amplitudes;
  k.col(1) = one.amplitudes;
  return Channel(2, zero.space, {std::move(k)}, 1e-10);
}

Channel classical_copy_channel(int d, const std::vector<int>& copy_sites,
                               const std::vector<int>& filler_sites) {
  if (d < 2) throw std::invalid_argument("classical_copy_channel: d must be >= 2");
  if (copy_sites.empty()) {
    throw std::invalid_argument("classical_copy_channel: no copy sites");
  }
  std::set<int> covered;
  for (int s : copy_sites) covered.insert(s);
  for (int s : filler_sites) {
    if (!covered.insert(s).second) {
      throw std::invalid_argument("classical_copy_channel: copy and filler sites overlap");
    }
  }
  const int n = static_cast<int>(covered.size());
  for (int s = 0; s < n; ++s) {
    if (!covered.count(s)) {
      throw std::invalid_argument(
          "classical_copy_channel: copy and filler sites must cover a contiguous range");
    }
  }

  const SiteSpace space(std::vector<int>(n, d));
  std::vector<Matrix> kraus;
  for (int x = 0; x < d; ++x) {
    long index = 0;
    for (int s : copy_sites) index += static_cast<long>(x) * space.stride(s);
    Matrix k = Matrix::Zero(space.total_dim(), d);
    k(index, x) = 1.0;
    kraus.push_back(std::move(k));
  }
  return Channel(d, space, std::move(kraus), 1e-12);
}

}  // namespace qdarwin
