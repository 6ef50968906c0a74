#pragma once

#include "qdarwin/covering.hpp"
#include "qdarwin/dynamics.hpp"
#include "qdarwin/measurement.hpp"
#include "qdarwin/tensor.hpp"

#include <vector>

namespace qdarwin {

/// n x n grid of qubits prepared in alpha|0bar> + beta|1bar> with optional
/// per-qubit depolarizing noise. Grid site (i, j) (1-based) maps to flat site
/// (i-1)*n + (j-1): row i occupies n consecutive sites, column j the sites of
/// stride n.
struct GridScenario {
  int n = 1;
  Complex alpha{1.0, 0.0};
  Complex beta{0.0, 0.0};
  double noise_p = 0.0;

  int total_sites() const { return n * n; }
};

int grid_site(int i, int j, int n);  // 1-based grid coordinates
std::vector<int> grid_row_sites(int i, int n);
std::vector<int> grid_column_sites(int j, int n);

/// Code vectors |0bar> / |1bar> built from the per-row product form.
StateVector grid_code_vector(int n, int bit);
/// The same vectors built from the equal sum over column patterns with the
/// parity sign. Used to cross-check the two algebraic forms agree.
StateVector grid_code_vector_sum_form(int n, int bit);

/// alpha|0bar> + beta|1bar>; requires noise_p == 0.
StateVector build_grid_vector(const GridScenario& s);

/// Full scenario state: pure vector when noise_p == 0, density matrix with
/// per-qubit depolarizing noise otherwise. Enforces the dense envelope
/// (n <= 4 pure, n <= 3 mixed).
SystemState build_grid_state(const GridScenario& s);

/// Three-outcome projective POVM on row i: projectors onto
/// (|0..0> + |1..1>)/sqrt(2) and (|0..0> - |1..1>)/sqrt(2), plus the
/// rank 2^n - 2 remainder. Labels "+", "-", "perp".
Povm row_povm(int i, int n);

/// Two-outcome projective POVM on column j: projectors onto the even- and
/// odd-Hamming-weight computational subspaces. Labels "even", "odd".
Povm column_parity_povm(int j, int n);

/// Row partition {{row i}}_i and column partition {{column j}}_j.
std::pair<Partition, Partition> grid_partitions(int n);

/// Record POVM on a block made of whole rows: the row measurement on the
/// block's first row, identity on its remaining rows.
Povm row_record_povm(const std::vector<int>& rows, int n);

/// {|0..0><0..0|, |1..1><1..1|, remainder} on a qubit block.
/// Labels "zero", "one", "other".
Povm repetition_record_povm(const std::vector<int>& sites);

/// Single-qubit projective measurements used by the shared-qubit
/// incompatibility checks: "+"/"-" basis and computational basis.
Povm qubit_x_povm(int site);
Povm qubit_z_povm(int site);

/// alpha|0...0> + beta|1...1> on m qubits.
StateVector ghz_vector(int m, Complex alpha, Complex beta);

/// Depolarizing Kraus operators for one qubit: with probability p the qubit
/// is replaced by the maximally mixed state.
std::vector<Matrix> depolarizing_kraus(double p);

/// Applies single-qubit depolarizing noise of strength p to each listed site.
DenseOperator depolarize_sites(const DenseOperator& rho,
                               const std::vector<int>& sites, double p);

/// The grid preparation map as a one-qubit-to-grid isometry channel.
Channel grid_channel(int n);

/// Channel that dephases a d-dimensional input in the computational basis and
/// writes the classical value to every copy site; filler sites receive |0>.
/// copy_sites and filler_sites together must cover [0, n) for n sites of
/// local dimension d.
Channel classical_copy_channel(int d, const std::vector<int>& copy_sites,
                               const std::vector<int>& filler_sites);

}  // namespace qdarwin
