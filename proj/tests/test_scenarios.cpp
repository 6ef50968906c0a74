#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdarwin/covering.hpp"
#include "qdarwin/errors.hpp"
#include "qdarwin/scenarios.hpp"

#include <cmath>

using namespace qdarwin;

TEST_CASE("n = 1 code vector |0bar> is the plus state") {
  const StateVector v = grid_code_vector(1, 0);
  CHECK(v.amplitudes[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(v.amplitudes[1].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("code vectors are orthonormal for all supported n") {
  for (int n = 1; n <= 3; ++n) {
    const StateVector zero = grid_code_vector(n, 0);
    const StateVector one = grid_code_vector(n, 1);
    CHECK(std::abs(zero.amplitudes.dot(one.amplitudes)) < 1e-12);
    CHECK(zero.amplitudes.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(one.amplitudes.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("product form and column-pattern sum form build identical vectors") {
  for (int n = 1; n <= 3; ++n) {
    for (int bit : {0, 1}) {
      const StateVector product = grid_code_vector(n, bit);
      const StateVector summed = grid_code_vector_sum_form(n, bit);
      CHECK((product.amplitudes - summed.amplitudes).norm() < 1e-12);
    }
  }
}

TEST_CASE("build_grid_state validates and respects the envelope") {
  CHECK_THROWS_AS(build_grid_vector(GridScenario{5, {1, 0}, {0, 0}, 0.0}), EnvelopeError);
  CHECK_THROWS_AS(build_grid_state(GridScenario{4, {1, 0}, {0, 0}, 0.1}), EnvelopeError);
  CHECK_THROWS_AS(build_grid_vector(GridScenario{2, {1, 0}, {1, 0}, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_grid_state(GridScenario{2, {1, 0}, {0, 0}, 1.5}),
                  std::invalid_argument);

  const SystemState pure = build_grid_state(GridScenario{2, {1, 0}, {0, 0}, 0.0});
  CHECK(pure.is_pure());
  const SystemState noisy = build_grid_state(GridScenario{2, {1, 0}, {0, 0}, 0.05});
  CHECK_FALSE(noisy.is_pure());
  CHECK(noisy.matrix().is_density_matrix(1e-9));
}

TEST_CASE("row POVM is projective, complete, and blind to off-code directions") {
  for (int n = 1; n <= 3; ++n) {
    const Povm p = row_povm(1, n);
    const PovmValidation v = validate_povm(p);
    CHECK(v.valid());
    CHECK(v.projective);
    // Remainder projector rank 2^n - 2.
    CHECK(p.effects[2].trace().real() == doctest::Approx((1 << n) - 2.0));
  }
  CHECK_THROWS_AS(row_povm(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(row_povm(3, 2), std::invalid_argument);
}

TEST_CASE("column parity POVM matches the conjugate-basis expression") {
  for (int n = 1; n <= 3; ++n) {
    const StateVector zero = grid_code_vector(n, 0);
    const StateVector one = grid_code_vector(n, 1);
    const double inv = 1.0 / std::sqrt(2.0);
    const StateVector even_state(zero.space, inv * (zero.amplitudes + one.amplitudes));
    const StateVector odd_state(zero.space, inv * (zero.amplitudes - one.amplitudes));
    for (int j = 1; j <= n; ++j) {
      const Povm p = column_parity_povm(j, n);
      const PovmValidation v = validate_povm(p);
      CHECK(v.valid());
      CHECK(v.projective);
      // Parity splits the column basis evenly.
      CHECK(p.effects[0].trace().real() == doctest::Approx(1 << (n - 1)));
      CHECK(p.effects[1].trace().real() == doctest::Approx(1 << (n - 1)));

      const auto on_even = outcome_probabilities(p, SystemState(even_state));
      CHECK(on_even[0] == doctest::Approx(1.0).epsilon(1e-12));
      const auto on_odd = outcome_probabilities(p, SystemState(odd_state));
      CHECK(on_odd[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("grid partitions use the documented linearization") {
  const auto [rows, columns] = grid_partitions(2);
  CHECK(rows.blocks == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
  CHECK(columns.blocks == std::vector<std::vector<int>>{{0, 2}, {1, 3}});
  CHECK(rows.complete());
  CHECK(columns.complete());

  for (int n = 1; n <= 3; ++n) {
    const auto [r, c] = grid_partitions(n);
    CHECK_FALSE(non_pair_covering(r, c).holds);
    // Every row meets every column in exactly one site.
    for (const auto& row : r.blocks) {
      for (const auto& col : c.blocks) {
        int count = 0;
        for (int s : row) {
          for (int t : col) {
            if (s == t) ++count;
          }
        }
        CHECK(count == 1);
      }
    }
  }
}

TEST_CASE("grid channel reproduces the code vectors on basis inputs") {
  const Channel lambda = grid_channel(2);
  CHECK(lambda.trace_preservation_residual() < 1e-12);

  Matrix zero_in = Matrix::Zero(2, 2);
  zero_in(0, 0) = 1.0;
  const DenseOperator out = lambda.apply(zero_in);
  const StateVector expected = grid_code_vector(2, 0);
  CHECK((out.entries - expected.amplitudes * expected.amplitudes.adjoint())
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  Matrix one_in = Matrix::Zero(2, 2);
  one_in(1, 1) = 1.0;
  const DenseOperator out1 = lambda.apply(one_in);
  const StateVector expected1 = grid_code_vector(2, 1);
  CHECK((out1.entries - expected1.amplitudes * expected1.amplitudes.adjoint())
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("depolarizing noise is trace preserving and unital") {
  Rng rng(5);
  const DenseOperator rho(SiteSpace::qubits(2), random_density_matrix(4, rng));
  const DenseOperator noisy = depolarize_sites(rho, {0, 1}, 0.3);
  CHECK(std::abs(noisy.trace() - Complex(1.0, 0.0)) < 1e-12);
  CHECK(noisy.is_psd(1e-10));

  const DenseOperator mixed(SiteSpace::qubits(2), 0.25 * Matrix::Identity(4, 4));
  const DenseOperator still_mixed = depolarize_sites(mixed, {0, 1}, 0.7);
  CHECK((still_mixed.entries - mixed.entries).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("classical copy channel writes the classical value to every copy site") {
  const Channel copy = classical_copy_channel(2, {0, 1}, {2});
  CHECK(copy.trace_preservation_residual() < 1e-12);

  Matrix zero_in = Matrix::Zero(2, 2);
  zero_in(0, 0) = 1.0;
  const DenseOperator out = copy.apply(zero_in);
  // |000><000| exactly.
  CHECK(out.entries(0, 0).real() == doctest::Approx(1.0));
  CHECK(out.entries.cwiseAbs().sum() == doctest::Approx(1.0));

  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  const DenseOperator mixed_out = copy.apply(plus);
  // Uniform classical mixture of |000> and |110>.
  CHECK(mixed_out.entries(0, 0).real() == doctest::Approx(0.5));
  CHECK(mixed_out.entries(6, 6).real() == doctest::Approx(0.5));
  CHECK(mixed_out.entries.cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("computational records on two copy sites agree perfectly") {
  const Channel copy = classical_copy_channel(2, {0, 1}, {2, 3});
  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  const SystemState state(copy.apply(plus));
  const RecordDelta rd = record_delta(qubit_z_povm(0), qubit_z_povm(1), state);
  CHECK(rd.delta <= 1e-12);
}

TEST_CASE("classical copy channel input validation") {
  CHECK_THROWS_AS(classical_copy_channel(2, {0, 1}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(classical_copy_channel(2, {0, 2}, {}), std::invalid_argument);
  CHECK_THROWS_AS(classical_copy_channel(1, {0}, {}), std::invalid_argument);
}

TEST_CASE("row record POVM on a multi-row block") {
  const Povm p = row_record_povm({1, 2}, 3);
  CHECK(p.support.size() == 6);
  const PovmValidation v = validate_povm(p);
  CHECK(v.valid());
  CHECK(v.projective);
  const StateVector psi = build_grid_vector(
      GridScenario{3, Complex(std::sqrt(0.3), 0), Complex(std::sqrt(0.7), 0), 0.0});
  const auto probs = outcome_probabilities(p, SystemState(psi));
  CHECK(probs[0] == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(probs[1] == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("repetition record POVM validates and records GHZ branches") {
  const Povm p = repetition_record_povm({0, 1});
  CHECK(validate_povm(p).valid());
  CHECK(validate_povm(p).projective);

  const StateVector ghz = ghz_vector(4, Complex(std::sqrt(0.4), 0.0),
                                     Complex(std::sqrt(0.6), 0.0));
  const auto probs = outcome_probabilities(p, SystemState(ghz));
  CHECK(probs[0] == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(probs[1] == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(std::abs(probs[2]) < 1e-12);

  const RecordDelta rd =
      record_delta(repetition_record_povm({0, 1}), repetition_record_povm({2, 3}),
                   SystemState(ghz));
  CHECK(rd.delta <= 1e-10);
}
