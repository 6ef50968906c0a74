#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdarwin/covering.hpp"
#include "qdarwin/errors.hpp"

#include "oracles.hpp"

#include <random>

using namespace qdarwin;

TEST_CASE("validate_partition flags overlap, range and incompleteness") {
  const PartitionValidation ok = validate_partition(Partition(4, {{0, 1}, {2, 3}}));
  CHECK(ok.valid());
  CHECK(ok.complete);

  const PartitionValidation overlap = validate_partition(Partition(4, {{0, 1}, {1, 2}}));
  CHECK_FALSE(overlap.disjoint);
  CHECK(overlap.overlap_sites == std::vector<int>{1});

  const PartitionValidation partial = validate_partition(Partition(4, {{0}, {2}}));
  CHECK(partial.valid());
  CHECK_FALSE(partial.complete);

  const PartitionValidation range = validate_partition(Partition(2, {{0, 5}}));
  CHECK_FALSE(range.in_range);
}

TEST_CASE("non_pair_covering on disjoint single-block partitions") {
  const Partition f(4, {{0, 1}});
  const Partition g(4, {{2, 3}});
  const PairCoveringReport report = non_pair_covering(f, g);
  CHECK(report.holds);
  CHECK(verify_pair_witnesses(f, g, report));
}

TEST_CASE("non_pair_covering fails for grid rows vs columns") {
  for (int n = 1; n <= 3; ++n) {
    std::vector<std::vector<int>> rows, cols;
    for (int i = 0; i < n; ++i) {
      std::vector<int> row, col;
      for (int j = 0; j < n; ++j) {
        row.push_back(i * n + j);
        col.push_back(j * n + i);
      }
      rows.push_back(row);
      cols.push_back(col);
    }
    const Partition f(n * n, rows), g(n * n, cols);
    const PairCoveringReport report = non_pair_covering(f, g);
    CHECK_FALSE(report.holds);
    REQUIRE(report.counterexample.has_value());
    CHECK(verify_pair_counterexample(f, g, report));
  }
}

TEST_CASE("non_pair_covering is symmetric under argument swap") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 5);
    auto random_partition = [&]() {
      std::vector<std::vector<int>> blocks(1 + rng() % 3);
      for (int s = 0; s < n; ++s) {
        const size_t choice = rng() % (blocks.size() + 1);
        if (choice < blocks.size()) blocks[choice].push_back(s);
      }
      std::vector<std::vector<int>> nonempty;
      for (auto& b : blocks) {
        if (!b.empty()) nonempty.push_back(std::move(b));
      }
      if (nonempty.empty()) nonempty.push_back({0});
      return Partition(n, std::move(nonempty));
    };
    const Partition f = random_partition();
    const Partition g = random_partition();
    CHECK(non_pair_covering(f, g).holds == non_pair_covering(g, f).holds);
    CHECK(non_pair_covering(f, g).holds == oracles::pair_covering_bruteforce(f, g));
  }
}

TEST_CASE("non_pair_covering rejects mismatched site counts") {
  CHECK_THROWS_AS(non_pair_covering(Partition(4, {{0}}), Partition(5, {{0}})),
                  std::invalid_argument);
}

TEST_CASE("non_tuple_covering on fully disjoint supports") {
  const Partition f(8, {{0, 1}, {2, 3}});
  const Partition g(8, {{4, 5}, {6, 7}});
  const TupleCoveringReport report = non_tuple_covering({f, g});
  CHECK(report.holds);
  CHECK(verify_tuple_witnesses({f, g}, report));
}

TEST_CASE("non_tuple_covering fails for three copies of one partition") {
  const Partition p(4, {{0, 1}, {2, 3}});
  const TupleCoveringReport report = non_tuple_covering({p, p, p});
  CHECK_FALSE(report.holds);
  REQUIRE(report.counterexample.has_value());
  CHECK(verify_tuple_counterexample({p, p, p}, report));
}

TEST_CASE("non_tuple_covering on three disjoint 12-site partitions") {
  const Partition f(12, {{0, 1}, {2, 3}});
  const Partition g(12, {{4, 5}, {6, 7}});
  const Partition z(12, {{8, 9}, {10, 11}});
  const TupleCoveringReport report = non_tuple_covering({f, g, z});
  CHECK(report.holds);
  CHECK(verify_tuple_witnesses({f, g, z}, report));
}

TEST_CASE("non_tuple_covering honors the candidate cap") {
  const Partition p(12, {{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}, {9}, {10}, {11}});
  CHECK_THROWS_AS(non_tuple_covering({p, p, p}, CoveringMode::maximal, 10),
                  EnvelopeError);
}

TEST_CASE("unprimed_only mode is weaker than maximal") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 3);
    auto random_partition = [&]() {
      std::vector<std::vector<int>> blocks(1 + rng() % 3);
      for (int s = 0; s < n; ++s) {
        const size_t choice = rng() % (blocks.size() + 1);
        if (choice < blocks.size()) blocks[choice].push_back(s);
      }
      std::vector<std::vector<int>> nonempty;
      for (auto& b : blocks) {
        if (!b.empty()) nonempty.push_back(std::move(b));
      }
      if (nonempty.empty()) nonempty.push_back({0});
      return Partition(n, std::move(nonempty));
    };
    const std::vector<Partition> parts{random_partition(), random_partition()};
    const bool maximal = non_tuple_covering(parts, CoveringMode::maximal).holds;
    const bool weak = non_tuple_covering(parts, CoveringMode::unprimed_only).holds;
    if (maximal) CHECK(weak);
    CHECK(maximal == oracles::tuple_covering_bruteforce(parts, CoveringMode::maximal));
    CHECK(weak == oracles::tuple_covering_bruteforce(parts, CoveringMode::unprimed_only));
  }
}

TEST_CASE("blanket_avoiding_partitions constructs and validates") {
  const auto partitions = blanket_avoiding_partitions({0, 1}, 6, 2);
  CHECK(partitions.size() == 3);  // perfect matchings of {2,3,4,5}
  for (const Partition& p : partitions) {
    const PartitionValidation v = validate_partition(p);
    CHECK(v.valid());
    CHECK(v.complete);
    CHECK(p.blocks[0] == std::vector<int>{0, 1});
    for (size_t b = 1; b < p.blocks.size(); ++b) {
      for (int s : p.blocks[b]) CHECK(s >= 2);
    }
  }
}

TEST_CASE("blanket_avoiding_partitions rejects infeasible inputs") {
  CHECK_THROWS_AS(blanket_avoiding_partitions({0, 1, 2, 3}, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(blanket_avoiding_partitions({0}, 4, 2), std::invalid_argument);
  CHECK_THROWS_AS(blanket_avoiding_partitions({}, 4, 2), std::invalid_argument);
}

TEST_CASE("blanket_avoiding_partitions on random blankets always validates") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6 + static_cast<int>(rng() % 4);
    std::vector<int> blanket;
    for (int s = 0; s < n; ++s) {
      if (rng() % 3 == 0) blanket.push_back(s);
    }
    if (blanket.empty()) blanket.push_back(0);
    const int remaining = n - static_cast<int>(blanket.size());
    if (remaining <= 0) continue;
    int block_size = 1 + static_cast<int>(rng() % 2);
    if (remaining % block_size != 0) block_size = 1;
    const auto partitions = blanket_avoiding_partitions(blanket, n, block_size, 5000);
    CHECK(!partitions.empty());
    for (const Partition& p : partitions) {
      CHECK(validate_partition(p).valid());
      // Every non-designated block avoids the blanket.
      for (size_t b = 1; b < p.blocks.size(); ++b) {
        CHECK_FALSE(blocks_intersect(p.blocks[b], p.blocks[0]));
        CHECK(static_cast<int>(p.blocks[b].size()) == block_size);
      }
    }
  }
}
