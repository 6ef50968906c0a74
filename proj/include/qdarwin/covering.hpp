#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qdarwin {

/// Disjoint site blocks of [0, n_sites). Blocks need not cover every site;
/// `complete()` records whether they do. Covering predicates treat uncovered
/// sites as belonging to no block.
struct Partition {
  int n_sites = 0;
  std::vector<std::vector<int>> blocks;

  Partition() = default;
  Partition(int n, std::vector<std::vector<int>> b);

  int num_blocks() const { return static_cast<int>(blocks.size()); }
  bool complete() const;
};

struct PartitionValidation {
  bool disjoint = true;
  bool in_range = true;
  bool complete = false;
  std::vector<int> overlap_sites;      // sites appearing in more than one block
  std::vector<int> out_of_range_sites;
  bool empty_block = false;

  bool valid() const { return disjoint && in_range && !empty_block; }
};

PartitionValidation validate_partition(const Partition& p);

bool blocks_intersect(const std::vector<int>& a, const std::vector<int>& b);

/// Reading of the tuple definition's disjointness list. `maximal` requires
/// each primed block to be disjoint from every unprimed and primed block of
/// the other partitions; `unprimed_only` drops the primed-primed equalities.
enum class CoveringMode { maximal, unprimed_only };

/// Result of the two-partition predicate. Witnesses map each quantified block
/// pair of one partition to a block of the other that avoids both.
struct PairCoveringReport {
  bool holds = false;
  std::map<std::pair<int, int>, int> forward_witness;   // (f, f') -> g
  std::map<std::pair<int, int>, int> backward_witness;  // (g, g') -> f
  struct Counterexample {
    int direction = 0;  // 0: pair in F lacks a g, 1: pair in G lacks an f
    std::pair<int, int> pair;
  };
  std::optional<Counterexample> counterexample;
};

PairCoveringReport non_pair_covering(const Partition& f_part,
                                     const Partition& g_part);

/// Result of the k-partition predicate. Keys are tuples of block indices, one
/// per partition; values are the primed tuples satisfying the disjointness
/// pattern of the active mode.
struct TupleCoveringReport {
  bool holds = false;
  CoveringMode mode = CoveringMode::maximal;
  std::map<std::vector<int>, std::vector<int>> witnesses;
  std::optional<std::vector<int>> counterexample;
  long candidates_evaluated = 0;
};

TupleCoveringReport non_tuple_covering(const std::vector<Partition>& parts,
                                       CoveringMode mode = CoveringMode::maximal,
                                       long candidate_cap = 10000000);

/// Re-verifies every recorded witness by direct set intersection; returns
/// false if any recorded disjointness equality fails.
bool verify_pair_witnesses(const Partition& f_part, const Partition& g_part,
                           const PairCoveringReport& report);
bool verify_tuple_witnesses(const std::vector<Partition>& parts,
                            const TupleCoveringReport& report);

/// Re-verifies a reported counterexample by exhaustively confirming that no
/// candidate witness exists for it.
bool verify_pair_counterexample(const Partition& f_part, const Partition& g_part,
                                const PairCoveringReport& report);
bool verify_tuple_counterexample(const std::vector<Partition>& parts,
                                 const TupleCoveringReport& report);

/// Partitions with one designated block equal to `blanket` and all other
/// blocks (of exactly `block_size` sites) drawn from the remaining sites.
/// Enumeration is exhaustive, deterministic and lexicographic; throws if the
/// remaining sites cannot be tiled or the result would exceed `max_count`.
std::vector<Partition> blanket_avoiding_partitions(
    const std::vector<int>& blanket, int n_sites, int block_size,
    long max_count = 100000);

}  // namespace qdarwin
