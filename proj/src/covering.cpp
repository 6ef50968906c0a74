#include "qdarwin/covering.hpp"

#include "qdarwin/errors.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace qdarwin {

Partition::Partition(int n, std::vector<std::vector<int>> b)
    : n_sites(n), blocks(std::move(b)) {
  if (n_sites < 0) throw std::invalid_argument("Partition: negative site count");
  for (auto& block : blocks) std::sort(block.begin(), block.end());
}

bool Partition::complete() const {
  std::set<int> covered;
  for (const auto& block : blocks) covered.insert(block.begin(), block.end());
  return static_cast<int>(covered.size()) == n_sites;
}

PartitionValidation validate_partition(const Partition& p) {
  PartitionValidation v;
  std::set<int> seen;
  std::set<int> overlaps;
  for (const auto& block : p.blocks) {
    if (block.empty()) v.empty_block = true;
    for (int s : block) {
      if (s < 0 || s >= p.n_sites) {
        v.in_range = false;
        v.out_of_range_sites.push_back(s);
      }
      if (!seen.insert(s).second) overlaps.insert(s);
    }
  }
  v.overlap_sites.assign(overlaps.begin(), overlaps.end());
  v.disjoint = overlaps.empty();
  v.complete = v.disjoint && v.in_range &&
               static_cast<int>(seen.size()) == p.n_sites;
  return v;
}

bool blocks_intersect(const std::vector<int>& a, const std::vector<int>& b) {
  // Blocks are kept sorted by the Partition constructor.
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else return true;
  }
  return false;
}

namespace {

void check_same_sites(const Partition& a, const Partition& b, const char* what) {
  if (a.n_sites != b.n_sites) {
    throw std::invalid_argument(std::string(what) + ": partitions declare different site counts");
  }
}

void check_valid(const Partition& p, const char* what) {
  const PartitionValidation v = validate_partition(p);
  if (!v.valid()) {
    throw std::invalid_argument(std::string(what) + ": partition fails validation");
  }
}

}  // namespace

PairCoveringReport non_pair_covering(const Partition& f_part,
                                     const Partition& g_part) {
  check_same_sites(f_part, g_part, "non_pair_covering");
  check_valid(f_part, "non_pair_covering");
  check_valid(g_part, "non_pair_covering");

  PairCoveringReport report;
  report.holds = true;

  auto one_direction = [&](const Partition& outer, const Partition& inner,
                           std::map<std::pair<int, int>, int>& witness,
                           int direction) {
    for (int i = 0; i < outer.num_blocks() && report.holds; ++i) {
      for (int j = 0; j < outer.num_blocks(); ++j) {
        int found = -1;
        for (int k = 0; k < inner.num_blocks(); ++k) {
          if (!blocks_intersect(outer.blocks[i], inner.blocks[k]) &&
              !blocks_intersect(outer.blocks[j], inner.blocks[k])) {
            found = k;
            break;
          }
        }
        if (found < 0) {
          report.holds = false;
          report.counterexample = PairCoveringReport::Counterexample{direction, {i, j}};
          break;
        }
        witness[{i, j}] = found;
      }
    }
  };

  one_direction(f_part, g_part, report.forward_witness, 0);
  if (report.holds) one_direction(g_part, f_part, report.backward_witness, 1);
  return report;
}

namespace {

bool primed_candidate_ok(const std::vector<Partition>& parts,
                         const std::vector<int>& tuple,
                         const std::vector<int>& primed_so_far, int m,
                         int candidate, CoveringMode mode) {
  const auto& block = parts[m].blocks[candidate];
  for (size_t l = 0; l < parts.size(); ++l) {
    if (static_cast<int>(l) == m) continue;
    if (blocks_intersect(block, parts[l].blocks[tuple[l]])) return false;
  }
  if (mode == CoveringMode::maximal) {
    for (int l = 0; l < m; ++l) {
      if (blocks_intersect(block, parts[l].blocks[primed_so_far[l]])) return false;
    }
  }
  return true;
}

// Lexicographically-first primed tuple for `tuple`, or nullopt. Depth-first
// in ascending block order, constraint-checked at each placement.
std::optional<std::vector<int>> find_primed_tuple(
    const std::vector<Partition>& parts, const std::vector<int>& tuple,
    CoveringMode mode, long candidate_cap, long& evaluated) {
  const int k = static_cast<int>(parts.size());
  std::vector<int> primed(k, 0);
  int m = 0;
  while (m >= 0) {
    if (primed[m] >= parts[m].num_blocks()) {
      primed[m] = 0;
      --m;
      if (m >= 0) ++primed[m];
      continue;
    }
    if (++evaluated > candidate_cap) {
      throw EnvelopeError("non_tuple_covering: candidate evaluation cap exceeded");
    }
    if (primed_candidate_ok(parts, tuple, primed, m, primed[m], mode)) {
      if (m == k - 1) return primed;
      ++m;
    } else {
      ++primed[m];
    }
  }
  return std::nullopt;
}

}  // namespace

TupleCoveringReport non_tuple_covering(const std::vector<Partition>& parts,
                                       CoveringMode mode, long candidate_cap) {
  if (parts.size() < 2) {
    throw std::invalid_argument("non_tuple_covering: need at least two partitions");
  }
  for (size_t i = 1; i < parts.size(); ++i) {
    check_same_sites(parts[0], parts[i], "non_tuple_covering");
  }
  for (const auto& p : parts) check_valid(p, "non_tuple_covering");

  TupleCoveringReport report;
  report.mode = mode;
  report.holds = true;

  const int k = static_cast<int>(parts.size());
  std::vector<int> tuple(k, 0);
  while (true) {
    auto primed = find_primed_tuple(parts, tuple, mode, candidate_cap,
                                    report.candidates_evaluated);
    if (!primed) {
      report.holds = false;
      report.counterexample = tuple;
      return report;
    }
    report.witnesses[tuple] = *primed;

    int m = k - 1;
    while (m >= 0 && ++tuple[m] == parts[m].num_blocks()) {
      tuple[m] = 0;
      --m;
    }
    if (m < 0) break;
  }
  return report;
}

bool verify_pair_witnesses(const Partition& f_part, const Partition& g_part,
                           const PairCoveringReport& report) {
  if (!report.holds) return false;
  auto check = [](const Partition& outer, const Partition& inner,
                  const std::map<std::pair<int, int>, int>& witness) {
    for (int i = 0; i < outer.num_blocks(); ++i) {
      for (int j = 0; j < outer.num_blocks(); ++j) {
        auto it = witness.find({i, j});
        if (it == witness.end()) return false;
        const auto& w = inner.blocks[it->second];
        if (blocks_intersect(outer.blocks[i], w) ||
            blocks_intersect(outer.blocks[j], w)) {
          return false;
        }
      }
    }
    return true;
  };
  return check(f_part, g_part, report.forward_witness) &&
         check(g_part, f_part, report.backward_witness);
}

bool verify_pair_counterexample(const Partition& f_part, const Partition& g_part,
                                const PairCoveringReport& report) {
  if (report.holds || !report.counterexample) return false;
  const auto& ce = *report.counterexample;
  const Partition& outer = (ce.direction == 0) ? f_part : g_part;
  const Partition& inner = (ce.direction == 0) ? g_part : f_part;
  const auto& a = outer.blocks[ce.pair.first];
  const auto& b = outer.blocks[ce.pair.second];
  for (const auto& candidate : inner.blocks) {
    if (!blocks_intersect(a, candidate) && !blocks_intersect(b, candidate)) {
      return false;
    }
  }
  return true;
}

bool verify_tuple_witnesses(const std::vector<Partition>& parts,
                            const TupleCoveringReport& report) {
  if (!report.holds) return false;
  const int k = static_cast<int>(parts.size());
  long expected = 1;
  for (const auto& p : parts) expected *= p.num_blocks();
  if (static_cast<long>(report.witnesses.size()) != expected) return false;

  for (const auto& [tuple, primed] : report.witnesses) {
    for (int m = 0; m < k; ++m) {
      const auto& block = parts[m].blocks[primed[m]];
      for (int l = 0; l < k; ++l) {
        if (l == m) continue;
        if (blocks_intersect(block, parts[l].blocks[tuple[l]])) return false;
        if (report.mode == CoveringMode::maximal &&
            blocks_intersect(block, parts[l].blocks[primed[l]])) {
          return false;
        }
      }
    }
  }
  return true;
}

bool verify_tuple_counterexample(const std::vector<Partition>& parts,
                                 const TupleCoveringReport& report) {
  if (report.holds || !report.counterexample) return false;
  long evaluated = 0;
  // Exhaustive re-check: no primed tuple may exist for the counterexample.
  auto primed = find_primed_tuple(parts, *report.counterexample, report.mode,
                                  std::numeric_limits<long>::max(), evaluated);
  return !primed.has_value();
}

std::vector<Partition> blanket_avoiding_partitions(
    const std::vector<int>& blanket, int n_sites, int block_size,
    long max_count) {
  if (blanket.empty()) {
    throw std::invalid_argument("blanket_avoiding_partitions: empty blanket");
  }
  if (block_size < 1) {
    throw std::invalid_argument("blanket_avoiding_partitions: block size must be >= 1");
  }
  std::set<int> blanket_set;
  for (int s : blanket) {
    if (s < 0 || s >= n_sites) {
      throw std::invalid_argument("blanket_avoiding_partitions: blanket site out of range");
    }
    blanket_set.insert(s);
  }

  std::vector<int> remaining;
  for (int s = 0; s < n_sites; ++s) {
    if (!blanket_set.count(s)) remaining.push_back(s);
  }
  if (remaining.empty()) {
    throw std::invalid_argument(
        "blanket_avoiding_partitions: blanket covers every site, no avoiding blocks exist");
  }
  if (static_cast<int>(remaining.size()) % block_size != 0) {
    throw std::invalid_argument(
        "blanket_avoiding_partitions: remaining sites are not tileable by the block size");
  }

  std::vector<int> designated(blanket_set.begin(), blanket_set.end());
  std::vector<Partition> out;
  std::vector<std::vector<int>> tiles;
  std::vector<bool> used(remaining.size(), false);

  // Tile the remaining sites: anchor each block at the smallest unused site
  // and choose its partners in ascending order.
  auto emit = [&]() {
    if (static_cast<long>(out.size()) >= max_count) {
      throw EnvelopeError("blanket_avoiding_partitions: partition count cap exceeded");
    }
    std::vector<std::vector<int>> blocks;
    blocks.push_back(designated);
    blocks.insert(blocks.end(), tiles.begin(), tiles.end());
    out.emplace_back(n_sites, std::move(blocks));
  };

  std::vector<int> current;
  auto recurse = [&](auto&& self, size_t anchor) -> void {
    while (anchor < used.size() && used[anchor]) ++anchor;
    if (anchor == used.size()) {
      emit();
      return;
    }
    used[anchor] = true;
    current.clear();
    current.push_back(remaining[anchor]);
    std::vector<int> partners;
    auto choose = [&](auto&& chooser, size_t from, int needed) -> void {
      if (needed == 0) {
        std::vector<int> tile{remaining[anchor]};
        for (int p : partners) tile.push_back(remaining[p]);
        tiles.push_back(tile);
        std::vector<size_t> marked;
        for (int p : partners) {
          used[p] = true;
          marked.push_back(p);
        }
        self(self, anchor + 1);
        tiles.pop_back();
        for (size_t p : marked) used[p] = false;
        return;
      }
      for (size_t c = from; c < used.size(); ++c) {
        if (used[c]) continue;
        partners.push_back(static_cast<int>(c));
        chooser(chooser, c + 1, needed - 1);
        partners.pop_back();
      }
    };
    choose(choose, anchor + 1, block_size - 1);
    used[anchor] = false;
  };
  recurse(recurse, 0);
  return out;
}

}  // namespace qdarwin
