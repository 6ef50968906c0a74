// Independent brute-force oracles used by the unit and acceptance suites.
// Everything here recomputes expected values through a different algebraic
// route than the library code it checks.
#pragma once

#include "qdarwin/covering.hpp"
#include "qdarwin/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qdarwin::oracles {

/// Embedding oracle: kron(op, identity) in subset-first site order, then a
/// permutation matrix into the target ordering.
inline Matrix embed_by_permutation(const Matrix& op, const std::vector<int>& subset,
                                   const SiteSpace& target) {
  std::vector<int> order = subset;
  for (int s = 0; s < target.num_sites(); ++s) {
    if (std::find(subset.begin(), subset.end(), s) == subset.end()) {
      order.push_back(s);
    }
  }
  long rest_dim = 1;
  for (size_t k = subset.size(); k < order.size(); ++k) {
    rest_dim *= target.site_dim(order[k]);
  }
  const Matrix padded = kron(op, Matrix::Identity(rest_dim, rest_dim));

  // Permutation: digit pattern in `order` coordinates -> target flat index.
  const long dim = target.total_dim();
  Matrix perm = Matrix::Zero(dim, dim);
  for (long src = 0; src < dim; ++src) {
    long rem = src;
    long dst = 0;
    for (int k = static_cast<int>(order.size()) - 1; k >= 0; --k) {
      const int site = order[k];
      dst += (rem % target.site_dim(site)) * target.stride(site);
      rem /= target.site_dim(site);
    }
    perm(dst, src) = 1.0;
  }
  return perm * padded * perm.adjoint();
}

/// Partial-trace oracle by explicit digit decomposition of flat indices.
inline Matrix partial_trace_by_digits(const Matrix& rho, const SiteSpace& space,
                                      const std::vector<int>& keep) {
  std::vector<int> traced;
  for (int s = 0; s < space.num_sites(); ++s) {
    if (std::find(keep.begin(), keep.end(), s) == keep.end()) traced.push_back(s);
  }
  long keep_dim = 1;
  for (int s : keep) keep_dim *= space.site_dim(s);
  long traced_dim = 1;
  for (int s : traced) traced_dim *= space.site_dim(s);

  auto flat_index = [&](long keep_part, long traced_part) {
    long index = 0;
    for (int k = static_cast<int>(keep.size()) - 1; k >= 0; --k) {
      index += (keep_part % space.site_dim(keep[k])) * space.stride(keep[k]);
      keep_part /= space.site_dim(keep[k]);
    }
    for (int k = static_cast<int>(traced.size()) - 1; k >= 0; --k) {
      index += (traced_part % space.site_dim(traced[k])) * space.stride(traced[k]);
      traced_part /= space.site_dim(traced[k]);
    }
    return index;
  };

  Matrix out = Matrix::Zero(keep_dim, keep_dim);
  for (long a = 0; a < keep_dim; ++a) {
    for (long b = 0; b < keep_dim; ++b) {
      for (long r = 0; r < traced_dim; ++r) {
        out(a, b) += rho(flat_index(a, r), flat_index(b, r));
      }
    }
  }
  return out;
}

/// Direct quantifier evaluation of the two-partition predicate.
inline bool pair_covering_bruteforce(const Partition& f_part, const Partition& g_part) {
  auto direction = [](const Partition& outer, const Partition& inner) {
    for (const auto& a : outer.blocks) {
      for (const auto& b : outer.blocks) {
        bool found = false;
        for (const auto& c : inner.blocks) {
          if (!blocks_intersect(a, c) && !blocks_intersect(b, c)) {
            found = true;
            break;
          }
        }
        if (!found) return false;
      }
    }
    return true;
  };
  return direction(f_part, g_part) && direction(g_part, f_part);
}

/// Direct quantifier evaluation of the k-partition predicate.
inline bool tuple_covering_bruteforce(const std::vector<Partition>& parts,
                                      CoveringMode mode) {
  const int k = static_cast<int>(parts.size());
  std::vector<int> tuple(k, 0);
  while (true) {
    std::vector<int> primed(k, 0);
    bool found = false;
    while (true) {
      bool ok = true;
      for (int m = 0; m < k && ok; ++m) {
        for (int l = 0; l < k && ok; ++l) {
          if (l == m) continue;
          if (blocks_intersect(parts[m].blocks[primed[m]], parts[l].blocks[tuple[l]])) {
            ok = false;
          }
          if (mode == CoveringMode::maximal &&
              blocks_intersect(parts[m].blocks[primed[m]], parts[l].blocks[primed[l]])) {
            ok = false;
          }
        }
      }
      if (ok) {
        found = true;
        break;
      }
      int m = k - 1;
      while (m >= 0 && ++primed[m] == parts[m].num_blocks()) {
        primed[m] = 0;
        --m;
      }
      if (m < 0) break;
    }
    if (!found) return false;

    int m = k - 1;
    while (m >= 0 && ++tuple[m] == parts[m].num_blocks()) {
      tuple[m] = 0;
      --m;
    }
    if (m < 0) return true;
  }
}

/// Grid sweep over the symmetric parent family T^{(x,z)} = (I + x a X + z b Z)/4
/// for the sharp qubit X/Z pair. Averaging any 4-outcome parent over the
/// conjugation/relabeling symmetries of the problem lands in this family
/// without increasing its max marginal deviation, so the sweep minimum lower
/// bounds the residual achievable by any parent (up to grid resolution).
inline double xz_bloch_sweep_lower_bound(double step) {
  double best = 1.0;
  for (double a = -1.0; a <= 1.0 + 1e-12; a += step) {
    for (double b = -1.0; b <= 1.0 + 1e-12; b += step) {
      if (a * a + b * b > 1.0) continue;  // PSD boundary
      const double residual = std::max((1.0 - a) / 2.0, (1.0 - b) / 2.0);
      best = std::min(best, residual);
    }
  }
  return best;
}

/// All partitions of a subset of [0, n) into at most max_blocks nonempty
/// blocks (the enumeration behind the combinatorics acceptance criterion).
inline std::vector<Partition> enumerate_partial_partitions(int n_sites, int max_blocks) {
  std::vector<Partition> out;
  const int n_subsets = 1 << n_sites;
  for (int mask = 1; mask < n_subsets; ++mask) {
    std::vector<int> members;
    for (int s = 0; s < n_sites; ++s) {
      if (mask & (1 << s)) members.push_back(s);
    }
    // Set partitions of `members` by restricted-growth strings.
    std::vector<int> assignment(members.size(), 0);
    auto emit = [&]() {
      const int n_blocks = 1 + *std::max_element(assignment.begin(), assignment.end());
      if (n_blocks > max_blocks) return;
      std::vector<std::vector<int>> blocks(n_blocks);
      for (size_t i = 0; i < members.size(); ++i) {
        blocks[assignment[i]].push_back(members[i]);
      }
      out.emplace_back(n_sites, std::move(blocks));
    };
    auto rec = [&](auto&& self, size_t pos, int used) -> void {
      if (pos == members.size()) {
        emit();
        return;
      }
      for (int b = 0; b <= used && b < max_blocks; ++b) {
        assignment[pos] = b;
        self(self, pos + 1, std::max(used, b + 1));
      }
    };
    rec(rec, 0, 0);
  }
  return out;
}

}  // namespace qdarwin::oracles
