#pragma once

#include <functional>
#include <map>
#include <optional>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tbn/core.hpp"

namespace tbn {

enum class MoveKind { merge, split };
enum class MergeKind { clean, bind };
enum class NeighborMode { all, saturated_only };

/// One elementary step. For a merge, `a < b` index the two polymers in the
/// canonical configuration the move applies to; for a split, `polymer`
/// indexes the polymer and `part` is the proper nonempty sub-multiset that
/// splits off (by convention the lexicographically smaller side).
struct Move {
  MoveKind kind = MoveKind::merge;
  int a = -1, b = -1;
  int polymer = -1;
  Polymer part;
};

namespace detail {

inline std::vector<Monomer> multiset_union(const std::vector<Monomer>& a,
                                           const std::vector<Monomer>& b) {
  std::vector<Monomer> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

/// a - b for sorted monomer vectors; throws when b is not a sub-multiset.
inline std::vector<Monomer> multiset_subtract(const std::vector<Monomer>& a,
                                              const std::vector<Monomer>& b) {
  std::vector<Monomer> out;
  out.reserve(a.size() - b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size()) {
    if (j < b.size() && a[i] == b[j]) {
      ++i, ++j;
    } else if (j < b.size() && b[j] < a[i]) {
      throw DomainError("not a sub-multiset");
    } else {
      out.push_back(a[i++]);
    }
  }
  if (j != b.size()) throw DomainError("not a sub-multiset");
  return out;
}

inline int index_of_polymer(const Configuration& c, const Polymer& p) {
  auto it = std::lower_bound(c.polymers.begin(), c.polymers.end(), p);
  if (it == c.polymers.end() || !(*it == p)) throw DomainError("polymer not present");
  return static_cast<int>(it - c.polymers.begin());
}

}  // namespace detail

inline Configuration apply_move(const Configuration& c, const Move& m) {
  const int n = static_cast<int>(c.polymers.size());
  if (m.kind == MoveKind::merge) {
    if (m.a < 0 || m.b <= m.a || m.b >= n) throw DomainError("merge: bad polymer indices");
    std::vector<Polymer> ps;
    ps.reserve(c.polymers.size() - 1);
    for (int k = 0; k < n; ++k)
      if (k != m.a && k != m.b) ps.push_back(c.polymers[k]);
    ps.push_back(Polymer(
        detail::multiset_union(c.polymers[m.a].monomers, c.polymers[m.b].monomers)));
    return Configuration(std::move(ps));
  }
  if (m.polymer < 0 || m.polymer >= n) throw DomainError("split: bad polymer index");
  const Polymer& whole = c.polymers[m.polymer];
  if (m.part.monomers.empty() || m.part.monomers.size() >= whole.monomers.size())
    throw DomainError("split: part must be a proper nonempty sub-multiset");
  Polymer rest(detail::multiset_subtract(whole.monomers, m.part.monomers));
  std::vector<Polymer> ps;
  ps.reserve(c.polymers.size() + 1);
  for (int k = 0; k < n; ++k)
    if (k != m.polymer) ps.push_back(c.polymers[k]);
  ps.push_back(m.part);
  ps.push_back(std::move(rest));
  return Configuration(std::move(ps));
}

/// The move that undoes `m` (which took `before` to `after`).
inline Move inverse_move(const Configuration& before, const Move& m, const Configuration& after) {
  if (m.kind == MoveKind::merge) {
    Polymer merged(
        detail::multiset_union(before.polymers[m.a].monomers, before.polymers[m.b].monomers));
    Move inv;
    inv.kind = MoveKind::split;
    inv.polymer = detail::index_of_polymer(after, merged);
    inv.part = std::min(before.polymers[m.a], before.polymers[m.b]);
    return inv;
  }
  Polymer rest(detail::multiset_subtract(before.polymers[m.polymer].monomers, m.part.monomers));
  int ia = detail::index_of_polymer(after, m.part);
  int ib;
  if (m.part == rest) {
    ib = ia + 1;  // equal polymers sit adjacent in the canonical order
  } else {
    ib = detail::index_of_polymer(after, rest);
  }
  Move inv;
  inv.kind = MoveKind::merge;
  inv.a = std::min(ia, ib);
  inv.b = std::max(ia, ib);
  return inv;
}

inline MergeKind classify_merge(const Configuration& c, const Move& m) {
  if (m.kind != MoveKind::merge) throw DomainError("classify_merge: not a merge");
  const int n = static_cast<int>(c.polymers.size());
  if (m.a < 0 || m.b <= m.a || m.b >= n) throw DomainError("classify_merge: bad indices");
  return compatible(c.polymers[m.a], c.polymers[m.b]) ? MergeKind::bind : MergeKind::clean;
}

// ---------------------------------------------------------------------------
// Neighbor enumeration
// ---------------------------------------------------------------------------

namespace detail {

/// Packed move; `part` is a count vector when kind == split.
struct PMove {
  MoveKind kind = MoveKind::merge;
  int a = -1, b = -1;
  int polymer = -1;
  PackedPolymer part;
};

inline PackedConf apply_pmerge(const PackedConf& c, int i, int j) {
  PackedConf r;
  r.reserve(c.size() - 1);
  for (int k = 0; k < static_cast<int>(c.size()); ++k)
    if (k != i && k != j) r.push_back(c[k]);
  PackedPolymer u = c[i];
  for (std::size_t t = 0; t < u.size(); ++t) u[t] += c[j][t];
  r.push_back(std::move(u));
  sort_packed(r);
  return r;
}

inline PackedConf apply_psplit(const PackedConf& c, int poly, const PackedPolymer& part,
                               const PackedPolymer& rest) {
  PackedConf r;
  r.reserve(c.size() + 1);
  for (int k = 0; k < static_cast<int>(c.size()); ++k)
    if (k != poly) r.push_back(c[k]);
  r.push_back(part);
  r.push_back(rest);
  sort_packed(r);
  return r;
}

/// All distinct canonical results of one merge or one split, with the move
/// that produces each. Incompatible polymers may be merged. In
/// saturated_only mode, results that are not saturated are dropped.
inline std::vector<std::pair<PMove, PackedConf>> packed_neighbors(const Tbn& tbn,
                                                                  const PackedConf& c,
                                                                  NeighborMode mode) {
  std::vector<std::pair<PMove, PackedConf>> out;
  std::unordered_set<PackedConf, PackedConfHash> seen;
  const int n = static_cast<int>(c.size());

  auto emit = [&](PMove m, PackedConf r) {
    if (mode == NeighborMode::saturated_only && !tbn.packed_saturated(r)) return;
    if (seen.insert(r).second) out.emplace_back(std::move(m), std::move(r));
  };

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      PMove m;
      m.kind = MoveKind::merge;
      m.a = i;
      m.b = j;
      emit(std::move(m), apply_pmerge(c, i, j));
    }

  for (int p = 0; p < n; ++p) {
    if (p > 0 && c[p] == c[p - 1]) continue;  // identical polymer, identical splits
    const PackedPolymer& whole = c[p];
    long long total = 0;
    for (auto v : whole) total += v;
    if (total < 2) continue;
    // Odometer over proper nonempty sub-multisets.
    PackedPolymer part(whole.size(), 0);
    for (;;) {
      std::size_t t = 0;
      while (t < whole.size()) {
        if (part[t] < whole[t]) {
          part[t]++;
          break;
        }
        part[t] = 0;
        ++t;
      }
      if (t == whole.size()) break;
      if (part == whole) continue;  // full
      PackedPolymer rest(whole.size());
      for (std::size_t k = 0; k < whole.size(); ++k) rest[k] = whole[k] - part[k];
      if (packed_polymer_cmp(part, rest) == std::strong_ordering::greater)
        continue;  // each bipartition once, smaller side is the part
      PMove m;
      m.kind = MoveKind::split;
      m.polymer = p;
      m.part = part;
      emit(std::move(m), apply_psplit(c, p, part, rest));
    }
  }
  return out;
}

inline Move to_public_move(const Tbn& tbn, const PMove& m) {
  Move out;
  out.kind = m.kind;
  out.a = m.a;
  out.b = m.b;
  out.polymer = m.polymer;
  if (m.kind == MoveKind::split) out.part = tbn.unpack_polymer(m.part);
  return out;
}

inline Tbn universe_of(const Configuration& c) {
  std::vector<Monomer> ms;
  for (const auto& p : c.polymers)
    for (const auto& m : p.monomers) ms.push_back(m);
  return Tbn(ms);
}

}  // namespace detail

/// Every configuration one move away, deduplicated by canonical result.
inline std::vector<std::pair<Move, Configuration>> neighbors(const Configuration& c,
                                                             NeighborMode mode) {
  if (c.polymers.empty()) throw DomainError("neighbors: empty configuration");
  const Tbn tbn = detail::universe_of(c);
  const PackedConf pc = tbn.pack(c);
  std::vector<std::pair<Move, Configuration>> out;
  for (auto& [pm, pr] : detail::packed_neighbors(tbn, pc, mode))
    out.emplace_back(detail::to_public_move(tbn, pm), tbn.unpack(pr));
  return out;
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

/// A path stores every configuration it visits plus the move between each
/// adjacent pair, so heights can be recomputed from the path alone.
struct Path {
  std::vector<Configuration> configurations;
  std::vector<Move> moves;
};

inline void validate_path(const Path& p) {
  if (p.configurations.empty()) throw DomainError("path: must be nonempty");
  if (p.moves.size() + 1 != p.configurations.size())
    throw DomainError("path: move/configuration count mismatch");
  for (std::size_t i = 0; i < p.moves.size(); ++i)
    if (!(apply_move(p.configurations[i], p.moves[i]) == p.configurations[i + 1]))
      throw DomainError("path: adjacent configurations are not one move apart");
}

/// Greatest energy excess over the first configuration; always >= 0.
inline Rat height(const Path& p, const Rat& w) {
  validate_path(p);
  const Rat e0 = energy(p.configurations.front(), w);
  Rat h(0);
  for (const auto& c : p.configurations) {
    const Rat d = energy(c, w) - e0;
    if (d > h) h = d;
  }
  return h;
}

inline Path reverse_path(const Path& p) {
  Path out;
  out.configurations.assign(p.configurations.rbegin(), p.configurations.rend());
  for (std::size_t i = p.moves.size(); i-- > 0;)
    out.moves.push_back(inverse_move(p.configurations[i], p.moves[i], p.configurations[i + 1]));
  return out;
}

inline bool path_is_saturated(const Path& p) {
  for (const auto& c : p.configurations)
    if (!is_saturated(c)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Bind-first decomposition and path saturation
// ---------------------------------------------------------------------------

namespace detail {

/// Assigns each polymer of `fine` to the polymer of `coarse` it merged into.
/// Existence of an assignment is exactly the precondition "fine reaches
/// coarse by merges only"; throws DomainError when there is none.
inline std::vector<int> refinement_blocks(const Configuration& fine, const Configuration& coarse) {
  const int nf = static_cast<int>(fine.polymers.size());
  const int nc = static_cast<int>(coarse.polymers.size());
  std::vector<std::map<Monomer, long long>> caps(nc);
  for (int j = 0; j < nc; ++j)
    for (const auto& m : coarse.polymers[j].monomers) caps[j][m]++;

  std::vector<int> assign(nf, -1);
  auto fits = [&](int k, int j) {
    std::map<Monomer, long long> need;
    for (const auto& m : fine.polymers[k].monomers) need[m]++;
    for (const auto& [m, cnt] : need) {
      auto it = caps[j].find(m);
      if (it == caps[j].end() || it->second < cnt) return false;
    }
    return true;
  };
  auto place = [&](int k, int j, long long sign) {
    for (const auto& m : fine.polymers[k].monomers) caps[j][m] += sign;
  };

  std::function<bool(int)> rec = [&](int k) -> bool {
    if (k == nf) return true;
    // Equal fine polymers are interchangeable; forcing non-decreasing block
    // indices prunes the symmetric branches.
    int start = 0;
    if (k > 0 && fine.polymers[k] == fine.polymers[k - 1]) start = assign[k - 1];
    for (int j = start; j < nc; ++j) {
      if (!fits(k, j)) continue;
      place(k, j, -1);
      assign[k] = j;
      if (rec(k + 1)) return true;
      place(k, j, +1);
      assign[k] = -1;
    }
    return false;
  };
  if (!rec(0)) throw DomainError("coarse is not reachable from fine by merges");
  return assign;
}

}  // namespace detail

/// The "most merged" intermediate: merging compatible polymer pairs inside
/// each coarse block until none remain yields `mid` with
/// fine -> (bind merges) -> mid -> (clean merges) -> coarse. The greedy order
/// is the lexicographically smallest compatible pair, which makes the result
/// deterministic; maximality does not depend on the order because merging
/// never creates new compatibilities.
inline Configuration bind_first_decompose(const Configuration& fine, const Configuration& coarse) {
  const std::vector<int> assign = detail::refinement_blocks(fine, coarse);
  std::vector<std::vector<Polymer>> groups(coarse.polymers.size());
  for (std::size_t k = 0; k < fine.polymers.size(); ++k)
    groups[assign[k]].push_back(fine.polymers[k]);

  std::vector<Polymer> mid;
  for (auto& g : groups) {
    std::sort(g.begin(), g.end());
    bool merged = true;
    while (merged) {
      merged = false;
      for (std::size_t i = 0; i < g.size() && !merged; ++i)
        for (std::size_t j = i + 1; j < g.size() && !merged; ++j)
          if (compatible(g[i], g[j])) {
            Polymer u(detail::multiset_union(g[i].monomers, g[j].monomers));
            g.erase(g.begin() + j);
            g.erase(g.begin() + i);
            g.insert(std::lower_bound(g.begin(), g.end(), u), std::move(u));
            merged = true;
          }
    }
    for (auto& p : g) mid.push_back(std::move(p));
  }
  return Configuration(std::move(mid));
}

namespace detail {

/// Explicit merge-only path from `finer` to `coarser` (which must be
/// reachable by merges), merging each block's pieces one at a time.
inline Path clean_merge_chain(const Configuration& finer, const Configuration& coarser) {
  const std::vector<int> assign = refinement_blocks(finer, coarser);
  std::vector<std::vector<Polymer>> groups(coarser.polymers.size());
  for (std::size_t k = 0; k < finer.polymers.size(); ++k)
    groups[assign[k]].push_back(finer.polymers[k]);

  Path path;
  path.configurations.push_back(finer);
  Configuration cur = finer;
  for (auto& g : groups) {
    if (g.size() < 2) continue;
    std::sort(g.begin(), g.end());
    Polymer acc = g[0];
    for (std::size_t k = 1; k < g.size(); ++k) {
      int ia = index_of_polymer(cur, acc);
      int ib;
      if (acc == g[k]) {
        ib = ia + 1;
      } else {
        ib = index_of_polymer(cur, g[k]);
      }
      Move m;
      m.kind = MoveKind::merge;
      m.a = std::min(ia, ib);
      m.b = std::max(ia, ib);
      cur = apply_move(cur, m);
      path.moves.push_back(std::move(m));
      path.configurations.push_back(cur);
      acc = Polymer(multiset_union(acc.monomers, g[k].monomers));
    }
  }
  return path;
}

/// One step of the path-saturation construction. `cur_sat` is the saturated
/// companion of `prev` (reachable from it by bind merges); returns the
/// companion of `next` together with the saturated sub-path between the two
/// companions. The sub-path is one optional merge followed by splits, so its
/// peak is the energy of its highest configuration, mu.
struct SatStep {
  Configuration next_sat;
  Path segment;  // starts at cur_sat, ends at next_sat; may be a single config
};

inline SatStep saturate_step(const Configuration& prev, const Move& m, const Configuration& next,
                             const Configuration& cur_sat) {
  Configuration mu;
  std::optional<Move> mu_move;
  if (m.kind == MoveKind::merge) {
    const std::vector<int> blocks = refinement_blocks(prev, cur_sat);
    const int ba = blocks[m.a], bb = blocks[m.b];
    if (ba == bb) {
      mu = cur_sat;
    } else {
      Move mm;
      mm.kind = MoveKind::merge;
      mm.a = std::min(ba, bb);
      mm.b = std::max(ba, bb);
      mu = apply_move(cur_sat, mm);
      mu_move = mm;
    }
  } else {
    mu = cur_sat;
  }

  SatStep out;
  out.next_sat = bind_first_decompose(next, mu);
  Path down = reverse_path(clean_merge_chain(out.next_sat, mu));

  out.segment.configurations.push_back(cur_sat);
  if (mu_move) {
    out.segment.moves.push_back(*mu_move);
    out.segment.configurations.push_back(mu);
  }
  for (std::size_t i = 0; i + 1 < down.configurations.size(); ++i) {
    out.segment.moves.push_back(down.moves[i]);
    out.segment.configurations.push_back(down.configurations[i + 1]);
  }
  return out;
}

}  // namespace detail

/// Turns a path with saturated endpoints into a saturated path with the same
/// endpoints whose height exceeds the original's by at most max{0, 2 - w}.
/// Follows the constructive argument step by step: keep a saturated companion
/// of each original configuration and splice the per-step sub-paths.
inline Path saturate_path(const Path& p, const Rat& w) {
  validate_path(p);
  if (w < Rat(1)) throw SpecError("saturate_path: requires bond strength w >= 1");
  if (!is_saturated(p.configurations.front()) || !is_saturated(p.configurations.back()))
    throw DomainError("saturate_path: endpoints must be saturated");

  Path out;
  Configuration cur_sat = p.configurations.front();
  out.configurations.push_back(cur_sat);
  for (std::size_t i = 0; i < p.moves.size(); ++i) {
    detail::SatStep st =
        detail::saturate_step(p.configurations[i], p.moves[i], p.configurations[i + 1], cur_sat);
    for (std::size_t k = 0; k + 1 < st.segment.configurations.size(); ++k) {
      out.moves.push_back(st.segment.moves[k]);
      out.configurations.push_back(st.segment.configurations[k + 1]);
    }
    cur_sat = st.next_sat;
  }
  if (!(out.configurations.back() == p.configurations.back()))
    throw Error("saturate_path: internal error, endpoint mismatch");
  return out;
}

}  // namespace tbn
