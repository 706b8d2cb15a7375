#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tbn/rational.hpp"

namespace tbn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Invalid parameters: bad generator arguments, malformed inputs, or a request
// outside the supported regime.
struct SpecError : Error {
  using Error::Error;
};
// A precondition on model values was violated (invalid move, configuration
// that is not a partition of the network, ...).
struct DomainError : Error {
  using Error::Error;
};

/// A binding site: formal symbol `name` plus a starred flag. `x` bonds with
/// `x*` and with nothing else.
struct Site {
  std::string name;
  bool starred = false;

  auto operator<=>(const Site&) const = default;
};

inline Site complement(const Site& s) { return Site{s.name, !s.starred}; }

/// Parses "abc" / "abc*" into a site. Names are opaque identifiers; only the
/// trailing star is interpreted.
inline Site parse_site_token(std::string_view token) {
  if (token.empty()) throw SpecError("empty site token");
  bool starred = token.back() == '*';
  if (starred) token.remove_suffix(1);
  if (token.empty()) throw SpecError("site token is just '*'");
  return Site{std::string(token), starred};
}

/// A monomer is a multiset of sites. The label is display-only: two monomers
/// with equal site multisets are the same monomer type no matter how they are
/// named.
struct Monomer {
  std::vector<Site> sites;  // kept sorted
  std::string label;

  Monomer() = default;
  explicit Monomer(std::vector<Site> s, std::string lbl = "")
      : sites(std::move(s)), label(std::move(lbl)) {
    std::sort(sites.begin(), sites.end());
  }

  static Monomer from_tokens(const std::vector<std::string>& tokens, std::string label = "") {
    std::vector<Site> s;
    s.reserve(tokens.size());
    for (const auto& t : tokens) s.push_back(parse_site_token(t));
    return Monomer(std::move(s), std::move(label));
  }

  std::size_t size() const { return sites.size(); }

  friend bool operator==(const Monomer& a, const Monomer& b) { return a.sites == b.sites; }
  friend std::strong_ordering operator<=>(const Monomer& a, const Monomer& b) {
    return a.sites <=> b.sites;
  }
};

/// A polymer is a nonempty multiset of monomers.
struct Polymer {
  std::vector<Monomer> monomers;  // kept sorted

  Polymer() = default;
  explicit Polymer(std::vector<Monomer> ms) : monomers(std::move(ms)) {
    std::sort(monomers.begin(), monomers.end());
  }

  std::size_t size() const { return monomers.size(); }
  std::size_t site_count() const {
    std::size_t n = 0;
    for (const auto& m : monomers) n += m.size();
    return n;
  }

  friend bool operator==(const Polymer&, const Polymer&) = default;
  friend std::strong_ordering operator<=>(const Polymer& a, const Polymer& b) {
    return a.monomers <=> b.monomers;
  }
};

/// A configuration is a partition of the network's monomers into polymers,
/// represented as a multiset of polymers. Swapping monomers of equal type
/// between polymers does not produce a distinct configuration; keeping every
/// level sorted makes equality exactly that quotient.
struct Configuration {
  std::vector<Polymer> polymers;  // kept sorted

  Configuration() = default;
  explicit Configuration(std::vector<Polymer> ps) : polymers(std::move(ps)) {
    std::sort(polymers.begin(), polymers.end());
  }

  std::size_t size() const { return polymers.size(); }
  std::size_t monomer_count() const {
    std::size_t n = 0;
    for (const auto& p : polymers) n += p.size();
    return n;
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;
  friend std::strong_ordering operator<=>(const Configuration& a, const Configuration& b) {
    return a.polymers <=> b.polymers;
  }
};

// ---------------------------------------------------------------------------
// Site arithmetic
// ---------------------------------------------------------------------------

/// (unstarred count, starred count) per site name.
using SiteBalance = std::map<std::string, std::pair<long long, long long>>;

inline SiteBalance site_balance(const Polymer& p) {
  SiteBalance bal;
  for (const auto& m : p.monomers)
    for (const auto& s : m.sites) {
      auto& e = bal[s.name];
      (s.starred ? e.second : e.first)++;
    }
  return bal;
}

/// Sites left after removing as many complementary pairs as possible:
/// per name, |#x - #x*| copies of the majority side. The removal order does
/// not matter, so this is well defined.
inline std::vector<Site> exposed_sites(const Polymer& p) {
  if (p.monomers.empty()) throw DomainError("exposed_sites: empty polymer");
  std::vector<Site> out;
  for (const auto& [name, uc] : site_balance(p)) {
    const long long d = uc.first - uc.second;
    for (long long k = 0; k < (d > 0 ? d : -d); ++k) out.push_back(Site{name, d < 0});
  }
  return out;  // sorted: map iterates by name, one side per name
}

/// Bonds inside a polymer: per name, min(#x, #x*).
inline long long bond_count(const Polymer& p) {
  if (p.monomers.empty()) throw DomainError("bond_count: empty polymer");
  long long h = 0;
  for (const auto& [name, uc] : site_balance(p)) h += std::min(uc.first, uc.second);
  return h;
}

inline long long bond_count(const Configuration& c) {
  long long h = 0;
  for (const auto& p : c.polymers) h += bond_count(p);
  return h;
}

/// Two polymers are compatible when some site name is exposed unstarred in
/// one and starred in the other.
inline bool compatible(const Polymer& p, const Polymer& q) {
  const SiteBalance bp = site_balance(p), bq = site_balance(q);
  for (const auto& [name, uc] : bp) {
    const long long dp = uc.first - uc.second;
    if (dp == 0) continue;
    auto it = bq.find(name);
    if (it == bq.end()) continue;
    const long long dq = it->second.first - it->second.second;
    if ((dp > 0 && dq < 0) || (dp < 0 && dq > 0)) return true;
  }
  return false;
}

/// No two polymers are compatible. A polymer exposes at most one side of each
/// name, so a compatible pair exists iff some name is exposed unstarred in one
/// polymer and starred in another; that makes the per-name scan below
/// equivalent to checking all pairs (and a polymer can never be compatible
/// with a copy of itself).
inline bool is_saturated(const Configuration& c) {
  std::map<std::string, std::pair<bool, bool>> seen;  // name -> (unstarred exposed, starred exposed)
  for (const auto& p : c.polymers)
    for (const auto& [name, uc] : site_balance(p)) {
      const long long d = uc.first - uc.second;
      if (d > 0) seen[name].first = true;
      if (d < 0) seen[name].second = true;
    }
  for (const auto& [name, e] : seen)
    if (e.first && e.second) return false;
  return true;
}

/// Exact (H, S) pair; the evaluated energy is -wH - S.
struct Energy {
  long long bonds = 0;     // H
  long long polymers = 0;  // S

  Rat value(const Rat& w) const { return -w * bonds - Rat(polymers); }

  friend bool operator==(const Energy&, const Energy&) = default;
};

inline Energy energy_parts(const Configuration& c) {
  return Energy{bond_count(c), static_cast<long long>(c.polymers.size())};
}

inline Rat energy(const Configuration& c, const Rat& w) { return energy_parts(c).value(w); }

inline void validate_bond_strength(const Rat& w) {
  if (w < Rat(0)) throw SpecError("bond strength w must be nonnegative");
}

// ---------------------------------------------------------------------------
// Canonical encoding
// ---------------------------------------------------------------------------

namespace detail {

inline void encode_site(const Site& s, std::string& out) {
  out += std::to_string(s.name.size() + (s.starred ? 1 : 0));
  out += ':';
  out += s.name;
  if (s.starred) out += '*';
}

inline void encode_monomer(const Monomer& m, std::string& out) {
  out += '(';
  for (const auto& s : m.sites) encode_site(s, out);
  out += ')';
}

inline void encode_polymer(const Polymer& p, std::string& out) {
  out += '[';
  for (const auto& m : p.monomers) encode_monomer(m, out);
  out += ']';
}

}  // namespace detail

/// Total-order key: equal iff the configurations are equal as multisets of
/// polymer multisets. Length-prefixed site encoding keeps it unambiguous for
/// arbitrary names.
inline std::string canonical_key(const Configuration& c) {
  std::string out;
  for (const auto& p : c.polymers) detail::encode_polymer(p, out);
  return out;
}

inline std::string canonical_key(const Polymer& p) {
  std::string out;
  detail::encode_polymer(p, out);
  return out;
}

inline std::string canonical_key(const Monomer& m) {
  std::string out;
  detail::encode_monomer(m, out);
  return out;
}

/// Values are canonical by construction; canonicalize just exposes the key.
inline std::string canonicalize(const Configuration& c) { return canonical_key(c); }

// ---------------------------------------------------------------------------
// The network and its packed view
// ---------------------------------------------------------------------------

/// Count vector over the network's monomer types; one polymer.
using PackedPolymer = std::vector<int32_t>;
/// Sorted vector of packed polymers; one configuration.
using PackedConf = std::vector<PackedPolymer>;

namespace detail {

/// Orders packed polymers the same way the monomer-level representation
/// does: lexicographically over the expanded type sequence.
inline std::strong_ordering packed_polymer_cmp(const PackedPolymer& a, const PackedPolymer& b) {
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t t = 0; t < n; ++t) {
    const int32_t at = t < a.size() ? a[t] : 0;
    const int32_t bt = t < b.size() ? b[t] : 0;
    if (at == bt) continue;
    const auto& shorter = at < bt ? a : b;
    bool more = false;
    for (std::size_t u = t + 1; u < shorter.size(); ++u)
      if (shorter[u] > 0) {
        more = true;
        break;
      }
    if (at < bt) return more ? std::strong_ordering::greater : std::strong_ordering::less;
    return more ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return std::strong_ordering::equal;
}

inline bool packed_polymer_less(const PackedPolymer& a, const PackedPolymer& b) {
  return packed_polymer_cmp(a, b) == std::strong_ordering::less;
}

inline void sort_packed(PackedConf& c) { std::sort(c.begin(), c.end(), packed_polymer_less); }

struct PackedConfHash {
  std::size_t operator()(const PackedConf& c) const {
    std::size_t h = 1469598103934665603ull;
    auto mix = [&h](std::size_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    for (const auto& p : c) {
      mix(0xABCD);
      for (auto v : p) mix(static_cast<std::size_t>(v));
    }
    return h;
  }
};

}  // namespace detail

/// A TBN: a multiset of monomer types plus the interned site tables the
/// packed representation needs. Immutable after construction.
class Tbn {
 public:
  Tbn() = default;

  explicit Tbn(const std::vector<Monomer>& monomers) {
    std::vector<std::pair<Monomer, long long>> counted;
    for (const auto& m : monomers) counted.emplace_back(m, 1);
    init(std::move(counted));
  }

  explicit Tbn(std::vector<std::pair<Monomer, long long>> typed_counts) {
    init(std::move(typed_counts));
  }

  const std::vector<Monomer>& types() const { return types_; }
  const std::vector<long long>& counts() const { return counts_; }
  std::size_t type_count() const { return types_.size(); }
  long long monomer_count() const { return total_; }
  const std::vector<std::string>& site_names() const { return site_names_; }

  /// Index of the monomer's type; throws if the monomer is not part of this
  /// network.
  std::size_t type_index(const Monomer& m) const {
    auto it = std::lower_bound(types_.begin(), types_.end(), m);
    if (it == types_.end() || !(*it == m)) throw DomainError("monomer is not a type of this TBN");
    return static_cast<std::size_t>(it - types_.begin());
  }

  Configuration all_singletons() const {
    std::vector<Polymer> ps;
    for (std::size_t t = 0; t < types_.size(); ++t)
      for (long long k = 0; k < counts_[t]; ++k) ps.push_back(Polymer({types_[t]}));
    return Configuration(std::move(ps));
  }

  Configuration all_merged() const {
    std::vector<Monomer> ms;
    for (std::size_t t = 0; t < types_.size(); ++t)
      for (long long k = 0; k < counts_[t]; ++k) ms.push_back(types_[t]);
    return Configuration({Polymer(std::move(ms))});
  }

  /// Partition test: the union of the configuration's polymers must equal this
  /// network's monomer multiset.
  bool is_configuration(const Configuration& c) const {
    std::vector<long long> seen(types_.size(), 0);
    for (const auto& p : c.polymers) {
      if (p.monomers.empty()) return false;
      for (const auto& m : p.monomers) {
        auto it = std::lower_bound(types_.begin(), types_.end(), m);
        if (it == types_.end() || !(*it == m)) return false;
        seen[static_cast<std::size_t>(it - types_.begin())]++;
      }
    }
    return seen == counts_;
  }

  void require_configuration(const Configuration& c) const {
    if (!is_configuration(c)) throw DomainError("not a configuration of this TBN");
  }

  // -- packed view ----------------------------------------------------------

  PackedPolymer pack_polymer(const Polymer& p) const {
    PackedPolymer v(types_.size(), 0);
    for (const auto& m : p.monomers) v[type_index(m)]++;
    return v;
  }

  PackedConf pack(const Configuration& c) const {
    PackedConf out;
    out.reserve(c.polymers.size());
    for (const auto& p : c.polymers) out.push_back(pack_polymer(p));
    detail::sort_packed(out);
    return out;
  }

  Polymer unpack_polymer(const PackedPolymer& p) const {
    std::vector<Monomer> ms;
    for (std::size_t t = 0; t < types_.size(); ++t)
      for (int32_t k = 0; k < p[t]; ++k) ms.push_back(types_[t]);
    return Polymer(std::move(ms));
  }

  Configuration unpack(const PackedConf& c) const {
    std::vector<Polymer> ps;
    ps.reserve(c.size());
    for (const auto& p : c) ps.push_back(unpack_polymer(p));
    return Configuration(std::move(ps));
  }

  /// Signed exposure per site name id: (#x - #x*) after maximal pairing.
  std::vector<long long> exposure(const PackedPolymer& p) const {
    std::vector<long long> e(site_names_.size(), 0);
    for (std::size_t t = 0; t < types_.size(); ++t) {
      if (p[t] == 0) continue;
      for (std::size_t k = 0; k < site_names_.size(); ++k)
        e[k] += static_cast<long long>(p[t]) * (unstarred_[t][k] - starred_[t][k]);
    }
    return e;
  }

  long long polymer_bonds(const PackedPolymer& p) const {
    long long h = 0;
    for (std::size_t k = 0; k < site_names_.size(); ++k) {
      long long u = 0, s = 0;
      for (std::size_t t = 0; t < types_.size(); ++t) {
        if (p[t] == 0) continue;
        u += static_cast<long long>(p[t]) * unstarred_[t][k];
        s += static_cast<long long>(p[t]) * starred_[t][k];
      }
      h += std::min(u, s);
    }
    return h;
  }

  Energy packed_energy(const PackedConf& c) const {
    Energy e;
    e.polymers = static_cast<long long>(c.size());
    for (const auto& p : c) e.bonds += polymer_bonds(p);
    return e;
  }

  bool packed_saturated(const PackedConf& c) const {
    // Same per-name argument as is_saturated().
    std::vector<uint8_t> pos(site_names_.size(), 0), neg(site_names_.size(), 0);
    for (const auto& p : c) {
      const auto e = exposure(p);
      for (std::size_t k = 0; k < e.size(); ++k) {
        if (e[k] > 0) pos[k] = 1;
        if (e[k] < 0) neg[k] = 1;
      }
    }
    for (std::size_t k = 0; k < site_names_.size(); ++k)
      if (pos[k] && neg[k]) return false;
    return true;
  }

  bool packed_compatible(const PackedPolymer& a, const PackedPolymer& b) const {
    const auto ea = exposure(a), eb = exposure(b);
    for (std::size_t k = 0; k < ea.size(); ++k)
      if ((ea[k] > 0 && eb[k] < 0) || (ea[k] < 0 && eb[k] > 0)) return true;
    return false;
  }

  /// Attainable maximum of H over all configurations (the fully merged
  /// configuration pairs min(#x, #x*) per name).
  long long max_bonds() const {
    PackedPolymer all(types_.size());
    for (std::size_t t = 0; t < types_.size(); ++t) all[t] = static_cast<int32_t>(counts_[t]);
    return polymer_bonds(all);
  }

  std::string canonical_tbn_key() const {
    std::string out;
    for (std::size_t t = 0; t < types_.size(); ++t) {
      out += std::to_string(counts_[t]);
      out += 'x';
      detail::encode_monomer(types_[t], out);
    }
    return out;
  }

 private:
  void init(std::vector<std::pair<Monomer, long long>> typed_counts) {
    if (typed_counts.empty()) throw SpecError("empty TBN");
    std::sort(typed_counts.begin(), typed_counts.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [m, k] : typed_counts) {
      if (k <= 0) throw SpecError("monomer counts must be strictly positive");
      if (m.sites.empty()) throw SpecError("monomer with no sites");
      if (!types_.empty() && types_.back() == m) {
        counts_.back() += k;
      } else {
        types_.push_back(m);
        counts_.push_back(k);
      }
    }
    total_ = std::accumulate(counts_.begin(), counts_.end(), 0ll);

    std::vector<std::string> names;
    for (const auto& t : types_)
      for (const auto& s : t.sites) names.push_back(s.name);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    site_names_ = std::move(names);

    unstarred_.assign(types_.size(), std::vector<int>(site_names_.size(), 0));
    starred_.assign(types_.size(), std::vector<int>(site_names_.size(), 0));
    for (std::size_t t = 0; t < types_.size(); ++t)
      for (const auto& s : types_[t].sites) {
        const auto it = std::lower_bound(site_names_.begin(), site_names_.end(), s.name);
        const auto k = static_cast<std::size_t>(it - site_names_.begin());
        (s.starred ? starred_ : unstarred_)[t][k]++;
      }
  }

  std::vector<Monomer> types_;
  std::vector<long long> counts_;
  std::vector<std::string> site_names_;
  std::vector<std::vector<int>> unstarred_, starred_;
  long long total_ = 0;
};

}  // namespace tbn
