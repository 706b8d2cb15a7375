#pragma once

#include <boost/rational.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace tbn {

// All energies, bond strengths and barrier heights are exact rationals.
// Barrier theorems hinge on exact ties, so nothing in the model ever touches
// floating point (the physical free-energy conversion in io.hpp is the one
// deliberate exception).
using Rat = boost::rational<long long>;

// Accepts "2", "-7", "3/2". Anything else (including decimals) is rejected.
inline std::optional<Rat> try_parse_rat(std::string_view text) {
  auto parse_int = [](std::string_view s, long long& out) -> bool {
    if (s.empty()) return false;
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
      neg = s[0] == '-';
      i = 1;
      if (i == s.size()) return false;
    }
    long long v = 0;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
      v = v * 10 + (s[i] - '0');
    }
    out = neg ? -v : v;
    return true;
  };
  const auto slash = text.find('/');
  long long num = 0, den = 1;
  if (slash == std::string_view::npos) {
    if (!parse_int(text, num)) return std::nullopt;
  } else {
    if (!parse_int(text.substr(0, slash), num)) return std::nullopt;
    if (!parse_int(text.substr(slash + 1), den)) return std::nullopt;
    if (den == 0) return std::nullopt;
  }
  return Rat(num, den);
}

// Human-friendly: "2", "3/2".
inline std::string format_rat(const Rat& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Wire format: always "num/den" with den > 0.
inline std::string format_rat_pq(const Rat& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace tbn
