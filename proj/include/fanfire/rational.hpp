#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "fanfire/errors.hpp"

namespace fanfire {

// Exact rational arithmetic.  mpq_class gives us canonical form (reduced,
// positive denominator) after every operation; we only add strict parsing
// and a fixed textual format.
using Rat = mpq_class;

// Accepts "p" or "p/q" with optional leading '-' on p; q must be positive
// after canonicalisation and never zero.
inline Rat rat_from_string(const std::string& s) {
  if (s.empty()) throw ParseError("empty rational");
  // mpq_class(str) aborts on garbage instead of throwing, so validate first.
  auto digits = [](const std::string& t) {
    if (t.empty()) return false;
    std::size_t i = (t[0] == '-') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  auto slash = s.find('/');
  if (slash == std::string::npos) {
    if (!digits(s)) throw ParseError("bad rational '" + s + "'");
  } else {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!digits(num) || !digits(den)) throw ParseError("bad rational '" + s + "'");
    if (mpz_class(den) == 0) throw ParseError("zero denominator in '" + s + "'");
  }
  Rat r;
  if (r.set_str(s, 10) != 0) throw ParseError("bad rational '" + s + "'");
  r.canonicalize();
  return r;
}

// "p" when the denominator is 1, else "p/q".
inline std::string rat_to_string(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline int sign(const Rat& r) { return sgn(r); }

inline Rat dot(const std::vector<Rat>& a, const std::vector<Rat>& b) {
  if (a.size() != b.size()) throw TypeError("dot: dimension mismatch");
  Rat acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace fanfire
