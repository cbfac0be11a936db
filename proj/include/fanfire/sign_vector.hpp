#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fanfire/errors.hpp"

namespace fanfire {

// A sign vector over {-1, 0, +1}, one entry per hyperplane.  Comparison is
// lexicographic with - < 0 < +, which int8_t order gives us for free.
using SignVector = std::vector<std::int8_t>;

inline std::string sign_vector_to_string(const SignVector& s) {
  std::string out;
  out.reserve(s.size());
  for (auto v : s) out += (v < 0 ? '-' : v > 0 ? '+' : '0');
  return out;
}

inline SignVector sign_vector_from_string(const std::string& s) {
  SignVector out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '-': out.push_back(-1); break;
      case '0': out.push_back(0); break;
      case '+': out.push_back(1); break;
      default: throw ParseError(std::string("bad sign character '") + c + "'");
    }
  }
  return out;
}

}  // namespace fanfire
