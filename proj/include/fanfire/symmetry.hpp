#pragma once

#include <compare>
#include <cstddef>
#include <vector>

#include "fanfire/petri.hpp"
#include "fanfire/sign_vector.hpp"

namespace fanfire {

// A permutation of hyperplane indices together with a sign flip per
// index.  Acting on a sign vector: result[sigma[i]] = eps[i] * s[i].
struct SignedPermutation {
  std::vector<int> sigma;        // sigma[i] is where index i is sent
  std::vector<std::int8_t> eps;  // +1 or -1 per index

  auto operator<=>(const SignedPermutation&) const = default;
};

SignedPermutation sp_identity(std::size_t m);
// g2 after g1: sigma = sigma2 . sigma1, eps[i] = eps2[sigma1[i]] * eps1[i].
SignedPermutation compose(const SignedPermutation& g2, const SignedPermutation& g1);
SignedPermutation inverse(const SignedPermutation& g);

struct Group {
  std::size_t m = 0;
  std::vector<SignedPermutation> generators;
  std::vector<SignedPermutation> elements;  // full closure, sorted

  std::size_t order() const { return elements.size(); }
};

// Breadth-first products of the generators, starting from the identity.
// The groups here are finite, so products alone already contain every
// inverse.  Throws CapExceededError when the closure outgrows `cap`.
Group close(std::vector<SignedPermutation> generators, std::size_t m, std::size_t cap = 1000000);

SignVector act(const SignedPermutation& g, const SignVector& s);

// Lexicographic minimum of the orbit of s under G, with - < 0 < +.
// Idempotent and constant on orbits, so it serves as the orbit key.
SignVector canonical(const Group& G, const SignVector& s);

std::size_t orbit_size(const Group& G, const SignVector& s);

// File format: {m, generators: [{sigma: [..], eps: [..]}]}.  Parses and
// closes in one step.
Group group_from_json(const json& j, std::size_t cap = 1000000);
ojson group_to_json(const Group& G);

}  // namespace fanfire
