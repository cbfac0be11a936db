#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fanfire/linalg.hpp"
#include "fanfire/rational.hpp"
#include "fanfire/sign_vector.hpp"
#include "fanfire/symmetry.hpp"

namespace fanfire {

// Central hyperplane arrangement in Q^n: m hyperplanes through the origin,
// each given by a normal vector a_i, splitting space into the open cells
// where every <a_i, x> has a fixed sign.
//
// Desk-scale on purpose: n <= 8, m <= 20.  Everything downstream is exact,
// so the caps are what keeps brute-force cross-checks affordable.
struct Arrangement {
    std::size_t n = 0;  // ambient dimension
    Mat normals;        // m rows, each of length n
};

inline constexpr std::size_t kMaxDimension = 8;
inline constexpr std::size_t kMaxHyperplanes = 20;

// Validates: dimensions within caps, every normal nonzero of length n, and
// no two normals parallel (they would name the same hyperplane).
Arrangement make_arrangement(std::size_t n, Mat normals);

// A full-dimensional open cell: its sign vector (no zero entries) plus one
// interior point proving it nonempty.
struct Chamber {
    SignVector signs;
    Vec witness;

    friend bool operator==(const Chamber&, const Chamber&) = default;
};

SignVector sign_of_point(const Arrangement& arr, const Vec& x);

// Decides whether the cell {x : sign<a_i,x> = s_i for all i} is nonempty,
// and if so returns a point in it.  Zero entries of s pin x onto the
// corresponding hyperplanes; the strict part is solved by Fourier-Motzkin
// elimination over Q with the witness read back off the interval midpoints.
std::optional<Vec> feasible(const Arrangement& arr, const SignVector& s);

// Ground truth by exhaustion: test all 2^m nowhere-zero sign vectors.
// Refuses m > kMaxHyperplanes rather than melt the desk.
std::vector<Chamber> chambers_bruteforce(const Arrangement& arr);

// Chambers sharing a wall with c: for each hyperplane i whose wall
// (s with s_i := 0) is nonempty, the chamber with s_i flipped, carrying a
// fresh witness of its own.
std::vector<std::pair<std::size_t, Chamber>> neighbors(const Arrangement& arr,
                                                       const Chamber& c);

struct SymmetryViolation {
    std::size_t generator;  // index into group.generators
    SignVector s;           // feasible(s) != feasible(act(g, s))
};

// Checks that every generator of the group maps nonempty cells to nonempty
// cells and empty to empty.  Exhaustive over all 2^m nowhere-zero sign
// vectors for m <= 12, otherwise a seeded sample of 512.  Returns the first
// counterexample found, or nullopt if the action is consistent.
std::optional<SymmetryViolation> validate_symmetry(const Arrangement& arr,
                                                   const Group& group,
                                                   std::uint64_t seed = 0);

// File format: {"n": 3, "normals": [["1", "-1", "0"], ...]} with every
// coordinate a rational in "p" or "p/q" string form.
Arrangement arrangement_from_json(const nlohmann::json& j);
nlohmann::ordered_json arrangement_to_json(const Arrangement& arr);

// {"signs": "+-+", "witness": ["1", "-1/2", "0"]}
nlohmann::ordered_json chamber_to_json(const Chamber& c);
Chamber chamber_from_json(const nlohmann::json& j);

}  // namespace fanfire
