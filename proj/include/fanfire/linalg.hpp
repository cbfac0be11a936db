#pragma once

#include <cstddef>
#include <vector>

#include "fanfire/rational.hpp"

namespace fanfire {

using Vec = std::vector<Rat>;
using Mat = std::vector<Vec>;

// Gauss-Jordan to reduced row echelon form, exact over Q; returns the
// pivot columns in order.  Zero rows sink to the bottom.
std::vector<std::size_t> rref(Mat& a);

std::size_t rank(Mat a);

// Basis of {x in Q^n : a x = 0}; each row of the result is one basis
// vector.  An empty matrix has the full standard basis as its nullspace.
Mat nullspace_basis(Mat a, std::size_t n);

}  // namespace fanfire
