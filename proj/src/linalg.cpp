#include "fanfire/linalg.hpp"

#include "fanfire/errors.hpp"

namespace fanfire {

std::vector<std::size_t> rref(Mat& a) {
    std::vector<std::size_t> pivots;
    if (a.empty()) return pivots;
    const std::size_t rows = a.size();
    const std::size_t cols = a[0].size();
    for (const Vec& row : a)
        if (row.size() != cols) throw TypeError("ragged matrix");

    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && a[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(a[r], a[p]);
        const Rat inv = 1 / a[r][c];
        for (std::size_t j = c; j < cols; ++j) a[r][j] *= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || a[i][c] == 0) continue;
            const Rat f = a[i][c];
            for (std::size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

std::size_t rank(Mat a) { return rref(a).size(); }

Mat nullspace_basis(Mat a, std::size_t n) {
    for (const Vec& row : a)
        if (row.size() != n) throw TypeError("matrix width does not match dimension");
    const std::vector<std::size_t> pivots = rref(a);

    std::vector<bool> is_pivot(n, false);
    for (std::size_t c : pivots) is_pivot[c] = true;

    Mat basis;
    for (std::size_t f = 0; f < n; ++f) {
        if (is_pivot[f]) continue;
        Vec v(n, Rat(0));
        v[f] = 1;
        // Row i of the rref reads x_{pivot_i} + sum_{free j} a[i][j] x_j = 0.
        for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -a[i][f];
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace fanfire
