#include "fanfire/arrangement.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <string>

#include "fanfire/errors.hpp"
#include "fanfire/json_util.hpp"

namespace fanfire {

namespace {

bool all_zero(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](const Rat& q) { return q == 0; });
}

// Scale to the primitive integer vector pointing the same way; keeps the
// dedup sets small and stops coefficients snowballing mid-elimination.
Vec normalized(Vec c) {
    mpz_class l = 1;
    for (const Rat& q : c) l = lcm(l, q.get_den());
    mpz_class g = 0;
    for (Rat& q : c) {
        q *= Rat(l);
        g = gcd(g, q.get_num());
    }
    if (g != 0)
        for (Rat& q : c) q /= Rat(g);
    return c;
}

bool is_parallel(const Vec& u, const Vec& v) {
    for (std::size_t p = 0; p + 1 < u.size(); ++p)
        for (std::size_t q = p + 1; q < u.size(); ++q)
            if (u[p] * v[q] != u[q] * v[p]) return false;
    return true;
}

}  // namespace

Arrangement make_arrangement(std::size_t n, Mat normals) {
    if (n < 1 || n > kMaxDimension)
        throw Error("dimension must be between 1 and " + std::to_string(kMaxDimension));
    if (normals.size() > kMaxHyperplanes)
        throw CapExceededError("more than " + std::to_string(kMaxHyperplanes) +
                               " hyperplanes");
    for (std::size_t i = 0; i < normals.size(); ++i) {
        if (normals[i].size() != n)
            throw Error("normal " + std::to_string(i) + " has wrong dimension");
        if (all_zero(normals[i]))
            throw Error("normal " + std::to_string(i) + " is zero");
    }
    for (std::size_t i = 0; i < normals.size(); ++i)
        for (std::size_t j = i + 1; j < normals.size(); ++j)
            if (is_parallel(normals[i], normals[j]))
                throw Error("normals " + std::to_string(i) + " and " +
                            std::to_string(j) + " are parallel");
    return Arrangement{n, std::move(normals)};
}

SignVector sign_of_point(const Arrangement& arr, const Vec& x) {
    if (x.size() != arr.n) throw TypeError("point has wrong dimension");
    SignVector s;
    s.reserve(arr.normals.size());
    for (const Vec& a : arr.normals)
        s.push_back(static_cast<std::int8_t>(sign(dot(a, x))));
    return s;
}

std::optional<Vec> feasible(const Arrangement& arr, const SignVector& s) {
    const std::size_t m = arr.normals.size();
    if (s.size() != m) throw TypeError("sign vector length does not match arrangement");

    Mat eq;
    for (std::size_t i = 0; i < m; ++i)
        if (s[i] == 0) eq.push_back(arr.normals[i]);

    // Substitute the equalities out: x = sum_j y_j b_j over a nullspace
    // basis, leaving a purely strict homogeneous system in y.
    const Mat basis = nullspace_basis(eq, arr.n);
    const std::size_t k = basis.size();

    std::set<Vec> rows;
    for (std::size_t i = 0; i < m; ++i) {
        if (s[i] == 0) continue;
        Vec c(k);
        for (std::size_t j = 0; j < k; ++j)
            c[j] = s[i] * dot(arr.normals[i], basis[j]);
        c = normalized(std::move(c));
        if (all_zero(c)) return std::nullopt;  // <a_i,x> is pinned to 0, can't be strict
        rows.insert(std::move(c));
    }

    // Fourier-Motzkin: stage[v] holds rows <c,y> > 0 over y_1..y_v.  Drop
    // the last variable by pairing every lower bound on it with every upper
    // bound; an all-zero combination reads 0 > 0, so the cell is empty.
    std::vector<std::vector<Vec>> stage(k + 1);
    stage[k].assign(rows.begin(), rows.end());
    for (std::size_t v = k; v >= 1; --v) {
        std::set<Vec> next;
        std::vector<const Vec*> lows, ups;
        for (const Vec& c : stage[v]) {
            const int sg = sign(c[v - 1]);
            if (sg > 0)
                lows.push_back(&c);
            else if (sg < 0)
                ups.push_back(&c);
            else
                next.insert(Vec(c.begin(), c.end() - 1));
        }
        for (const Vec* lo : lows)
            for (const Vec* up : ups) {
                const Rat p = (*lo)[v - 1];
                const Rat q = (*up)[v - 1];
                Vec comb(v - 1);
                for (std::size_t j = 0; j + 1 < v; ++j)
                    comb[j] = -q * (*lo)[j] + p * (*up)[j];
                if (all_zero(comb)) return std::nullopt;
                next.insert(normalized(std::move(comb)));
            }
        stage[v - 1].assign(next.begin(), next.end());
    }

    // Feasible.  Walk back up assigning each y_v the midpoint of its open
    // interval, or bound +- 1 when one side is unbounded.
    Vec y(k, Rat(0));
    for (std::size_t v = 1; v <= k; ++v) {
        bool has_lo = false, has_hi = false;
        Rat lo, hi;
        for (const Vec& c : stage[v]) {
            if (c[v - 1] == 0) continue;
            Rat rest(0);
            for (std::size_t j = 0; j + 1 < v; ++j) rest += c[j] * y[j];
            const Rat bound = -rest / c[v - 1];
            if (c[v - 1] > 0) {
                if (!has_lo || bound > lo) lo = bound;
                has_lo = true;
            } else {
                if (!has_hi || bound < hi) hi = bound;
                has_hi = true;
            }
        }
        if (has_lo && has_hi)
            y[v - 1] = (lo + hi) / 2;  // elimination guarantees lo < hi
        else if (has_lo)
            y[v - 1] = lo + 1;
        else if (has_hi)
            y[v - 1] = hi - 1;
        // else unconstrained: stay at 0
    }

    Vec x(arr.n, Rat(0));
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < arr.n; ++i) x[i] += y[j] * basis[j][i];

    if (sign_of_point(arr, x) != s)
        throw Error("internal: witness fails its sign vector");
    return x;
}

std::vector<Chamber> chambers_bruteforce(const Arrangement& arr) {
    const std::size_t m = arr.normals.size();
    if (m > kMaxHyperplanes)
        throw CapExceededError("brute force over 2^" + std::to_string(m) +
                               " sign vectors refused");
    std::vector<Chamber> out;
    SignVector s(m, 0);
    auto walk = [&](auto&& self, std::size_t i) -> void {
        if (i == m) {
            if (auto w = feasible(arr, s)) out.push_back(Chamber{s, std::move(*w)});
            return;
        }
        s[i] = -1;
        self(self, i + 1);
        s[i] = +1;
        self(self, i + 1);
        s[i] = 0;
    };
    walk(walk, 0);
    return out;  // lexicographic by signs, - before +
}

std::vector<std::pair<std::size_t, Chamber>> neighbors(const Arrangement& arr,
                                                       const Chamber& c) {
    const std::size_t m = arr.normals.size();
    if (c.signs.size() != m)
        throw TypeError("chamber sign vector length does not match arrangement");
    for (std::int8_t v : c.signs)
        if (v == 0) throw TypeError("chamber sign vector has a zero entry");

    std::vector<std::pair<std::size_t, Chamber>> out;
    for (std::size_t i = 0; i < m; ++i) {
        SignVector wall = c.signs;
        wall[i] = 0;
        if (!feasible(arr, wall)) continue;
        SignVector flipped = c.signs;
        flipped[i] = static_cast<std::int8_t>(-flipped[i]);
        auto w = feasible(arr, flipped);
        if (!w)
            throw Error("internal: wall " + std::to_string(i) +
                        " is open but the far side is empty");
        out.emplace_back(i, Chamber{std::move(flipped), std::move(*w)});
    }
    return out;
}

std::optional<SymmetryViolation> validate_symmetry(const Arrangement& arr,
                                                   const Group& group,
                                                   std::uint64_t seed) {
    const std::size_t m = arr.normals.size();
    if (group.m != m) throw TypeError("group index count does not match arrangement");

    auto check = [&](const SignVector& s) -> std::optional<SymmetryViolation> {
        const bool base = feasible(arr, s).has_value();
        for (std::size_t gi = 0; gi < group.generators.size(); ++gi) {
            const SignVector t = act(group.generators[gi], s);
            if (feasible(arr, t).has_value() != base) return SymmetryViolation{gi, s};
        }
        return std::nullopt;
    };

    if (m <= 12) {
        SignVector s(m, 0);
        std::optional<SymmetryViolation> found;
        auto walk = [&](auto&& self, std::size_t i) -> void {
            if (found) return;
            if (i == m) {
                found = check(s);
                return;
            }
            s[i] = -1;
            self(self, i + 1);
            s[i] = +1;
            self(self, i + 1);
            s[i] = 0;
        };
        walk(walk, 0);
        return found;
    }

    std::mt19937_64 rng(seed);
    for (int t = 0; t < 512; ++t) {
        SignVector s(m);
        for (std::size_t i = 0; i < m; ++i)
            s[i] = (rng() & 1) ? std::int8_t{1} : std::int8_t{-1};
        if (auto v = check(s)) return v;
    }
    return std::nullopt;
}

Arrangement arrangement_from_json(const nlohmann::json& j) {
    const auto n = jsonu::need_unsigned(j, "n", "arrangement");
    const nlohmann::json& rows = jsonu::need_array(j, "normals", "arrangement");
    Mat normals;
    for (const nlohmann::json& row : rows) {
        if (!row.is_array()) throw ParseError("arrangement: normal is not an array");
        Vec v;
        for (const nlohmann::json& e : row) {
            if (!e.is_string())
                throw ParseError("arrangement: coordinate is not a rational string");
            v.push_back(rat_from_string(e.get<std::string>()));
        }
        normals.push_back(std::move(v));
    }
    try {
        return make_arrangement(static_cast<std::size_t>(n), std::move(normals));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(std::string("arrangement: ") + e.what());
    }
}

nlohmann::ordered_json arrangement_to_json(const Arrangement& arr) {
    nlohmann::ordered_json j;
    j["n"] = arr.n;
    auto rows = nlohmann::ordered_json::array();
    for (const Vec& a : arr.normals) {
        auto row = nlohmann::ordered_json::array();
        for (const Rat& q : a) row.push_back(rat_to_string(q));
        rows.push_back(std::move(row));
    }
    j["normals"] = std::move(rows);
    return j;
}

nlohmann::ordered_json chamber_to_json(const Chamber& c) {
    nlohmann::ordered_json j;
    j["signs"] = sign_vector_to_string(c.signs);
    auto w = nlohmann::ordered_json::array();
    for (const Rat& q : c.witness) w.push_back(rat_to_string(q));
    j["witness"] = std::move(w);
    return j;
}

Chamber chamber_from_json(const nlohmann::json& j) {
    Chamber c;
    c.signs = sign_vector_from_string(jsonu::need_string(j, "signs", "chamber"));
    const nlohmann::json& w = jsonu::need_array(j, "witness", "chamber");
    for (const nlohmann::json& e : w) {
        if (!e.is_string())
            throw ParseError("chamber: witness coordinate is not a rational string");
        c.witness.push_back(rat_from_string(e.get<std::string>()));
    }
    return c;
}

}  // namespace fanfire
