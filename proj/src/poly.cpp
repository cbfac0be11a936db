#include "fanfire/poly.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "fanfire/errors.hpp"
#include "fanfire/json_util.hpp"

namespace fanfire {

namespace {

void trim(std::vector<Rat>& c) {
    while (!c.empty() && c.back() == 0) c.pop_back();
}

void trim_y(PolyXY& f) {
    while (!f.c.empty() && is_zero(f.c.back())) f.c.pop_back();
}

}  // namespace

PolyQ poly(std::vector<Rat> coeffs) {
    trim(coeffs);
    return PolyQ{std::move(coeffs)};
}

PolyQ poly_const(Rat value) {
    PolyQ p;
    if (value != 0) p.c.push_back(std::move(value));
    return p;
}

bool is_zero(const PolyQ& p) { return p.c.empty(); }

int degree(const PolyQ& p) { return static_cast<int>(p.c.size()) - 1; }

const Rat& lc(const PolyQ& p) {
    if (is_zero(p)) throw Error("leading coefficient of the zero polynomial");
    return p.c.back();
}

PolyQ operator+(const PolyQ& a, const PolyQ& b) {
    std::vector<Rat> c(std::max(a.c.size(), b.c.size()), Rat(0));
    for (std::size_t i = 0; i < a.c.size(); ++i) c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) c[i] += b.c[i];
    return poly(std::move(c));
}

PolyQ operator-(const PolyQ& a, const PolyQ& b) {
    std::vector<Rat> c(std::max(a.c.size(), b.c.size()), Rat(0));
    for (std::size_t i = 0; i < a.c.size(); ++i) c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) c[i] -= b.c[i];
    return poly(std::move(c));
}

PolyQ operator*(const PolyQ& a, const PolyQ& b) {
    if (is_zero(a) || is_zero(b)) return PolyQ{};
    std::vector<Rat> c(a.c.size() + b.c.size() - 1, Rat(0));
    for (std::size_t i = 0; i < a.c.size(); ++i)
        for (std::size_t j = 0; j < b.c.size(); ++j) c[i + j] += a.c[i] * b.c[j];
    return poly(std::move(c));
}

PolyQ operator*(const Rat& s, const PolyQ& a) {
    if (s == 0) return PolyQ{};
    PolyQ out = a;
    for (Rat& q : out.c) q *= s;
    return out;
}

Rat eval(const PolyQ& p, const Rat& x) {
    Rat acc(0);
    for (auto it = p.c.rbegin(); it != p.c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

PolyQ derivative(const PolyQ& p) {
    std::vector<Rat> c;
    for (std::size_t i = 1; i < p.c.size(); ++i) c.push_back(Rat(long(i)) * p.c[i]);
    return poly(std::move(c));
}

PolyQ poly_pow(const PolyQ& p, unsigned e) {
    PolyQ out = poly_const(Rat(1));
    for (unsigned i = 0; i < e; ++i) out = out * p;
    return out;
}

std::pair<PolyQ, PolyQ> divmod(const PolyQ& a, const PolyQ& b) {
    if (is_zero(b)) throw Error("polynomial division by zero");
    PolyQ r = a;
    std::vector<Rat> q(degree(a) >= degree(b) ? a.c.size() - b.c.size() + 1 : 0,
                       Rat(0));
    while (!is_zero(r) && degree(r) >= degree(b)) {
        const std::size_t shift = r.c.size() - b.c.size();
        const Rat f = lc(r) / lc(b);
        q[shift] = f;
        for (std::size_t i = 0; i < b.c.size(); ++i) r.c[shift + i] -= f * b.c[i];
        trim(r.c);
    }
    return {poly(std::move(q)), std::move(r)};
}

PolyQ divexact(const PolyQ& a, const PolyQ& b) {
    auto [q, r] = divmod(a, b);
    if (!is_zero(r)) throw Error("inexact polynomial division");
    return std::move(q);
}

PolyQ gcd_monic(PolyQ a, PolyQ b) {
    while (!is_zero(b)) {
        PolyQ r = divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    if (is_zero(a)) return a;
    const Rat inv = 1 / lc(a);
    for (Rat& q : a.c) q *= inv;
    return a;
}

namespace {

constexpr unsigned long kTrialBound = 1000000;
// Anything this small with no prime factor below the trial bound is prime.
const mpz_class kPrimeCertBound = mpz_class(kTrialBound) * mpz_class(kTrialBound);

std::vector<std::pair<mpz_class, unsigned>> factorize(mpz_class n) {
    std::vector<std::pair<mpz_class, unsigned>> fs;
    auto take = [&](unsigned long d) {
        if (!mpz_divisible_ui_p(n.get_mpz_t(), d)) return;
        unsigned e = 0;
        while (mpz_divisible_ui_p(n.get_mpz_t(), d)) {
            mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), d);
            ++e;
        }
        fs.emplace_back(d, e);
    };
    take(2);
    unsigned long d = 3;
    for (; d <= kTrialBound; d += 2) {
        mpz_class sq(d);
        sq *= d;
        if (sq > n) break;
        take(d);
    }
    if (n > 1) {
        mpz_class sq(d);
        sq *= d;
        if (sq <= n && n > kPrimeCertBound)
            throw IndeterminateError("coefficient factor " + n.get_str() +
                                     " resists trial division");
        fs.emplace_back(std::move(n), 1);
    }
    return fs;
}

std::vector<mpz_class> divisors(const mpz_class& n) {
    std::vector<mpz_class> divs = {1};
    for (const auto& [p, e] : factorize(n)) {
        const std::size_t base = divs.size();
        mpz_class pk = 1;
        for (unsigned k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < base; ++i) divs.push_back(divs[i] * pk);
        }
        if (divs.size() > 4096)
            throw IndeterminateError("divisor enumeration blew past the cap");
    }
    return divs;
}

}  // namespace

RationalRoots rational_roots(const PolyQ& p0) {
    if (is_zero(p0)) throw Error("rational roots of the zero polynomial");
    RationalRoots out;
    PolyQ p = p0;

    std::size_t strip = 0;
    while (strip < p.c.size() && p.c[strip] == 0) ++strip;
    if (strip > 0) {
        out.roots.emplace_back(0);
        p.c.erase(p.c.begin(), p.c.begin() + strip);
    }
    if (degree(p) < 1) return out;

    mpz_class l = 1;
    for (const Rat& q : p.c) l = lcm(l, q.get_den());
    std::vector<mpz_class> z;
    for (const Rat& q : p.c) {
        Rat scaled = q * Rat(l);
        z.push_back(scaled.get_num());
    }

    const std::vector<mpz_class> ps = divisors(abs(z.front()));
    const std::vector<mpz_class> qs = divisors(abs(z.back()));
    if (ps.size() * qs.size() > 65536)
        throw IndeterminateError("candidate root set blew past the cap");

    std::set<Rat> cands;
    for (const mpz_class& pp : ps)
        for (const mpz_class& qq : qs) {
            if (gcd(pp, qq) != 1) continue;
            cands.insert(Rat(pp, qq));  // coprime with positive denominator
            cands.insert(Rat(-pp, qq));
        }

    for (const Rat& r : cands) {
        bool hit = false;
        while (degree(p) >= 1 && eval(p, r) == 0) {
            p = divexact(p, poly({Rat(-r), Rat(1)}));
            hit = true;
        }
        if (hit) out.roots.push_back(r);
    }
    out.residual_degree = std::max(degree(p), 0);
    std::sort(out.roots.begin(), out.roots.end());
    return out;
}

bool is_zero(const PolyXY& f) { return f.c.empty(); }

int degree_y(const PolyXY& f) { return static_cast<int>(f.c.size()) - 1; }

const PolyQ& lc_y(const PolyXY& f) {
    if (is_zero(f)) throw Error("leading coefficient of the zero polynomial");
    return f.c.back();
}

bool has_constant_lc_y(const PolyXY& f) {
    return !is_zero(f) && degree(lc_y(f)) == 0;
}

PolyXY operator+(const PolyXY& a, const PolyXY& b) {
    PolyXY out;
    out.c.resize(std::max(a.c.size(), b.c.size()));
    for (std::size_t i = 0; i < a.c.size(); ++i) out.c[i] = out.c[i] + a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) out.c[i] = out.c[i] + b.c[i];
    trim_y(out);
    return out;
}

PolyXY operator-(const PolyXY& a, const PolyXY& b) {
    PolyXY out;
    out.c.resize(std::max(a.c.size(), b.c.size()));
    for (std::size_t i = 0; i < a.c.size(); ++i) out.c[i] = out.c[i] + a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) out.c[i] = out.c[i] - b.c[i];
    trim_y(out);
    return out;
}

PolyXY operator*(const PolyXY& a, const PolyXY& b) {
    if (is_zero(a) || is_zero(b)) return PolyXY{};
    PolyXY out;
    out.c.resize(a.c.size() + b.c.size() - 1);
    for (std::size_t i = 0; i < a.c.size(); ++i)
        for (std::size_t j = 0; j < b.c.size(); ++j)
            out.c[i + j] = out.c[i + j] + a.c[i] * b.c[j];
    trim_y(out);
    return out;
}

PolyXY derivative_x(const PolyXY& f) {
    PolyXY out;
    for (const PolyQ& cj : f.c) out.c.push_back(derivative(cj));
    trim_y(out);
    return out;
}

PolyXY derivative_y(const PolyXY& f) {
    PolyXY out;
    for (std::size_t j = 1; j < f.c.size(); ++j)
        out.c.push_back(Rat(long(j)) * f.c[j]);
    trim_y(out);
    return out;
}

PolyQ at_x(const PolyXY& f, const Rat& a) {
    std::vector<Rat> c;
    for (const PolyQ& cj : f.c) c.push_back(eval(cj, a));
    return poly(std::move(c));
}

PolyXY shear_x(const PolyXY& f, const Rat& lambda) {
    PolyXY out;
    auto add = [&](std::size_t xe, std::size_t ye, const Rat& v) {
        if (v == 0) return;
        if (out.c.size() <= ye) out.c.resize(ye + 1);
        auto& row = out.c[ye].c;
        if (row.size() <= xe) row.resize(xe + 1, Rat(0));
        row[xe] += v;
    };
    for (std::size_t jy = 0; jy < f.c.size(); ++jy)
        for (std::size_t ix = 0; ix < f.c[jy].c.size(); ++ix) {
            const Rat& a = f.c[jy].c[ix];
            if (a == 0) continue;
            // x^ix turns into sum_k C(ix,k) lambda^k x^(ix-k) y^k, with the
            // binomial factor carried along incrementally.
            Rat term = a;
            for (std::size_t k = 0; k <= ix; ++k) {
                add(ix - k, jy + k, term);
                if (k < ix)
                    term = term * lambda * Rat(long(ix - k)) / Rat(long(k + 1));
            }
        }
    for (PolyQ& cj : out.c) trim(cj.c);
    trim_y(out);
    return out;
}

namespace {

PolyXY mul_coeff(const PolyXY& f, const PolyQ& s) {
    if (is_zero(f) || is_zero(s)) return PolyXY{};
    PolyXY out;
    for (const PolyQ& cj : f.c) out.c.push_back(cj * s);
    trim_y(out);
    return out;
}

PolyXY shift_y(const PolyXY& f, std::size_t k) {
    if (is_zero(f)) return f;
    PolyXY out;
    out.c.resize(k);
    for (const PolyQ& cj : f.c) out.c.push_back(cj);
    return out;
}

PolyXY divexact_coeffs(const PolyXY& f, const PolyQ& d) {
    PolyXY out;
    for (const PolyQ& cj : f.c) out.c.push_back(divexact(cj, d));
    trim_y(out);
    return out;
}

PolyQ content_y(const PolyXY& f) {
    PolyQ g;
    for (const PolyQ& cj : f.c) g = gcd_monic(std::move(g), cj);
    return g;
}

// Pseudo-remainder: lc(B)^(deg A - deg B + 1) * A reduced modulo B, all
// divisions dodged so everything stays in Q[x].
PolyXY prem(PolyXY A, const PolyXY& B) {
    const PolyQ d = lc_y(B);
    int spare = degree_y(A) - degree_y(B) + 1;
    while (!is_zero(A) && degree_y(A) >= degree_y(B)) {
        const std::size_t shift = std::size_t(degree_y(A) - degree_y(B));
        PolyXY t = shift_y(mul_coeff(B, lc_y(A)), shift);
        A = mul_coeff(A, d) - t;
        --spare;
    }
    PolyQ f = poly_const(Rat(1));
    for (; spare > 0; --spare) f = f * d;
    return mul_coeff(A, f);
}

}  // namespace

PolyQ resultant_y(PolyXY A, PolyXY B) {
    if (is_zero(A) || is_zero(B)) return PolyQ{};
    int s = 1;
    if (degree_y(A) < degree_y(B)) {
        if (degree_y(A) % 2 == 1 && degree_y(B) % 2 == 1) s = -s;
        std::swap(A, B);
    }

    const PolyQ ca = content_y(A);
    const PolyQ cb = content_y(B);
    A = divexact_coeffs(A, ca);
    B = divexact_coeffs(B, cb);
    PolyQ t = poly_pow(ca, unsigned(degree_y(B))) * poly_pow(cb, unsigned(degree_y(A)));

    // Subresultant remainder sequence: the g/h bookkeeping makes every
    // division below exact while keeping intermediate coefficients tame.
    PolyQ g = poly_const(Rat(1));
    PolyQ h = poly_const(Rat(1));
    while (degree_y(B) > 0) {
        const int delta = degree_y(A) - degree_y(B);
        if (degree_y(A) % 2 == 1 && degree_y(B) % 2 == 1) s = -s;
        PolyXY R = prem(A, B);
        A = std::move(B);
        B = divexact_coeffs(R, g * poly_pow(h, unsigned(delta)));
        g = lc_y(A);
        if (delta > 0)
            h = divexact(poly_pow(g, unsigned(delta)), poly_pow(h, unsigned(delta - 1)));
    }
    if (is_zero(B)) return PolyQ{};  // common factor of positive y-degree
    if (degree_y(A) == 0) return s < 0 ? Rat(-1) * t : t;  // two y-constants

    const PolyQ& b0 = B.c[0];
    PolyQ res = divexact(poly_pow(b0, unsigned(degree_y(A))),
                         poly_pow(h, unsigned(degree_y(A) - 1)));
    res = res * t;
    return s < 0 ? Rat(-1) * res : res;
}

PolyXY polyxy_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("curve: expected an array of monomials");
    std::vector<std::vector<Rat>> grid;
    for (const auto& entry : j) {
        if (!entry.is_object()) throw ParseError("curve: monomial is not an object");
        const Rat coeff = rat_from_string(jsonu::need_string(entry, "coeff", "curve"));
        const auto xe = jsonu::need_unsigned(entry, "xexp", "curve");
        const auto ye = jsonu::need_unsigned(entry, "yexp", "curve");
        if (xe > kMaxExponent || ye > kMaxExponent)
            throw ParseError("curve: exponent beyond " + std::to_string(kMaxExponent));
        if (grid.size() <= ye) grid.resize(ye + 1);
        auto& row = grid[static_cast<std::size_t>(ye)];
        if (row.size() <= xe) row.resize(xe + 1, Rat(0));
        row[static_cast<std::size_t>(xe)] += coeff;
    }
    PolyXY f;
    for (auto& row : grid) f.c.push_back(poly(std::move(row)));
    trim_y(f);
    return f;
}

nlohmann::ordered_json polyxy_to_json(const PolyXY& f) {
    auto out = nlohmann::ordered_json::array();
    for (std::size_t ye = 0; ye < f.c.size(); ++ye)
        for (std::size_t xe = 0; xe < f.c[ye].c.size(); ++xe) {
            const Rat& coeff = f.c[ye].c[xe];
            if (coeff == 0) continue;
            nlohmann::ordered_json row;
            row["coeff"] = rat_to_string(coeff);
            row["xexp"] = xe;
            row["yexp"] = ye;
            out.push_back(std::move(row));
        }
    return out;
}

}  // namespace fanfire
