#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "fanfire/rational.hpp"

namespace fanfire {

// Dense univariate polynomial over Q: c[i] multiplies x^i.  The coefficient
// vector is kept trimmed, so the zero polynomial is the empty vector and
// c.back() is never zero.
struct PolyQ {
    std::vector<Rat> c;

    friend bool operator==(const PolyQ&, const PolyQ&) = default;
};

PolyQ poly(std::vector<Rat> coeffs);
PolyQ poly_const(Rat value);

bool is_zero(const PolyQ& p);
int degree(const PolyQ& p);  // -1 for the zero polynomial
const Rat& lc(const PolyQ& p);

PolyQ operator+(const PolyQ& a, const PolyQ& b);
PolyQ operator-(const PolyQ& a, const PolyQ& b);
PolyQ operator*(const PolyQ& a, const PolyQ& b);
PolyQ operator*(const Rat& s, const PolyQ& a);

Rat eval(const PolyQ& p, const Rat& x);
PolyQ derivative(const PolyQ& p);
PolyQ poly_pow(const PolyQ& p, unsigned e);

// Quotient and remainder over Q; throws on division by zero.
std::pair<PolyQ, PolyQ> divmod(const PolyQ& a, const PolyQ& b);
// Division that must leave no remainder; throws otherwise.
PolyQ divexact(const PolyQ& a, const PolyQ& b);

// Monic greatest common divisor; gcd(0, 0) = 0.
PolyQ gcd_monic(PolyQ a, PolyQ b);

// All rational roots of p, each listed once in increasing order, plus the
// degree left over after dividing them out; residual_degree == 0 means the
// list is provably complete.  Factoring the boundary coefficients uses
// trial division, so a coefficient dominated by primes beyond the trial
// bound raises IndeterminateError rather than guess.
struct RationalRoots {
    std::vector<Rat> roots;
    int residual_degree = 0;
};
RationalRoots rational_roots(const PolyQ& p);

// Polynomial in y whose coefficients live in Q[x]: c[j] multiplies y^j,
// trimmed just like PolyQ.
struct PolyXY {
    std::vector<PolyQ> c;

    friend bool operator==(const PolyXY&, const PolyXY&) = default;
};

bool is_zero(const PolyXY& f);
int degree_y(const PolyXY& f);
const PolyQ& lc_y(const PolyXY& f);
// True when the top y-coefficient is a nonzero constant, i.e. f is monic in
// y up to a unit.
bool has_constant_lc_y(const PolyXY& f);

PolyXY operator+(const PolyXY& a, const PolyXY& b);
PolyXY operator-(const PolyXY& a, const PolyXY& b);
PolyXY operator*(const PolyXY& a, const PolyXY& b);

PolyXY derivative_x(const PolyXY& f);
PolyXY derivative_y(const PolyXY& f);

// Specialize x := a, leaving a polynomial in y.
PolyQ at_x(const PolyXY& f, const Rat& a);

// The substitution x := x + lambda * y.
PolyXY shear_x(const PolyXY& f, const Rat& lambda);

// Resultant with respect to y, computed by the subresultant remainder
// sequence over Q[x]; equals the determinant of the Sylvester matrix.
PolyQ resultant_y(PolyXY a, PolyXY b);

// [{"coeff": "p/q", "xexp": 0, "yexp": 2}, ...]; repeated monomials are
// summed.  Exponents above 32 are rejected as outside the desk scale.
PolyXY polyxy_from_json(const nlohmann::json& j);
nlohmann::ordered_json polyxy_to_json(const PolyXY& f);

inline constexpr unsigned kMaxExponent = 32;

}  // namespace fanfire
