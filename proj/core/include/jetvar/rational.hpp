#pragma once

#include <gmpxx.h>

#include <string>

namespace jetvar {

/* Exact arbitrary-precision rational coefficients.  GMP keeps mpq values
 * canonical under arithmetic as long as they start canonical, so all
 * construction from raw numerator/denominator goes through make_rational. */
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1)
{
	Rational q(num, den);
	q.canonicalize();
	return q;
}

/* Parses "n" or "n/d"; throws std::invalid_argument on malformed input. */
Rational rational_from_string(const std::string& text);

inline std::string rational_to_string(const Rational& q) { return q.get_str(); }

inline double rational_to_double(const Rational& q) { return q.get_d(); }

inline Rational rational_pow(const Rational& q, int e)
{
	Rational r = 1;
	Rational base = e >= 0 ? q : Rational(1 / q);
	for (int k = e >= 0 ? e : -e; k > 0; --k)
		r *= base;
	return r;
}

} // namespace jetvar
