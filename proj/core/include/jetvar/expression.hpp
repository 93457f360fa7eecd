#pragma once

#include "jetvar/atom.hpp"
#include "jetvar/rational.hpp"

#include <map>
#include <optional>
#include <vector>

namespace jetvar {

/* One factor of a monomial: atom^exp with exp a nonzero integer (negative
 * exponents give Laurent monomials, so single-monomial division is exact). */
struct PoweredAtom {
	Atom atom;
	int exp = 1;

	bool operator==(const PoweredAtom& b) const { return exp == b.exp && atom == b.atom; }
};

/* Product of powered atoms, sorted by atom_cmp, no repeated atoms. */
using Monomial = std::vector<PoweredAtom>;

struct Term {
	Rational coeff;
	Monomial mono;
};

int monomial_cmp(const Monomial& a, const Monomial& b);

/* Immutable exact-rational polynomial (Laurent) in the four atom classes.
 * Invariants: monomials canonical, pairwise distinct, sorted descending by
 * monomial_cmp, no zero coefficients.  Every operation returns a value in
 * canonical form, so equality of meaning is equality of representation and
 * is_zero is a decision procedure. */
class Expression {
public:
	Expression() = default;

	static Expression constant(Rational q);
	static Expression integer(long n) { return constant(make_rational(n)); }
	static Expression atom(Atom a);
	static Expression base(int dir) { return atom(Atom::base(dir)); }
	static Expression jet(int field, MultiIndex alpha) { return atom(Atom::jet(field, std::move(alpha))); }
	static Expression param(std::string name) { return atom(Atom::param(std::move(name))); }
	static Expression formal(std::string name, MultiIndex alpha)
	{
		return atom(Atom::formal(std::move(name), std::move(alpha)));
	}

	const std::vector<Term>& terms() const { return terms_; }
	bool is_zero() const { return terms_.empty(); }
	int term_count() const { return (int)terms_.size(); }

	/* Largest |alpha| over jet atoms (0 if none). */
	int max_jet_order() const;

	/* Max over restricted field range [field_begin, field_end). */
	int max_jet_order(int field_begin, int field_end) const;

	bool depends_on(const Atom& a) const;

	/* Sorted list of distinct jet atoms appearing anywhere. */
	std::vector<Atom> jet_atoms() const;
	std::vector<Atom> atoms() const;

	/* If the whole expression is a single constant term, its value. */
	std::optional<Rational> as_constant() const;

	Expression operator-() const;
	Expression scaled(const Rational& q) const;
	Expression pow(int e) const;

	friend Expression operator+(const Expression& a, const Expression& b);
	friend Expression operator-(const Expression& a, const Expression& b);
	friend Expression operator*(const Expression& a, const Expression& b);

	Expression& operator+=(const Expression& b) { return *this = *this + b; }
	Expression& operator-=(const Expression& b) { return *this = *this - b; }
	Expression& operator*=(const Expression& b) { return *this = *this * b; }

	bool operator==(const Expression& b) const;
	bool operator!=(const Expression& b) const { return !(*this == b); }

	/* Canonicalization entry point: merges, sorts and prunes an arbitrary
	 * term list.  Idempotent; all constructors funnel through it. */
	static Expression normalize(std::vector<Term> terms);

private:
	std::vector<Term> terms_;
};

/* d/d(y^field_alpha), treating all other atoms as independent. */
Expression partial_jet(const Expression& e, int field, const MultiIndex& alpha);

/* Explicit base-coordinate derivative: acts on Base and Formal atoms only
 * (jet and Param atoms are independent fiber data). */
Expression partial_base(const Expression& e, int dir);

/* Generic derivation d/d(atom) for Jet and Param atoms. */
Expression partial_atom(const Expression& e, const Atom& a);

/* Simultaneous substitution; keys must be Param or Jet atoms.  Negative
 * powers of a replaced atom require the replacement to be a nonzero monomial. */
using SubstitutionMap = std::map<Atom, Expression, AtomLess>;
Expression substitute(const Expression& e, const SubstitutionMap& bindings);

/* Exact division by a one-term expression. */
Expression divide_by_monomial(const Expression& e, const Expression& divisor);

/* Numeric evaluation; every atom present must be assigned (Formal atoms are
 * not evaluable and throw). */
using NumericAssignment = std::map<Atom, double, AtomLess>;
double eval_numeric(const Expression& e, const NumericAssignment& values);

} // namespace jetvar
