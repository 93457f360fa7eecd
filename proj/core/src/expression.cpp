#include "jetvar/expression.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jetvar {

Rational rational_from_string(const std::string& text)
{
	Rational q;
	if (q.set_str(text, 10) != 0)
		throw std::invalid_argument("malformed rational: " + text);
	if (q.get_den() == 0)
		throw std::invalid_argument("zero denominator: " + text);
	q.canonicalize();
	return q;
}

/* Monomial order: total degree first (higher degree sorts first), ties broken
 * lexicographically over the powered-atom sequence.  Total, so canonical
 * forms are unique. */
int monomial_cmp(const Monomial& a, const Monomial& b)
{
	long da = 0, db = 0;
	for (const auto& p : a)
		da += p.exp;
	for (const auto& p : b)
		db += p.exp;
	if (da != db)
		return da > db ? -1 : 1;
	size_t k = std::min(a.size(), b.size());
	for (size_t i = 0; i < k; ++i)
	{
		if (int c = atom_cmp(a[i].atom, b[i].atom); c != 0)
			return c;
		if (a[i].exp != b[i].exp)
			return a[i].exp > b[i].exp ? -1 : 1;
	}
	if (a.size() != b.size())
		return a.size() < b.size() ? -1 : 1;
	return 0;
}

static Monomial canonical_monomial(Monomial m)
{
	std::sort(m.begin(), m.end(),
	          [](const PoweredAtom& x, const PoweredAtom& y) { return atom_cmp(x.atom, y.atom) < 0; });
	Monomial out;
	for (auto& p : m)
	{
		if (!out.empty() && atom_cmp(out.back().atom, p.atom) == 0)
			out.back().exp += p.exp;
		else
			out.push_back(std::move(p));
	}
	out.erase(std::remove_if(out.begin(), out.end(), [](const PoweredAtom& p) { return p.exp == 0; }),
	          out.end());
	return out;
}

Expression Expression::normalize(std::vector<Term> terms)
{
	for (Term& t : terms)
		t.mono = canonical_monomial(std::move(t.mono));
	std::sort(terms.begin(), terms.end(),
	          [](const Term& a, const Term& b) { return monomial_cmp(a.mono, b.mono) < 0; });
	Expression e;
	for (Term& t : terms)
	{
		if (t.coeff == 0)
			continue;
		if (!e.terms_.empty() && monomial_cmp(e.terms_.back().mono, t.mono) == 0)
		{
			e.terms_.back().coeff += t.coeff;
			if (e.terms_.back().coeff == 0)
				e.terms_.pop_back();
		}
		else
			e.terms_.push_back(std::move(t));
	}
	return e;
}

Expression Expression::constant(Rational q)
{
	Expression e;
	if (q != 0)
		e.terms_.push_back(Term{std::move(q), {}});
	return e;
}

Expression Expression::atom(Atom a)
{
	Expression e;
	e.terms_.push_back(Term{make_rational(1), Monomial{PoweredAtom{std::move(a), 1}}});
	return e;
}

int Expression::max_jet_order() const
{
	int q = 0;
	for (const Term& t : terms_)
		for (const PoweredAtom& p : t.mono)
			if (p.atom.kind == AtomKind::Jet)
				q = std::max(q, p.atom.deriv.order());
	return q;
}

int Expression::max_jet_order(int field_begin, int field_end) const
{
	int q = 0;
	for (const Term& t : terms_)
		for (const PoweredAtom& p : t.mono)
			if (p.atom.kind == AtomKind::Jet && p.atom.index >= field_begin && p.atom.index < field_end)
				q = std::max(q, p.atom.deriv.order());
	return q;
}

bool Expression::depends_on(const Atom& a) const
{
	for (const Term& t : terms_)
		for (const PoweredAtom& p : t.mono)
			if (atom_cmp(p.atom, a) == 0)
				return true;
	return false;
}

std::vector<Atom> Expression::jet_atoms() const
{
	std::vector<Atom> out;
	for (const Term& t : terms_)
		for (const PoweredAtom& p : t.mono)
			if (p.atom.kind == AtomKind::Jet)
				out.push_back(p.atom);
	std::sort(out.begin(), out.end(), AtomLess{});
	out.erase(std::unique(out.begin(), out.end()), out.end());
	return out;
}

std::vector<Atom> Expression::atoms() const
{
	std::vector<Atom> out;
	for (const Term& t : terms_)
		for (const PoweredAtom& p : t.mono)
			out.push_back(p.atom);
	std::sort(out.begin(), out.end(), AtomLess{});
	out.erase(std::unique(out.begin(), out.end()), out.end());
	return out;
}

std::optional<Rational> Expression::as_constant() const
{
	if (terms_.empty())
		return make_rational(0);
	if (terms_.size() == 1 && terms_[0].mono.empty())
		return terms_[0].coeff;
	return std::nullopt;
}

Expression Expression::operator-() const { return scaled(make_rational(-1)); }

Expression Expression::scaled(const Rational& q) const
{
	if (q == 0)
		return Expression();
	Expression e = *this;
	for (Term& t : e.terms_)
		t.coeff *= q;
	return e;
}

Expression operator+(const Expression& a, const Expression& b)
{
	/* Merge of two canonical term lists stays canonical. */
	std::vector<Term> out;
	out.reserve(a.terms_.size() + b.terms_.size());
	size_t i = 0, j = 0;
	while (i < a.terms_.size() && j < b.terms_.size())
	{
		int c = monomial_cmp(a.terms_[i].mono, b.terms_[j].mono);
		if (c < 0)
			out.push_back(a.terms_[i++]);
		else if (c > 0)
			out.push_back(b.terms_[j++]);
		else
		{
			Term t = a.terms_[i++];
			t.coeff += b.terms_[j++].coeff;
			if (t.coeff != 0)
				out.push_back(std::move(t));
		}
	}
	out.insert(out.end(), a.terms_.begin() + i, a.terms_.end());
	out.insert(out.end(), b.terms_.begin() + j, b.terms_.end());
	Expression e;
	e.terms_ = std::move(out);
	return e;
}

Expression operator-(const Expression& a, const Expression& b) { return a + (-b); }

Expression operator*(const Expression& a, const Expression& b)
{
	std::vector<Term> out;
	out.reserve(a.terms_.size() * b.terms_.size());
	for (const Term& s : a.terms_)
		for (const Term& t : b.terms_)
		{
			Monomial m = s.mono;
			m.insert(m.end(), t.mono.begin(), t.mono.end());
			out.push_back(Term{s.coeff * t.coeff, std::move(m)});
		}
	return Expression::normalize(std::move(out));
}

Expression Expression::pow(int e) const
{
	if (e == 0)
		return integer(1);
	if (e < 0)
	{
		if (terms_.size() != 1)
			throw std::invalid_argument("negative power of a non-monomial expression");
		Term inv;
		inv.coeff = 1 / terms_[0].coeff;
		for (const PoweredAtom& p : terms_[0].mono)
			inv.mono.push_back(PoweredAtom{p.atom, -p.exp});
		Expression base;
		base.terms_.push_back(std::move(inv));
		return base.pow(-e);
	}
	Expression r = integer(1);
	Expression base = *this;
	for (int k = e; k > 0; k >>= 1)
	{
		if (k & 1)
			r *= base;
		if (k > 1)
			base *= base;
	}
	return r;
}

bool Expression::operator==(const Expression& b) const
{
	if (terms_.size() != b.terms_.size())
		return false;
	for (size_t i = 0; i < terms_.size(); ++i)
	{
		if (terms_[i].coeff != b.terms_[i].coeff)
			return false;
		if (!(terms_[i].mono == b.terms_[i].mono))
			return false;
	}
	return true;
}

/* Shared derivation core: derivative of a term with respect to one atom slot,
 * by the power rule.  replacement(atom) gives d(atom) as an expression. */
template <typename Fn>
static Expression derive_terms(const Expression& e, Fn&& datom)
{
	std::vector<Term> out;
	for (const Term& t : e.terms())
	{
		for (size_t k = 0; k < t.mono.size(); ++k)
		{
			Expression da = datom(t.mono[k].atom);
			if (da.is_zero())
				continue;
			Term rest;
			rest.coeff = t.coeff * make_rational(t.mono[k].exp);
			for (size_t j = 0; j < t.mono.size(); ++j)
			{
				if (j == k)
				{
					if (t.mono[k].exp != 1)
						rest.mono.push_back(PoweredAtom{t.mono[k].atom, t.mono[k].exp - 1});
				}
				else
					rest.mono.push_back(t.mono[j]);
			}
			Expression piece = Expression::normalize({std::move(rest)}) * da;
			for (const Term& u : piece.terms())
				out.push_back(u);
		}
	}
	return Expression::normalize(std::move(out));
}

Expression partial_jet(const Expression& e, int field, const MultiIndex& alpha)
{
	Atom target = Atom::jet(field, alpha);
	return derive_terms(e, [&](const Atom& a) {
		return atom_cmp(a, target) == 0 ? Expression::integer(1) : Expression();
	});
}

Expression partial_base(const Expression& e, int dir)
{
	return derive_terms(e, [&](const Atom& a) -> Expression {
		switch (a.kind)
		{
		case AtomKind::Base:
			return a.index == dir ? Expression::integer(1) : Expression();
		case AtomKind::Formal:
			return Expression::atom(Atom::formal(a.name, a.deriv.plus(dir)));
		default:
			return Expression();
		}
	});
}

Expression partial_atom(const Expression& e, const Atom& target)
{
	if (target.kind != AtomKind::Jet && target.kind != AtomKind::Param)
		throw std::invalid_argument("partial_atom expects a Jet or Param atom");
	return derive_terms(e, [&](const Atom& a) {
		return atom_cmp(a, target) == 0 ? Expression::integer(1) : Expression();
	});
}

Expression substitute(const Expression& e, const SubstitutionMap& bindings)
{
	for (const auto& [key, value] : bindings)
	{
		(void)value;
		if (key.kind != AtomKind::Param && key.kind != AtomKind::Jet)
			throw std::invalid_argument("substitute keys must be Param or Jet atoms");
	}
	Expression out;
	for (const Term& t : e.terms())
	{
		Expression factor = Expression::constant(t.coeff);
		for (const PoweredAtom& p : t.mono)
		{
			auto hit = bindings.find(p.atom);
			if (hit == bindings.end())
			{
				Expression a;
				a = Expression::atom(p.atom);
				factor *= a.pow(p.exp);
			}
			else
				factor *= hit->second.pow(p.exp);
		}
		out += factor;
	}
	return out;
}

Expression divide_by_monomial(const Expression& e, const Expression& divisor)
{
	return e * divisor.pow(-1);
}

double eval_numeric(const Expression& e, const NumericAssignment& values)
{
	double acc = 0;
	for (const Term& t : e.terms())
	{
		double prod = rational_to_double(t.coeff);
		for (const PoweredAtom& p : t.mono)
		{
			if (p.atom.kind == AtomKind::Formal)
				throw std::invalid_argument("cannot numerically evaluate a Formal atom");
			auto hit = values.find(p.atom);
			if (hit == values.end())
				throw std::invalid_argument("numeric assignment missing an atom");
			prod *= std::pow(hit->second, p.exp);
		}
		acc += prod;
	}
	return acc;
}

} // namespace jetvar
