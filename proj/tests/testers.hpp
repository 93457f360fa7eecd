#pragma once

/* Shared test machinery: deterministic random generators for expressions,
 * Lagrangians and vector fields, plus an independent brute-force polynomial
 * oracle (string-keyed dense maps, no reuse of the kernel's normal form). */

#include "jetvar/bundle.hpp"
#include "jetvar/expression.hpp"
#include "jetvar/jet_ops.hpp"

#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace jvtest {

using namespace jetvar;

struct Rng {
	std::mt19937_64 gen;

	explicit Rng(unsigned long seed) : gen(seed) {}

	int pick(int lo, int hi) // inclusive
	{
		return (int)std::uniform_int_distribution<long>(lo, hi)(gen);
	}

	Rational coeff()
	{
		int num = pick(-6, 6);
		if (num == 0)
			num = 1;
		return make_rational(num, pick(1, 4));
	}

	MultiIndex multi(int dim, int max_order)
	{
		MultiIndex a(dim);
		int q = pick(0, max_order);
		for (int i = 0; i < q; ++i)
			a = a.plus(pick(0, dim - 1));
		return a;
	}
};

/* Random polynomial in the atoms of `pool`: up to max_terms products of up to
 * three pool atoms with small positive powers. */
inline Expression random_poly(Rng& rng, const std::vector<Atom>& pool, int max_terms)
{
	Expression e;
	int terms = rng.pick(1, max_terms);
	for (int t = 0; t < terms; ++t)
	{
		Expression mono = Expression::constant(rng.coeff());
		int factors = rng.pick(0, 3);
		for (int f = 0; f < factors; ++f)
			mono *= Expression::atom(pool[(size_t)rng.pick(0, (int)pool.size() - 1)]).pow(rng.pick(1, 2));
		e += mono;
	}
	return e;
}

inline std::vector<Atom> jet_pool(const BundleSpec& spec, int max_order, bool with_base = true)
{
	std::vector<Atom> pool;
	if (with_base)
		for (int s = 0; s < spec.n(); ++s)
			pool.push_back(Atom::base(s));
	for (int i = 0; i < spec.m(); ++i)
		for (const MultiIndex& a : multi_indices_up_to(spec.n(), max_order))
			pool.push_back(Atom::jet(i, a));
	return pool;
}

inline ScalarDensity random_lagrangian(Rng& rng, const BundleSpec& spec, int max_order, int max_terms)
{
	return ScalarDensity{random_poly(rng, jet_pool(spec, max_order), max_terms)};
}

inline ProjectableVectorField random_projectable(Rng& rng, const BundleSpec& spec)
{
	std::vector<Atom> base_pool;
	for (int s = 0; s < spec.n(); ++s)
		base_pool.push_back(Atom::base(s));
	std::vector<Atom> fiber_pool = base_pool;
	for (int i = 0; i < spec.m(); ++i)
		fiber_pool.push_back(Atom::jet(i, MultiIndex::zero(spec.n())));
	ProjectableVectorField vf;
	for (int s = 0; s < spec.n(); ++s)
		vf.base.push_back(random_poly(rng, base_pool, 2));
	for (int i = 0; i < spec.m(); ++i)
		vf.fiber.push_back(random_poly(rng, fiber_pool, 2));
	return vf;
}

/* ----- independent oracle: dense map-based polynomial arithmetic ----- */

using NaiveKey = std::map<std::string, int>; // atom tag -> exponent
using NaivePoly = std::map<NaiveKey, Rational>;

inline std::string atom_tag(const Atom& a)
{
	std::ostringstream os;
	os << (int)a.kind << ':' << a.index << ':' << a.name << ':';
	for (int s = 0; s < a.deriv.dim(); ++s)
		os << a.deriv[s] << ',';
	return os.str();
}

inline NaivePoly naive_add(const NaivePoly& x, const NaivePoly& y)
{
	NaivePoly r = x;
	for (const auto& [k, c] : y)
	{
		r[k] += c;
		if (r[k] == 0)
			r.erase(k);
	}
	return r;
}

inline NaivePoly naive_mul(const NaivePoly& x, const NaivePoly& y)
{
	NaivePoly r;
	for (const auto& [ka, ca] : x)
		for (const auto& [kb, cb] : y)
		{
			NaiveKey k = ka;
			for (const auto& [tag, e] : kb)
			{
				k[tag] += e;
				if (k[tag] == 0)
					k.erase(tag);
			}
			r[k] += ca * cb;
			if (r[k] == 0)
				r.erase(k);
		}
	return r;
}

inline NaivePoly naive_pow(const NaivePoly& x, int e)
{
	NaivePoly r{{NaiveKey{}, make_rational(1)}};
	for (int i = 0; i < e; ++i)
		r = naive_mul(r, x);
	return r;
}

inline NaivePoly to_naive(const Expression& e)
{
	NaivePoly r;
	for (const Term& t : e.terms())
	{
		NaiveKey k;
		for (const PoweredAtom& p : t.mono)
			k[atom_tag(p.atom)] += p.exp;
		r[k] += t.coeff;
		if (r[k] == 0)
			r.erase(k);
	}
	return r;
}

inline bool naive_equal(const NaivePoly& x, const NaivePoly& y)
{
	return naive_add(x, NaivePoly()) == naive_add(y, NaivePoly()) && x == y;
}

} // namespace jvtest
