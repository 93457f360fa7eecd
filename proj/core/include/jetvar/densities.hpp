#pragma once

#include "jetvar/bundle.hpp"
#include "jetvar/expression.hpp"

#include <utility>

namespace jetvar {

/* Differential forms enter the engine only through their density
 * coefficients in a fixed chart; there is no exterior-algebra layer.
 * ScalarDensity   L dx^1...dx^n
 * VectorDensity   eps^mu (d/dx^mu | dx^1...dx^n)
 * SkewDensity2    nu^{mu nu}, antisymmetric, double contraction
 * CovectorDensity one coefficient per fiber field (source forms) */

struct ScalarDensity {
	Expression value;
};

struct VectorDensity {
	std::vector<Expression> comps; // size n

	static VectorDensity zeros(int n) { return VectorDensity{std::vector<Expression>((size_t)n)}; }
	int n() const { return (int)comps.size(); }
};

class SkewDensity2 {
public:
	explicit SkewDensity2(int n) : n_(n), entries_((size_t)n * n) {}

	int n() const { return n_; }

	const Expression& at(int mu, int nu) const { return entries_[(size_t)(mu * n_ + nu)]; }

	/* Stores antisymmetrically: set(mu,nu,e) also records -e at (nu,mu). */
	void set(int mu, int nu, Expression e)
	{
		if (mu == nu)
		{
			if (!e.is_zero())
				throw EngineError(ErrorKind::InvalidModel, "diagonal entry of a skew density must vanish");
			return;
		}
		entries_[(size_t)(nu * n_ + mu)] = -e;
		entries_[(size_t)(mu * n_ + nu)] = std::move(e);
	}

	void add(int mu, int nu, const Expression& e)
	{
		if (mu == nu)
			return void(set(mu, nu, at(mu, nu) + e));
		set(mu, nu, at(mu, nu) + e);
	}

	bool is_antisymmetric() const
	{
		for (int mu = 0; mu < n_; ++mu)
			for (int nu = 0; nu <= mu; ++nu)
				if (!(at(mu, nu) + at(nu, mu)).is_zero())
					return false;
		return true;
	}

private:
	int n_;
	std::vector<Expression> entries_;
};

struct CovectorDensity {
	std::vector<Expression> comps; // one per fiber field in scope

	static CovectorDensity zeros(int m) { return CovectorDensity{std::vector<Expression>((size_t)m)}; }
	int size() const { return (int)comps.size(); }
};

} // namespace jetvar
