#include "jetvar/jet_ops.hpp"

#include <stdexcept>

namespace jetvar {

Expression total_derivative(const Expression& e, int dir, const BundleSpec& spec)
{
	if (dir < 0 || dir >= spec.n())
		throw std::invalid_argument("total_derivative: direction out of range");
	std::vector<Term> out;
	for (const Term& t : e.terms())
	{
		for (size_t k = 0; k < t.mono.size(); ++k)
		{
			const Atom& a = t.mono[k].atom;
			Expression da;
			switch (a.kind)
			{
			case AtomKind::Base:
				if (a.index == dir)
					da = Expression::integer(1);
				break;
			case AtomKind::Jet:
				if (a.deriv.order() + 1 > spec.max_order)
					throw EngineError(ErrorKind::OrderOverflow,
					                  "total derivative exceeds jet-order cap " +
					                      std::to_string(spec.max_order));
				da = Expression::jet(a.index, a.deriv.plus(dir));
				break;
			case AtomKind::Param:
				break;
			case AtomKind::Formal:
				da = Expression::formal(a.name, a.deriv.plus(dir));
				break;
			}
			if (da.is_zero())
				continue;
			Monomial rest;
			for (size_t j = 0; j < t.mono.size(); ++j)
			{
				if (j == k)
				{
					if (t.mono[k].exp != 1)
						rest.push_back(PoweredAtom{a, t.mono[k].exp - 1});
				}
				else
					rest.push_back(t.mono[j]);
			}
			Expression piece =
			    Expression::normalize({Term{t.coeff * make_rational(t.mono[k].exp), std::move(rest)}}) * da;
			for (const Term& u : piece.terms())
				out.push_back(u);
		}
	}
	return Expression::normalize(std::move(out));
}

Expression total_derivative(const Expression& e, const MultiIndex& alpha, const BundleSpec& spec)
{
	Expression out = e;
	for (int s = 0; s < alpha.dim(); ++s)
		for (int c = 0; c < alpha[s]; ++c)
			out = total_derivative(out, s, spec);
	return out;
}

void ProjectableVectorField::validate(const BundleSpec& spec) const
{
	if ((int)base.size() != spec.n() || (int)fiber.size() != spec.m())
		throw std::invalid_argument("vector field components do not match the bundle");
	for (const Expression& c : base)
		for (const Atom& a : c.atoms())
			if (a.kind == AtomKind::Jet)
				throw EngineError(ErrorKind::InvalidModel,
				                  "base component of a projectable field must not involve fiber coordinates");
	for (const Expression& c : fiber)
		for (const Atom& a : c.atoms())
			if (a.kind == AtomKind::Jet && a.deriv.order() > 0)
				throw EngineError(ErrorKind::InvalidModel,
				                  "fiber component of a projectable field must be order 0 in jets");
}

const Expression& ProlongedField::at(int field, const MultiIndex& alpha) const
{
	auto hit = comps.find({field, alpha});
	if (hit == comps.end())
		throw std::invalid_argument("prolonged component out of range");
	return hit->second;
}

ProlongedField prolong(const ProjectableVectorField& vf, int s, const BundleSpec& spec)
{
	vf.validate(spec);
	if (s < 0 || s > spec.max_order)
		throw EngineError(ErrorKind::OrderOverflow, "prolongation order outside the admissible range");
	ProlongedField out;
	out.base = vf.base;
	out.order = s;
	for (int i = 0; i < spec.m(); ++i)
	{
		for (const MultiIndex& alpha : multi_indices_up_to(spec.n(), s))
		{
			Expression comp = total_derivative(vf.fiber[i], alpha, spec);
			for (const auto& [beta, gamma] : multi_index_splits(alpha))
			{
				if (beta.is_zero())
					continue;
				Rational w = make_rational(multi_factorial(alpha)) /
				             make_rational(multi_factorial(beta) * multi_factorial(gamma));
				for (int mu = 0; mu < spec.n(); ++mu)
				{
					/* base components carry no jets, so D_beta is partial_base */
					Expression dxi = vf.base[mu];
					for (int d = 0; d < beta.dim(); ++d)
						for (int c = 0; c < beta[d]; ++c)
							dxi = partial_base(dxi, d);
					if (dxi.is_zero())
						continue;
					comp -= dxi.scaled(w) * Expression::jet(i, gamma.plus(mu));
				}
			}
			out.comps.insert({{i, alpha}, std::move(comp)});
		}
	}
	return out;
}

SplitField split_hv(const ProjectableVectorField& vf, int s, const BundleSpec& spec)
{
	vf.validate(spec);
	SplitField out;
	out.horizontal = vf.base;
	out.vertical.base.assign((size_t)spec.n(), Expression());
	out.vertical.order = s;
	for (int i = 0; i < spec.m(); ++i)
	{
		Expression q = vf.fiber[i];
		for (int mu = 0; mu < spec.n(); ++mu)
			q -= Expression::jet(i, MultiIndex::unit(spec.n(), mu)) * vf.base[mu];
		for (const MultiIndex& alpha : multi_indices_up_to(spec.n(), s))
			out.vertical.comps.insert({{i, alpha}, total_derivative(q, alpha, spec)});
	}
	return out;
}

Expression apply(const ProlongedField& pf, const Expression& e)
{
	Expression out;
	for (size_t sigma = 0; sigma < pf.base.size(); ++sigma)
		out += pf.base[sigma] * partial_base(e, (int)sigma);
	for (const auto& [key, comp] : pf.comps)
	{
		if (comp.is_zero())
			continue;
		Expression pd = partial_jet(e, key.first, key.second);
		if (!pd.is_zero())
			out += comp * pd;
	}
	return out;
}

ProjectableVectorField bracket(const ProjectableVectorField& a, const ProjectableVectorField& b,
                               const BundleSpec& spec)
{
	a.validate(spec);
	b.validate(spec);
	auto act = [&](const ProjectableVectorField& v, const Expression& f) {
		/* first-order action on functions of (x, y): xi^s d_s + Xi^j d_j */
		Expression out;
		for (int s = 0; s < spec.n(); ++s)
			out += v.base[s] * partial_base(f, s);
		for (int j = 0; j < spec.m(); ++j)
			out += v.fiber[j] * partial_jet(f, j, MultiIndex::zero(spec.n()));
		return out;
	};
	ProjectableVectorField out;
	for (int s = 0; s < spec.n(); ++s)
		out.base.push_back(act(a, b.base[s]) - act(b, a.base[s]));
	for (int i = 0; i < spec.m(); ++i)
		out.fiber.push_back(act(a, b.fiber[i]) - act(b, a.fiber[i]));
	return out;
}

ScalarDensity formal_divergence(const VectorDensity& v, const BundleSpec& spec)
{
	if (v.n() != spec.n())
		throw std::invalid_argument("vector density does not match the bundle");
	Expression out;
	for (int mu = 0; mu < spec.n(); ++mu)
		out += total_derivative(v.comps[mu], mu, spec);
	return ScalarDensity{std::move(out)};
}

VectorDensity formal_divergence(const SkewDensity2& w, const BundleSpec& spec)
{
	if (w.n() != spec.n())
		throw std::invalid_argument("skew density does not match the bundle");
	VectorDensity out = VectorDensity::zeros(spec.n());
	for (int mu = 0; mu < spec.n(); ++mu)
		for (int nu = 0; nu < spec.n(); ++nu)
			out.comps[mu] += total_derivative(w.at(nu, mu), nu, spec);
	return out;
}

} // namespace jetvar
