#include "jetvar/variational.hpp"

#include <algorithm>
#include <set>

namespace jetvar {

/* Distinct derivative records of one field's jet atoms in e. */
static std::vector<MultiIndex> jet_derivs_of_field(const Expression& e, int field)
{
	std::vector<MultiIndex> out;
	for (const Atom& a : e.jet_atoms())
		if (a.index == field)
			out.push_back(a.deriv);
	return out;
}

Expression interior_euler(const Expression& e, int field, const MultiIndex& mu, const BundleSpec& spec)
{
	Expression out;
	for (const MultiIndex& delta : jet_derivs_of_field(e, field))
	{
		if (!delta.contains(mu))
			continue;
		MultiIndex alpha = delta.minus(mu);
		Expression pd = partial_jet(e, field, delta);
		if (pd.is_zero())
			continue;
		Rational w = make_rational(multi_binomial(mu, alpha));
		if (alpha.order() % 2 != 0)
			w = -w;
		out += total_derivative(pd, alpha, spec).scaled(w);
	}
	return out;
}

Expression euler_lagrange_component(const Expression& e, int field, const BundleSpec& spec)
{
	return interior_euler(e, field, MultiIndex::zero(spec.n()), spec);
}

EulerLagrangeResult euler_lagrange(const ScalarDensity& L, const BundleSpec& spec)
{
	EulerLagrangeResult r;
	r.source = CovectorDensity::zeros(spec.m());
	for (int i = 0; i < spec.m(); ++i)
	{
		r.source.comps[i] = euler_lagrange_component(L.value, i, spec);
		r.order = std::max(r.order, r.source.comps[i].max_jet_order());
	}
	return r;
}

/* All nonzero sub-multi-indices of the derivative records of `field`'s jet
 * atoms in e: exactly the nu with a chance of I^nu_field(e) != 0. */
static std::vector<MultiIndex> momentum_levels(const Expression& e, int field)
{
	std::set<std::vector<int>> seen;
	for (const MultiIndex& delta : jet_derivs_of_field(e, field))
		for (const auto& [nu, rest] : multi_index_splits(delta))
		{
			(void)rest;
			if (nu.order() >= 1)
				seen.insert(nu.counts());
		}
	std::vector<MultiIndex> out;
	for (const auto& c : seen)
		out.emplace_back(c);
	std::sort(out.begin(), out.end(), MultiIndexLess{});
	return out;
}

MomentumTable canonical_momentum(const ScalarDensity& L, const BundleSpec& spec)
{
	MomentumTable p;
	for (int f = 0; f < spec.m(); ++f)
	{
		for (const MultiIndex& nu : momentum_levels(L.value, f))
		{
			Expression lvl = interior_euler(L.value, f, nu, spec);
			if (lvl.is_zero())
				continue;
			for (int mu = 0; mu < spec.n(); ++mu)
			{
				if (nu[mu] < 1)
					continue;
				Rational share = make_rational(nu[mu], nu.order());
				MultiIndex rest = nu.minus(mu);
				for (const auto& [beta, gamma] : multi_index_splits(rest))
				{
					Rational w = share * make_rational(multi_choose(rest, beta));
					Expression contrib = total_derivative(lvl, gamma, spec).scaled(w);
					if (contrib.is_zero())
						continue;
					auto key = std::make_tuple(mu, f, beta);
					auto [it, fresh] = p.entries.try_emplace(key, contrib);
					if (!fresh)
						it->second += contrib;
				}
			}
		}
	}
	return p;
}

VectorDensity boundary_current(const MomentumTable& p, const std::vector<Expression>& u,
                               const BundleSpec& spec)
{
	VectorDensity out = VectorDensity::zeros(spec.n());
	for (const auto& [key, mom] : p.entries)
	{
		auto [mu, f, beta] = key;
		if (f >= (int)u.size())
			throw std::invalid_argument("boundary_current: missing component");
		Expression du = total_derivative(u[f], beta, spec);
		if (!du.is_zero())
			out.comps[mu] += du * mom;
	}
	return out;
}

Expression lie_derivative_density(const ScalarDensity& L, const ProjectableVectorField& vf,
                                  const BundleSpec& spec)
{
	int s = L.value.max_jet_order();
	Expression out = apply(prolong(vf, s, spec), L.value);
	for (int sigma = 0; sigma < spec.n(); ++sigma)
		out += L.value * partial_base(vf.base[sigma], sigma);
	return out;
}

Expression first_variation_residual(const ScalarDensity& L, const ProjectableVectorField& vf,
                                    const BundleSpec& spec)
{
	vf.validate(spec);
	/* characteristic Q^i = Xi^i - y^i_sigma xi^sigma */
	std::vector<Expression> q;
	for (int i = 0; i < spec.m(); ++i)
	{
		Expression c = vf.fiber[i];
		for (int sigma = 0; sigma < spec.n(); ++sigma)
			c -= Expression::jet(i, MultiIndex::unit(spec.n(), sigma)) * vf.base[sigma];
		q.push_back(std::move(c));
	}
	EulerLagrangeResult el = euler_lagrange(L, spec);
	VectorDensity bd = boundary_current(canonical_momentum(L, spec), q, spec);
	for (int mu = 0; mu < spec.n(); ++mu)
		bd.comps[mu] += vf.base[mu] * L.value;
	Expression rhs = formal_divergence(bd, spec).value;
	for (int i = 0; i < spec.m(); ++i)
		rhs += q[i] * el.source.comps[i];
	return lie_derivative_density(L, vf, spec) - rhs;
}

JacobiOperator linearization(const CovectorDensity& E, const BundleSpec& spec)
{
	JacobiOperator J;
	J.rows = E.size();
	J.cols = spec.m();
	for (int i = 0; i < J.rows; ++i)
		for (const Atom& a : E.comps[i].jet_atoms())
		{
			Expression pd = partial_jet(E.comps[i], a.index, a.deriv);
			if (!pd.is_zero())
				J.entries.insert({{i, a.index, a.deriv}, std::move(pd)});
		}
	return J;
}

JacobiOperator jacobi_operator(const ScalarDensity& L, const BundleSpec& spec)
{
	return linearization(euler_lagrange(L, spec).source, spec);
}

std::vector<Expression> apply_jacobi(const JacobiOperator& J, const std::vector<Expression>& u,
                                     const BundleSpec& spec)
{
	if ((int)u.size() < J.cols)
		throw std::invalid_argument("apply_jacobi: missing components");
	std::vector<Expression> out((size_t)J.rows);
	for (const auto& [key, coeff] : J.entries)
	{
		auto [i, j, alpha] = key;
		Expression du = total_derivative(u[j], alpha, spec);
		if (!du.is_zero())
			out[i] += coeff * du;
	}
	return out;
}

JacobiOperator formal_adjoint(const JacobiOperator& J, const BundleSpec& spec)
{
	JacobiOperator K;
	K.rows = J.cols;
	K.cols = J.rows;
	for (const auto& [key, coeff] : J.entries)
	{
		auto [j, i, alpha] = key;
		for (const auto& [beta, gamma] : multi_index_splits(alpha))
		{
			Rational w = make_rational(multi_choose(alpha, beta));
			if (alpha.order() % 2 != 0)
				w = -w;
			Expression contrib = total_derivative(coeff, gamma, spec).scaled(w);
			if (contrib.is_zero())
				continue;
			auto k = std::make_tuple(i, j, beta);
			auto [it, fresh] = K.entries.try_emplace(k, contrib);
			if (!fresh)
				it->second += contrib;
		}
	}
	return K;
}

static IndexedTable table_difference(const IndexedTable& a, const IndexedTable& b)
{
	IndexedTable out = a;
	for (const auto& [k, e] : b)
	{
		auto [it, fresh] = out.try_emplace(k, -e);
		if (!fresh)
			it->second -= e;
	}
	for (auto it = out.begin(); it != out.end();)
		it = it->second.is_zero() ? out.erase(it) : std::next(it);
	return out;
}

JacobiOperator self_adjointness_residual(const ScalarDensity& L, const BundleSpec& spec)
{
	JacobiOperator J = jacobi_operator(L, spec);
	JacobiOperator R;
	R.rows = J.rows;
	R.cols = J.cols;
	R.entries = table_difference(J.entries, formal_adjoint(J, spec).entries);
	return R;
}

HelmholtzTensor helmholtz(const CovectorDensity& E, const BundleSpec& spec)
{
	JacobiOperator J = linearization(E, spec);
	HelmholtzTensor H;
	H.entries = table_difference(J.entries, formal_adjoint(J, spec).entries);
	return H;
}

bool is_locally_variational(const CovectorDensity& E, const BundleSpec& spec)
{
	return helmholtz(E, spec).all_zero();
}

std::vector<Expression> jacobi_commutation_residual(const ScalarDensity& L, const BundleSpec& spec)
{
	int m = spec.m();
	std::vector<std::string> unames;
	for (int i = 0; i < m; ++i)
		unames.push_back("u$" + std::to_string(i));
	BundleSpec ext = spec.with_fields_appended(unames);

	EulerLagrangeResult el = euler_lagrange(L, spec);
	Expression contraction;
	std::vector<Expression> u;
	for (int i = 0; i < m; ++i)
	{
		u.push_back(Expression::jet(m + i, MultiIndex::zero(spec.n())));
		contraction += u.back() * el.source.comps[i];
	}
	std::vector<Expression> jac = apply_jacobi(jacobi_operator(L, spec), u, ext);
	std::vector<Expression> out;
	for (int j = 0; j < m; ++j)
		out.push_back(euler_lagrange_component(contraction, j, ext) - jac[j]);
	return out;
}

VariationSplit variation_split(const Expression& w, const BundleSpec& spec, int field_begin,
                               int field_end)
{
	/* linearity guard: every term carries exactly one range-field jet atom,
	 * to the first power */
	for (const Term& t : w.terms())
	{
		int hits = 0;
		for (const PoweredAtom& p : t.mono)
			if (p.atom.kind == AtomKind::Jet && p.atom.index >= field_begin && p.atom.index < field_end)
				hits += p.exp;
		if (hits != 1)
			throw EngineError(ErrorKind::InvalidModel,
			                  "variation_split expects a density linear in the designated field jets");
	}

	VariationSplit out;
	out.boundary = VectorDensity::zeros(spec.n());
	for (int f = field_begin; f < field_end; ++f)
	{
		out.euler.push_back(interior_euler(w, f, MultiIndex::zero(spec.n()), spec));
		Expression p0 = Expression::jet(f, MultiIndex::zero(spec.n()));
		for (const MultiIndex& nu : momentum_levels(w, f))
		{
			Expression lvl = interior_euler(w, f, nu, spec);
			if (lvl.is_zero())
				continue;
			for (int mu = 0; mu < spec.n(); ++mu)
			{
				if (nu[mu] < 1)
					continue;
				Rational share = make_rational(nu[mu], nu.order());
				out.boundary.comps[mu] +=
				    total_derivative(p0 * lvl, nu.minus(mu), spec).scaled(share);
			}
		}
	}
	return out;
}

} // namespace jetvar
