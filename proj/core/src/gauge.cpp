#include "jetvar/gauge.hpp"

#include <algorithm>
#include <set>

namespace jetvar {

void GaugeModel::validate(const BundleSpec& spec) const
{
	if (r < 0 || k < 1 || r > k)
		throw EngineError(ErrorKind::InvalidModel, "lift caps must satisfy 0 <= r <= k with k >= 1");
	if (!xi_names.empty() && (int)xi_names.size() != spec.n())
		throw EngineError(ErrorKind::InvalidModel,
		                  "base-sector parameter needs one component per base direction");
	std::vector<std::string> names = spec.base;
	names.insert(names.end(), spec.fields.begin(), spec.fields.end());
	names.insert(names.end(), xi_names.begin(), xi_names.end());
	names.insert(names.end(), eps_names.begin(), eps_names.end());
	for (size_t i = 0; i < names.size(); ++i)
		for (size_t j = i + 1; j < names.size(); ++j)
			if (names[i] == names[j])
				throw EngineError(ErrorKind::InvalidModel, "parameter name collision: " + names[i]);
}

Expression GaugeContext::xi(int mu) const
{
	if (xi0 < 0)
		return Expression();
	return Expression::jet(xi_field(mu), MultiIndex::zero(spec.n()));
}

GaugeContext make_gauge_context(const BundleSpec& spec, const GaugeModel& model)
{
	spec.validate();
	model.validate(spec);
	GaugeContext ctx;
	ctx.spec = spec;
	ctx.model = model;
	ctx.m = spec.m();
	std::vector<std::string> extra = model.xi_names;
	extra.insert(extra.end(), model.eps_names.begin(), model.eps_names.end());
	ctx.ext = spec.with_fields_appended(extra);
	if (model.has_base_sector())
		ctx.xi0 = ctx.m;
	if (model.gauge_count() > 0)
		ctx.eps0 = ctx.m + (int)model.xi_names.size();
	return ctx;
}

LiftSpec decompose_lift(const GaugeContext& ctx, const std::vector<Expression>& fiber)
{
	if ((int)fiber.size() != ctx.m)
		throw std::invalid_argument("decompose_lift: one component per dynamical field expected");
	LiftSpec out;
	for (int i = 0; i < ctx.m; ++i)
	{
		const std::string where = "lift component for " + ctx.spec.fields[i];
		for (const Term& t : fiber[i].terms())
		{
			int pslot = -1;
			for (size_t s = 0; s < t.mono.size(); ++s)
			{
				const PoweredAtom& p = t.mono[s];
				if (p.atom.kind != AtomKind::Jet || p.atom.index < ctx.m)
					continue;
				if (pslot >= 0 || p.exp != 1)
					throw EngineError(ErrorKind::MalformedLift, where + ": nonlinear in the parameter jets");
				pslot = (int)s;
			}
			if (pslot < 0)
				throw EngineError(ErrorKind::MalformedLift, where + ": term without a parameter factor");
			Term c;
			c.coeff = t.coeff;
			for (size_t s = 0; s < t.mono.size(); ++s)
			{
				if ((int)s == pslot)
					continue;
				const PoweredAtom& p = t.mono[s];
				if (p.atom.kind == AtomKind::Jet && p.atom.deriv.order() > 0)
					throw EngineError(ErrorKind::MalformedLift,
					                  where + ": coefficient leaves the fiber (positive-order jet)");
				c.mono.push_back(p);
			}
			Expression coeff = Expression::normalize({c});
			const Atom& pa = t.mono[(size_t)pslot].atom;
			if (ctx.eps0 >= 0 && pa.index >= ctx.eps0)
			{
				if (pa.deriv.order() > ctx.model.r)
					throw EngineError(ErrorKind::MalformedLift, where + ": gauge-sector jet beyond cap r");
				auto key = std::make_tuple(i, pa.index - ctx.eps0, pa.deriv);
				auto [it, fresh] = out.eps_coeff.try_emplace(key, coeff);
				if (!fresh)
					it->second += coeff;
			}
			else
			{
				if (pa.deriv.order() < 1)
					throw EngineError(ErrorKind::MalformedLift,
					                  where + ": base parameter must appear differentiated");
				if (pa.deriv.order() > ctx.model.k)
					throw EngineError(ErrorKind::MalformedLift, where + ": base-sector jet beyond cap k");
				auto key = std::make_tuple(i, pa.index - ctx.xi0, pa.deriv);
				auto [it, fresh] = out.xi_coeff.try_emplace(key, coeff);
				if (!fresh)
					it->second += coeff;
			}
		}
	}
	return out;
}

std::vector<Expression> lift_components(const GaugeContext& ctx, const LiftSpec& lift)
{
	std::vector<Expression> out((size_t)ctx.m);
	for (const auto& [key, z] : lift.eps_coeff)
	{
		auto [i, a, nu] = key;
		out[i] += z * Expression::jet(ctx.eps_field(a), nu);
	}
	for (const auto& [key, z] : lift.xi_coeff)
	{
		auto [i, mu, lam] = key;
		out[i] += z * Expression::jet(ctx.xi_field(mu), lam);
	}
	return out;
}

std::vector<Expression> lie_derivative_section(const GaugeContext& ctx, const LiftSpec& lift)
{
	std::vector<Expression> out = lift_components(ctx, lift);
	for (int i = 0; i < ctx.m; ++i)
	{
		Expression transport;
		for (int sigma = 0; sigma < ctx.spec.n(); ++sigma)
			transport += Expression::jet(i, MultiIndex::unit(ctx.spec.n(), sigma)) * ctx.xi(sigma);
		out[i] = transport - out[i];
	}
	return out;
}

/* Concrete parameter components: expressions in base coordinates (and
 * constants / formal functions), never in jets. */
static void check_concrete(const std::vector<Expression>& vals, const char* what)
{
	for (const Expression& e : vals)
		if (!e.jet_atoms().empty())
			throw EngineError(ErrorKind::InvalidModel,
			                  std::string(what) + " components must be functions of the base coordinates");
}

static Expression partial_base_iterated(const Expression& e, const MultiIndex& alpha)
{
	Expression out = e;
	for (int dir = 0; dir < alpha.dim(); ++dir)
		for (int c = 0; c < alpha[dir]; ++c)
			out = partial_base(out, dir);
	return out;
}

ProjectableVectorField instantiate(const GaugeContext& ctx, const LiftSpec& lift,
                                   const std::vector<Expression>& xi_vals,
                                   const std::vector<Expression>& eps_vals)
{
	const int n = ctx.spec.n();
	if ((int)xi_vals.size() != n || (int)eps_vals.size() != ctx.model.gauge_count())
		throw std::invalid_argument("instantiate: parameter component count mismatch");
	check_concrete(xi_vals, "base parameter");
	check_concrete(eps_vals, "gauge parameter");
	if (!ctx.model.has_base_sector())
		for (const Expression& e : xi_vals)
			if (!e.is_zero())
				throw EngineError(ErrorKind::InvalidModel,
				                  "model has no base sector; xi components must vanish");

	ProjectableVectorField vf;
	vf.base = xi_vals;
	vf.fiber.assign((size_t)ctx.m, Expression());
	for (const auto& [key, z] : lift.eps_coeff)
	{
		auto [i, a, nu] = key;
		vf.fiber[i] += z * partial_base_iterated(eps_vals[(size_t)a], nu);
	}
	for (const auto& [key, z] : lift.xi_coeff)
	{
		auto [i, mu, lam] = key;
		vf.fiber[i] += z * partial_base_iterated(xi_vals[(size_t)mu], lam);
	}
	return vf;
}

std::vector<Expression> lift_bracket_residual(const GaugeContext& ctx, const LiftSpec& lift,
                                              const std::vector<Expression>& xi1,
                                              const std::vector<Expression>& eps1,
                                              const std::vector<Expression>& xi2,
                                              const std::vector<Expression>& eps2)
{
	const int n = ctx.spec.n();
	std::vector<Expression> xib((size_t)n), epsb((size_t)ctx.model.gauge_count());
	for (int mu = 0; mu < n; ++mu)
		for (int s = 0; s < n; ++s)
			xib[mu] += xi1[s] * partial_base(xi2[mu], s) - xi2[s] * partial_base(xi1[mu], s);
	for (int a = 0; a < ctx.model.gauge_count(); ++a)
		for (int s = 0; s < n; ++s)
			epsb[a] += xi1[s] * partial_base(eps2[a], s) - xi2[s] * partial_base(eps1[a], s);

	ProjectableVectorField lhs = instantiate(ctx, lift, xib, epsb);
	ProjectableVectorField rhs =
	    bracket(instantiate(ctx, lift, xi1, eps1), instantiate(ctx, lift, xi2, eps2), ctx.spec);
	std::vector<Expression> out;
	for (int s = 0; s < n; ++s)
		out.push_back(lhs.base[s] - rhs.base[s]);
	for (int i = 0; i < ctx.m; ++i)
		out.push_back(lhs.fiber[i] - rhs.fiber[i]);
	return out;
}

/* Vertical derivation along u (one component per dynamical field):
 * sum_{i,alpha} (D_alpha u^i) d/d(y^i_alpha), with D on the product bundle. */
static Expression vertical_variation(const Expression& e, const std::vector<Expression>& u,
                                     const GaugeContext& ctx)
{
	Expression out;
	for (const Atom& a : e.jet_atoms())
	{
		if (a.index >= ctx.m)
			continue;
		Expression pd = partial_jet(e, a.index, a.deriv);
		if (pd.is_zero())
			continue;
		Expression du = total_derivative(u[(size_t)a.index], a.deriv, ctx.ext);
		if (!du.is_zero())
			out += du * pd;
	}
	return out;
}

Expression invariance_residual(const ScalarDensity& L, const GaugeContext& ctx,
                               const LiftSpec& lift)
{
	std::vector<Expression> q = lie_derivative_section(ctx, lift);
	for (Expression& c : q)
		c = -c;
	Expression res = vertical_variation(L.value, q, ctx);
	for (int sigma = 0; sigma < ctx.spec.n(); ++sigma)
	{
		Expression x = ctx.xi(sigma);
		if (x.is_zero())
			continue;
		res += x * total_derivative(L.value, sigma, ctx.ext);
		res += L.value * total_derivative(x, sigma, ctx.ext);
	}
	return res;
}

NoetherResult noether_current(const ScalarDensity& L, const GaugeContext& ctx,
                              const LiftSpec& lift)
{
	NoetherResult r;
	r.residual = invariance_residual(L, ctx, lift);
	r.invariant = r.residual.is_zero();
	std::vector<Expression> q = lie_derivative_section(ctx, lift);
	for (Expression& c : q)
		c = -c;
	r.current = boundary_current(canonical_momentum(L, ctx.ext), q, ctx.ext);
	for (int mu = 0; mu < ctx.spec.n(); ++mu)
	{
		Expression x = ctx.xi(mu);
		if (!x.is_zero())
			r.current.comps[mu] += x * L.value;
	}
	return r;
}

/* omega = sum_i pounds^i E_i, the contraction entering the Bianchi split. */
static Expression contraction_density(const ScalarDensity& L, const GaugeContext& ctx,
                                      const LiftSpec& lift)
{
	std::vector<Expression> pounds = lie_derivative_section(ctx, lift);
	EulerLagrangeResult el = euler_lagrange(L, ctx.spec);
	Expression omega;
	for (int i = 0; i < ctx.m; ++i)
		omega += pounds[i] * el.source.comps[i];
	return omega;
}

BianchiResult bianchi_decompose(const ScalarDensity& L, const GaugeContext& ctx,
                                const LiftSpec& lift)
{
	Expression omega = contraction_density(L, ctx, lift);
	VariationSplit vs = variation_split(omega, ctx.ext, ctx.param_begin(), ctx.ext.m());
	BianchiResult out;
	out.beta = vs.euler;
	out.reduced = vs.boundary;
	out.residual = omega - formal_divergence(vs.boundary, ctx.ext).value;
	for (int f = ctx.param_begin(); f < ctx.ext.m(); ++f)
		out.residual -= Expression::jet(f, MultiIndex::zero(ctx.spec.n())) *
		                out.beta[(size_t)(f - ctx.param_begin())];
	return out;
}

std::vector<Expression> gauge_jacobi(const ScalarDensity& L, const GaugeContext& ctx,
                                     const LiftSpec& lift)
{
	std::vector<Expression> u = lie_derivative_section(ctx, lift);
	for (Expression& c : u)
		c = -c;
	return apply_jacobi(jacobi_operator(L, ctx.spec), u, ctx.ext);
}

static int max_param_order(const Expression& e, int pbegin)
{
	int q = 0;
	for (const Atom& a : e.jet_atoms())
		if (a.index >= pbegin)
			q = std::max(q, a.deriv.order());
	return q;
}

/* delta^mu = D_nu nu^{nu mu} by layer redistribution.  With c^{mu,beta}_P the
 * coefficient of P_beta at the top order q, strong conservation forces
 * sum_mu c^{mu, gamma - mu}_P = 0 for every |gamma| = q + 1, and
 *   nu^{ab} += P_beta [ (beta_a + 1) c^{b, beta + a} - (beta_b + 1) c^{a, beta + b} ] / (q + 1)
 * over beta = gamma - a - b reproduces the layer exactly; the remainder drops
 * to parameter order q - 1 and the loop repeats. */
SkewDensity2 redistribute_into_superpotential(const VectorDensity& delta, const GaugeContext& ctx)
{
	const BundleSpec& ext = ctx.ext;
	const int n = ext.n(), pbegin = ctx.param_begin();

	for (const Expression& comp : delta.comps)
		for (const Term& t : comp.terms())
		{
			int hits = 0;
			for (const PoweredAtom& p : t.mono)
				if (p.atom.kind == AtomKind::Jet && p.atom.index >= pbegin)
					hits += p.exp;
			if (hits != 1)
				throw EngineError(ErrorKind::ExtractionIncomplete,
				                  "current is not linear in the parameter jets");
		}

	SkewDensity2 nu(n);
	VectorDensity rem = delta;
	while (true)
	{
		int q = 0;
		bool live = false;
		for (const Expression& comp : rem.comps)
		{
			live = live || !comp.is_zero();
			q = std::max(q, max_param_order(comp, pbegin));
		}
		if (!live)
			break;
		if (q == 0)
			throw EngineError(ErrorKind::ExtractionIncomplete,
			                  "non-exact order-0 remainder; current is not strongly conserved");
		for (int P = pbegin; P < ext.m(); ++P)
		{
			std::set<std::vector<int>> gammas;
			for (int mu = 0; mu < n; ++mu)
				for (const Atom& a : rem.comps[mu].jet_atoms())
					if (a.index == P && a.deriv.order() == q)
						gammas.insert(a.deriv.plus(mu).counts());
			for (const auto& gc : gammas)
			{
				MultiIndex gamma(gc);
				Expression zerosum;
				for (int mu = 0; mu < n; ++mu)
					if (gamma[mu] >= 1)
						zerosum += partial_jet(rem.comps[mu], P, gamma.minus(mu));
				if (!zerosum.is_zero())
					throw EngineError(ErrorKind::ExtractionIncomplete,
					                  "conservation defect at the top parameter-jet layer");
				for (int a = 0; a < n; ++a)
					for (int b = a + 1; b < n; ++b)
					{
						if (gamma[a] < 1 || gamma[b] < 1)
							continue;
						MultiIndex beta = gamma.minus(a).minus(b);
						Expression cb = partial_jet(rem.comps[b], P, beta.plus(a));
						Expression ca = partial_jet(rem.comps[a], P, beta.plus(b));
						Expression w = cb.scaled(make_rational(beta[a] + 1)) -
						               ca.scaled(make_rational(beta[b] + 1));
						if (w.is_zero())
							continue;
						nu.add(a, b, w.scaled(make_rational(1, q + 1)) * Expression::jet(P, beta));
					}
			}
		}
		VectorDensity div = formal_divergence(nu, ext);
		int q2 = 0;
		for (int mu = 0; mu < n; ++mu)
		{
			rem.comps[mu] = delta.comps[mu] - div.comps[mu];
			q2 = std::max(q2, max_param_order(rem.comps[mu], pbegin));
		}
		bool live2 = false;
		for (const Expression& comp : rem.comps)
			live2 = live2 || !comp.is_zero();
		if (live2 && q2 >= q)
			throw EngineError(ErrorKind::ExtractionIncomplete,
			                  "layer redistribution failed to lower the parameter-jet order");
	}
	return nu;
}

SuperpotentialResult superpotential(const ScalarDensity& L, const GaugeContext& ctx,
                                    const LiftSpec& lift)
{
	BianchiResult b = bianchi_decompose(L, ctx, lift);
	for (const Expression& beta : b.beta)
		if (!beta.is_zero())
			throw EngineError(ErrorKind::BianchiNonzero,
			                  "generalized Bianchi expressions do not vanish; no superpotential");
	NoetherResult nc = noether_current(L, ctx, lift);
	SuperpotentialResult out{SkewDensity2(ctx.spec.n()), VectorDensity::zeros(ctx.spec.n()),
	                         VectorDensity::zeros(ctx.spec.n())};
	for (int mu = 0; mu < ctx.spec.n(); ++mu)
		out.delta.comps[mu] = nc.current.comps[mu] - b.reduced.comps[mu];
	out.nu = redistribute_into_superpotential(out.delta, ctx);
	VectorDensity div = formal_divergence(out.nu, ctx.ext);
	for (int mu = 0; mu < ctx.spec.n(); ++mu)
		out.residual.comps[mu] = out.delta.comps[mu] - div.comps[mu];
	return out;
}

} // namespace jetvar
