#include "testers.hpp"

#include <doctest.h>

using namespace jetvar;
using namespace jvtest;

namespace {

const BundleSpec plane{{"x", "z"}, {"y"}, 8};
const BundleSpec line{{"x"}, {"y"}, 8};

Expression jy(const BundleSpec& spec, std::initializer_list<int> dirs)
{
	MultiIndex a(spec.n());
	for (int d : dirs)
		a = a.plus(d);
	return Expression::jet(0, a);
}

} // namespace

TEST_CASE("total derivative: product rule and jet shift")
{
	Expression y = jy(line, {}), yx = jy(line, {0}), yxx = jy(line, {0, 0});
	CHECK(total_derivative(y * yx, 0, line) == yx.pow(2) + y * yxx);
	CHECK(total_derivative(Expression::base(0) * y, 0, line) ==
	      y + Expression::base(0) * yx);
	CHECK(total_derivative(Expression::param("c"), 0, line).is_zero());
	CHECK(total_derivative(Expression::formal("f", MultiIndex(1)), 0, line) ==
	      Expression::formal("f", MultiIndex::unit(1, 0)));
}

TEST_CASE("total derivatives commute and obey Leibniz")
{
	Rng rng(31);
	std::vector<Atom> pool = jet_pool(plane, 2);
	pool.push_back(Atom::formal("f", MultiIndex(2)));
	for (int round = 0; round < 20; ++round)
	{
		Expression a = random_poly(rng, pool, 4);
		Expression b = random_poly(rng, pool, 3);
		CHECK(total_derivative(total_derivative(a, 0, plane), 1, plane) ==
		      total_derivative(total_derivative(a, 1, plane), 0, plane));
		CHECK(total_derivative(a * b, 0, plane) ==
		      total_derivative(a, 0, plane) * b + a * total_derivative(b, 0, plane));
	}
}

TEST_CASE("total derivative respects the jet-order cap")
{
	BundleSpec tight{{"x"}, {"y"}, 2};
	Expression yxx = jy(tight, {0, 0});
	CHECK_THROWS_AS(total_derivative(yxx, 0, tight), EngineError);
	try
	{
		total_derivative(yxx, 0, tight);
	}
	catch (const EngineError& err)
	{
		CHECK(err.kind == ErrorKind::OrderOverflow);
	}
}

TEST_CASE("first prolongation of a projectable field")
{
	/* Xi = x^2 d_x + y^2 d_y: first-order component D_x(y^2) - y_x D_x(x^2) */
	ProjectableVectorField vf;
	vf.base = {Expression::base(0).pow(2)};
	vf.fiber = {jy(line, {}).pow(2)};
	ProlongedField pf = prolong(vf, 1, line);
	Expression y = jy(line, {}), yx = jy(line, {0});
	CHECK(pf.at(0, MultiIndex::zero(1)) == y.pow(2));
	CHECK(pf.at(0, MultiIndex::unit(1, 0)) ==
	      y.scaled(2) * yx - Expression::base(0).scaled(2) * yx);
}

TEST_CASE("prolongation equals horizontal transport plus vertical prolongation")
{
	/* component identity Xi^i_alpha = xi^mu y^i_{alpha+mu} + D_alpha Q^i */
	Rng rng(402);
	for (int round = 0; round < 12; ++round)
	{
		ProjectableVectorField vf = random_projectable(rng, plane);
		const int s = 2;
		ProlongedField pf = prolong(vf, s, plane);
		SplitField sp = split_hv(vf, s, plane);
		for (const auto& [key, comp] : pf.comps)
		{
			Expression expected = sp.vertical.at(key.first, key.second);
			for (int mu = 0; mu < plane.n(); ++mu)
				expected += vf.base[mu] * Expression::jet(key.first, key.second.plus(mu));
			CHECK(comp == expected);
		}
	}
}

TEST_CASE("split reproduces the derivation action")
{
	/* j_s Xi acting on f == xi^s D_s f + (vertical part) f */
	Rng rng(77);
	std::vector<Atom> pool = jet_pool(plane, 2);
	for (int round = 0; round < 10; ++round)
	{
		ProjectableVectorField vf = random_projectable(rng, plane);
		Expression f = random_poly(rng, pool, 4);
		int s = f.max_jet_order();
		ProlongedField pf = prolong(vf, s, plane);
		SplitField sp = split_hv(vf, s, plane);
		Expression horizontal;
		for (int sigma = 0; sigma < plane.n(); ++sigma)
			horizontal += vf.base[sigma] * total_derivative(f, sigma, plane);
		CHECK(apply(pf, f) == horizontal + apply(sp.vertical, f));
	}
}

TEST_CASE("prolongation is natural with respect to the bracket")
{
	/* components of prolong([a,b]) match the commutator of the prolonged
	 * actions on each jet coordinate */
	Rng rng(55);
	for (int round = 0; round < 8; ++round)
	{
		ProjectableVectorField a = random_projectable(rng, plane);
		ProjectableVectorField b = random_projectable(rng, plane);
		const int s = 2;
		ProlongedField pa = prolong(a, s, plane);
		ProlongedField pb = prolong(b, s, plane);
		ProlongedField pc = prolong(bracket(a, b, plane), s, plane);
		for (const auto& [key, comp] : pc.comps)
		{
			Expression commutator =
			    apply(pa, pb.at(key.first, key.second)) - apply(pb, pa.at(key.first, key.second));
			CHECK(comp == commutator);
		}
	}
}

TEST_CASE("bracket is antisymmetric and satisfies the Jacobi identity")
{
	Rng rng(808);
	BundleSpec spec{{"x", "z"}, {"y", "w"}, 6};
	for (int round = 0; round < 6; ++round)
	{
		ProjectableVectorField a = random_projectable(rng, spec);
		ProjectableVectorField b = random_projectable(rng, spec);
		ProjectableVectorField c = random_projectable(rng, spec);
		ProjectableVectorField ab = bracket(a, b, spec);
		ProjectableVectorField ba = bracket(b, a, spec);
		for (int s = 0; s < spec.n(); ++s)
			CHECK((ab.base[s] + ba.base[s]).is_zero());
		for (int i = 0; i < spec.m(); ++i)
			CHECK((ab.fiber[i] + ba.fiber[i]).is_zero());
		ProjectableVectorField j1 = bracket(a, bracket(b, c, spec), spec);
		ProjectableVectorField j2 = bracket(b, bracket(c, a, spec), spec);
		ProjectableVectorField j3 = bracket(c, bracket(a, b, spec), spec);
		for (int i = 0; i < spec.m(); ++i)
			CHECK((j1.fiber[i] + j2.fiber[i] + j3.fiber[i]).is_zero());
		for (int s = 0; s < spec.n(); ++s)
			CHECK((j1.base[s] + j2.base[s] + j3.base[s]).is_zero());
	}
}

TEST_CASE("projectable-field validation")
{
	ProjectableVectorField bad;
	bad.base = {jy(line, {})};
	bad.fiber = {Expression()};
	CHECK_THROWS_AS(bad.validate(line), EngineError);
	ProjectableVectorField bad2;
	bad2.base = {Expression::base(0)};
	bad2.fiber = {jy(line, {0})};
	CHECK_THROWS_AS(bad2.validate(line), EngineError);
}

TEST_CASE("horizontal differential squares to zero on skew densities")
{
	Rng rng(4242);
	BundleSpec spec{{"x", "z", "u"}, {"y"}, 8};
	std::vector<Atom> pool = jet_pool(spec, 2);
	for (int round = 0; round < 8; ++round)
	{
		SkewDensity2 w(spec.n());
		for (int mu = 0; mu < spec.n(); ++mu)
			for (int nu = mu + 1; nu < spec.n(); ++nu)
				w.set(mu, nu, random_poly(rng, pool, 3));
		REQUIRE(w.is_antisymmetric());
		CHECK(formal_divergence(formal_divergence(w, spec), spec).value.is_zero());
	}
}

TEST_CASE("divergence of an explicit vector density")
{
	Expression y = jy(plane, {}), yx = jy(plane, {0}), yz = jy(plane, {1});
	VectorDensity v{{y * yz, -(y * yx)}};
	/* D_x(y y_z) + D_z(-y y_x): the mixed second-order terms cancel */
	CHECK(formal_divergence(v, plane).value == yx * yz - yz * yx);
	CHECK(formal_divergence(v, plane).value.is_zero());
}
