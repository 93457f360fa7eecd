#include "jetvar/gauge.hpp"
#include "jetvar/model.hpp"
#include "jetvar/render.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace jetvar;

namespace {

/* Deterministic expression soup for the kernel-level benchmarks. */
Expression dense_poly(const BundleSpec& spec, int order, int terms, unsigned seed)
{
	std::mt19937_64 gen(seed);
	auto pick = [&](int lo, int hi) {
		return (int)std::uniform_int_distribution<long>(lo, hi)(gen);
	};
	std::vector<Atom> pool;
	for (int s = 0; s < spec.n(); ++s)
		pool.push_back(Atom::base(s));
	for (int i = 0; i < spec.m(); ++i)
		for (const MultiIndex& a : multi_indices_up_to(spec.n(), order))
			pool.push_back(Atom::jet(i, a));
	Expression e;
	for (int t = 0; t < terms; ++t)
	{
		Expression mono = Expression::constant(make_rational(pick(-6, 6) * 2 + 1, pick(1, 4)));
		int factors = pick(1, 3);
		for (int f = 0; f < factors; ++f)
			mono *= Expression::atom(pool[(size_t)pick(0, (int)pool.size() - 1)]).pow(pick(1, 2));
		e += mono;
	}
	return e;
}

struct Em {
	BundleSpec spec{{"x0", "x1", "x2", "x3"}, {"A0", "A1", "A2", "A3"}, 8};
	GaugeContext ctx;
	LiftSpec lift;
	ScalarDensity L;

	Em()
	{
		GaugeModel model;
		model.eps_names = {"eps"};
		model.r = 1;
		model.k = 1;
		ctx = make_gauge_context(spec, model);
		std::vector<Expression> fiber;
		for (int mu = 0; mu < 4; ++mu)
			fiber.push_back(Expression::jet(ctx.eps_field(0), MultiIndex::unit(4, mu)));
		lift = decompose_lift(ctx, fiber);
		auto f = [](int mu, int nu) {
			return Expression::jet(nu, MultiIndex::unit(4, mu)) -
			       Expression::jet(mu, MultiIndex::unit(4, nu));
		};
		auto eta = [](int mu) { return mu == 0 ? 1 : -1; };
		for (int mu = 0; mu < 4; ++mu)
			for (int nu = 0; nu < 4; ++nu)
				L.value += (f(mu, nu) * f(mu, nu)).scaled(make_rational(-eta(mu) * eta(nu), 4));
	}
};

void bm_normalize(benchmark::State& state)
{
	BundleSpec spec{{"x0", "x1"}, {"y0", "y1"}, 8};
	Expression e = dense_poly(spec, 2, (int)state.range(0), 12345);
	std::vector<Term> terms = e.terms();
	for (auto _ : state)
	{
		Expression r = Expression::normalize(terms);
		benchmark::DoNotOptimize(r);
	}
}

void bm_multiply(benchmark::State& state)
{
	BundleSpec spec{{"x0", "x1"}, {"y0", "y1"}, 8};
	Expression a = dense_poly(spec, 2, (int)state.range(0), 777);
	Expression b = dense_poly(spec, 2, (int)state.range(0), 778);
	for (auto _ : state)
	{
		Expression r = a * b;
		benchmark::DoNotOptimize(r);
	}
}

void bm_total_derivative(benchmark::State& state)
{
	BundleSpec spec{{"x0", "x1"}, {"y0", "y1"}, 8};
	Expression e = dense_poly(spec, 2, (int)state.range(0), 999);
	for (auto _ : state)
	{
		Expression r = total_derivative(e, 0, spec);
		benchmark::DoNotOptimize(r);
	}
}

void bm_euler_lagrange(benchmark::State& state)
{
	BundleSpec spec{{"x0", "x1"}, {"y0", "y1"}, 8};
	ScalarDensity L{dense_poly(spec, 2, (int)state.range(0), 31415)};
	for (auto _ : state)
	{
		EulerLagrangeResult r = euler_lagrange(L, spec);
		benchmark::DoNotOptimize(r);
	}
}

void bm_helmholtz(benchmark::State& state)
{
	BundleSpec spec{{"x0", "x1"}, {"y0", "y1"}, 8};
	ScalarDensity L{dense_poly(spec, 2, (int)state.range(0), 2718)};
	CovectorDensity E = euler_lagrange(L, spec).source;
	for (auto _ : state)
	{
		HelmholtzTensor h = helmholtz(E, spec);
		benchmark::DoNotOptimize(h);
	}
}

void bm_maxwell_noether(benchmark::State& state)
{
	Em em;
	for (auto _ : state)
	{
		NoetherResult r = noether_current(em.L, em.ctx, em.lift);
		benchmark::DoNotOptimize(r);
	}
}

void bm_maxwell_superpotential(benchmark::State& state)
{
	Em em;
	for (auto _ : state)
	{
		SuperpotentialResult r = superpotential(em.L, em.ctx, em.lift);
		benchmark::DoNotOptimize(r);
	}
}

void bm_parse_render(benchmark::State& state)
{
	Em em;
	ModelDocument doc;
	doc.field_decls = {{"A", 4}};
	doc.spec = BundleSpec{{"x0", "x1", "x2", "x3"}, {"A[0]", "A[1]", "A[2]", "A[3]"}, 8};
	doc.lagrangians.push_back({"maxwell", em.L.value});
	std::string text = render_document(doc);
	for (auto _ : state)
	{
		ParseResult r = parse_model(text);
		benchmark::DoNotOptimize(r);
	}
}

BENCHMARK(bm_normalize)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(bm_multiply)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK(bm_total_derivative)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(bm_euler_lagrange)->Arg(4)->Arg(16)->Arg(64);
BENCHMARK(bm_helmholtz)->Arg(4)->Arg(8)->Arg(16);
BENCHMARK(bm_maxwell_noether);
BENCHMARK(bm_maxwell_superpotential);
BENCHMARK(bm_parse_render);

} // namespace

BENCHMARK_MAIN();
