#include "testers.hpp"

#include "jetvar/model.hpp"
#include "jetvar/render.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace jetvar;
using namespace jvtest;

namespace {

std::string slurp(const std::string& path)
{
	std::ifstream in(path);
	REQUIRE(in.good());
	std::ostringstream buf;
	buf << in.rdbuf();
	return buf.str();
}

ModelDocument parse_ok(const std::string& text)
{
	ParseResult r = parse_model(text);
	if (!r.ok())
	{
		for (const Diagnostic& d : r.diagnostics)
			MESSAGE(format_diagnostic(d));
		REQUIRE(r.ok());
	}
	return *r.document;
}

Diagnostic parse_bad(const std::string& text)
{
	ParseResult r = parse_model(text);
	REQUIRE(!r.document.has_value());
	REQUIRE(!r.diagnostics.empty());
	return r.diagnostics.front();
}

bool mentions(const Diagnostic& d, const std::string& needle)
{
	return d.message.find(needle) != std::string::npos;
}

const char* mech_header = "bundle {\n\tbase t\n\tfield y\n\torder 6\n}\n";

} // namespace

TEST_CASE("minimal mechanics document")
{
	ModelDocument doc = parse_ok("bundle {\n"
	                             "\tbase t\n"
	                             "\tfield y\n"
	                             "\torder 4\n"
	                             "}\n"
	                             "lagrangian kinetic = 1/2*y_t^2\n");
	CHECK(doc.spec.base == std::vector<std::string>{"t"});
	CHECK(doc.spec.fields == std::vector<std::string>{"y"});
	CHECK(doc.spec.max_order == 4);
	CHECK(!doc.has_params);
	REQUIRE(doc.lagrangians.size() == 1);
	CHECK(doc.lagrangians[0].first == "kinetic");
	Expression expect =
	    Expression::jet(0, MultiIndex::unit(1, 0)).pow(2).scaled(make_rational(1, 2));
	CHECK(doc.lagrangians[0].second == expect);
	CHECK(doc.lagrangian("kinetic") != nullptr);
	CHECK(doc.lagrangian("absent") == nullptr);
}

TEST_CASE("maxwell model matches the direct construction")
{
	ModelDocument doc = parse_ok(slurp(std::string(JETVAR_MODEL_DIR) + "/maxwell.jv"));
	REQUIRE(doc.spec.n() == 4);
	CHECK(doc.spec.fields ==
	      std::vector<std::string>{"A[0]", "A[1]", "A[2]", "A[3]"});
	CHECK(doc.gauge.eps_names == std::vector<std::string>{"eps"});
	CHECK(doc.gauge.r == 1);
	CHECK(doc.gauge.k == 1);

	/* the defs expand to the direct field-strength entry */
	auto f = [](int mu, int nu) {
		return Expression::jet(nu, MultiIndex::unit(4, mu)) -
		       Expression::jet(mu, MultiIndex::unit(4, nu));
	};
	auto eta = [](int mu) { return mu == 0 ? 1 : -1; };
	Expression expect;
	for (int mu = 0; mu < 4; ++mu)
		for (int nu = 0; nu < 4; ++nu)
			expect += (f(mu, nu) * f(mu, nu))
			              .scaled(make_rational(-eta(mu) * eta(nu), 4));
	REQUIRE(doc.lagrangians.size() == 1);
	CHECK(doc.lagrangians[0].first == "maxwell");
	CHECK(doc.lagrangians[0].second == expect);

	/* the lift expands over the family index */
	REQUIRE(doc.lift_fiber.size() == 4);
	for (int mu = 0; mu < 4; ++mu)
		CHECK(doc.lift_fiber[(size_t)mu] == Expression::jet(4, MultiIndex::unit(4, mu)));
}

TEST_CASE("corpus models parse to the expected structures")
{
	ModelDocument top = parse_ok(slurp(std::string(JETVAR_MODEL_DIR) + "/topological.jv"));
	CHECK(top.has_params);
	CHECK(top.gauge.xi_names == std::vector<std::string>{"tau"});
	CHECK(top.gauge.eps_names.empty());
	CHECK(top.gauge.r == 0);
	CHECK(top.gauge.k == 1);
	REQUIRE(top.lift_fiber.size() == 1);
	CHECK(top.lift_fiber[0].is_zero());
	Expression yyt = Expression::jet(0, MultiIndex::zero(1)) *
	                 Expression::jet(0, MultiIndex::unit(1, 0));
	CHECK(top.lagrangians[0].second == yyt);

	ModelDocument vf = parse_ok(slurp(std::string(JETVAR_MODEL_DIR) + "/vectorfield.jv"));
	CHECK(vf.lagrangians.empty());
	REQUIRE(vf.lift_fiber.size() == 2);
	for (int a = 0; a < 2; ++a)
	{
		Expression expect;
		for (int b = 0; b < 2; ++b)
			expect += Expression::jet(b, MultiIndex::zero(2)) *
			          Expression::jet(2 + a, MultiIndex::unit(2, b));
		CHECK(vf.lift_fiber[(size_t)a] == expect);
	}

	ModelDocument osc = parse_ok(slurp(std::string(JETVAR_MODEL_DIR) + "/oscillator.jv"));
	CHECK(osc.param_names == std::vector<std::string>{"omega"});
	Expression losc =
	    Expression::jet(0, MultiIndex::unit(1, 0)).pow(2).scaled(make_rational(1, 2)) -
	    (Expression::param("omega").pow(2) * Expression::jet(0, MultiIndex::zero(1)).pow(2))
	        .scaled(make_rational(1, 2));
	CHECK(osc.lagrangians[0].second == losc);
}

TEST_CASE("diagnostics carry positions and name the problem")
{
	/* unexpected character, exact span */
	Diagnostic d = parse_bad(std::string(mech_header) + "lagrangian l = y $ y\n");
	CHECK(mentions(d, "unexpected character '$'"));
	CHECK(d.span.line == 6);
	CHECK(d.span.column == 18);

	/* undeclared identifier, exact span */
	d = parse_bad(std::string(mech_header) + "lagrangian l = y_t*z\n");
	CHECK(mentions(d, "undeclared identifier 'z'"));
	CHECK(d.span.line == 6);
	CHECK(d.span.column == 20);
	CHECK(d.span.length == 1);

	/* data files used by the CLI tests fail the same way */
	d = parse_bad(slurp(std::string(JETVAR_TEST_DATA_DIR) + "/broken.jv"));
	CHECK(mentions(d, "expected number (an exponent)"));
	CHECK(d.span.line == 7);
	d = parse_bad(slurp(std::string(JETVAR_TEST_DATA_DIR) + "/undeclared.jv"));
	CHECK(mentions(d, "undeclared identifier 'z'"));
	d = parse_bad(slurp(std::string(JETVAR_TEST_DATA_DIR) + "/badlift.jv"));
	CHECK(mentions(d, "nonlinear in the parameter jets"));

	CHECK(mentions(parse_bad("bundle {\n\tbase t\n\tfield y\n}\n"), "missing an order statement"));
	CHECK(mentions(parse_bad(std::string(mech_header) + "lagrangian l = y_ttttttt\n"),
	               "jet order 7 exceeds the declared cap 6"));
	CHECK(mentions(parse_bad("bundle {\n\tbase x x0\n\tfield y\n\torder 2\n}\n"),
	               "jet subscripts would be ambiguous"));
	CHECK(mentions(parse_bad("bundle {\n\tbase t\n\tfield y y\n\torder 2\n}\n"),
	               "duplicate declaration of 'y'"));
	CHECK(mentions(parse_bad("param a\n"), "bundle block must come first"));
	CHECK(mentions(parse_bad(std::string(mech_header) +
	                         "params {\n\txi a b\n\tcaps r 0 k 1\n}\n"),
	               "one name per base direction"));
	CHECK(mentions(parse_bad(std::string(mech_header) +
	                         "params {\n\tgauge e\n\tcaps r 2 k 1\n}\n"),
	               "lift caps"));
	CHECK(mentions(parse_bad(std::string(mech_header) + "params {\n\tcaps r 0 k 1\n}\n"),
	               "declares no parameters"));
	CHECK(mentions(parse_bad(std::string(mech_header) + "lift {\n\ty = 0\n}\n"),
	               "lift block requires a params block"));
	CHECK(mentions(parse_bad(std::string(mech_header) + "lagrangian l = y/y_t\n"),
	               "division only by nonzero constants"));
	CHECK(mentions(parse_bad(std::string(mech_header) + "lagrangian l = y/0\n"),
	               "division by zero"));
	CHECK(mentions(parse_bad("bundle {\n\tbase t\n\tfield v[2]\n\torder 2\n}\n"
	                         "lagrangian l = v[5]\n"),
	               "index 5 out of range for family 'v' (size 2)"));
	CHECK(mentions(parse_bad(std::string(mech_header) +
	                         "params {\n\txi tau\n}\nlagrangian l = y*tau\n"),
	               "parameter 'tau' may not appear in a Lagrangian"));
	CHECK(mentions(parse_bad(std::string(mech_header) + "const g = diag(1, 2)\n"),
	               "one entry per base direction"));
	CHECK(mentions(parse_bad(std::string(mech_header) + "def d[i][i] = y\n"),
	               "repeated index variable 'i'"));
	CHECK(mentions(parse_bad(std::string(mech_header) + "lagrangian l = y_\n"),
	               "empty jet subscript"));
	CHECK(mentions(parse_bad(std::string(mech_header) + "lagrangian l = omega*y\n"),
	               "undeclared identifier 'omega'"));
	CHECK(mentions(parse_bad(std::string(mech_header) + "stuff\n"), "unknown declaration 'stuff'"));
	CHECK(mentions(parse_bad(""), "bundle block is required"));

	CHECK(format_diagnostic(Diagnostic{"boom", Span{3, 14, 2}}) == "error:3:14: boom");
}

TEST_CASE("parse render parse is the identity on the corpus")
{
	for (const char* name : {"maxwell.jv", "noninvariant.jv", "oscillator.jv",
	                         "free_particle.jv", "quartic.jv", "curvature.jv",
	                         "topological.jv", "vectorfield.jv"})
	{
		CAPTURE(name);
		ModelDocument doc = parse_ok(slurp(std::string(JETVAR_MODEL_DIR) + "/" + name));
		std::string rendered = render_document(doc);
		CAPTURE(rendered);
		ModelDocument again = parse_ok(rendered);
		CHECK(same_document(doc, again));
		/* and the rendering is a fixed point */
		CHECK(render_document(again) == rendered);
	}
}

TEST_CASE("expression text round-trip")
{
	ModelDocument doc = parse_ok("bundle {\n"
	                             "\tbase t x\n"
	                             "\tfield y u\n"
	                             "\torder 6\n"
	                             "}\n"
	                             "param c\n"
	                             "formal phi\n");
	Rng rng(808);
	std::vector<Atom> pool = jet_pool(doc.spec, 3);
	pool.push_back(Atom::param("c"));
	pool.push_back(Atom::formal("phi", MultiIndex::zero(2)));
	pool.push_back(Atom::formal("phi", MultiIndex::unit(2, 1)));
	for (int round = 0; round < 100; ++round)
	{
		Expression e = random_poly(rng, pool, 4);
		std::string text = render_text(e, doc.spec);
		CAPTURE(text);
		ExpressionResult back = parse_expression(text, doc);
		REQUIRE(back.expression.has_value());
		CHECK(*back.expression == e);
	}

	/* family and parameter atoms round-trip through the maxwell document */
	ModelDocument mx = parse_ok(slurp(std::string(JETVAR_MODEL_DIR) + "/maxwell.jv"));
	BundleSpec ext = mx.spec.with_fields_appended({"eps"});
	std::vector<Atom> mpool;
	for (int f = 0; f < 5; ++f)
	{
		mpool.push_back(Atom::jet(f, MultiIndex::zero(4)));
		mpool.push_back(Atom::jet(f, MultiIndex::unit(4, (f + 1) % 4)));
	}
	mpool.push_back(Atom::base(2));
	for (int round = 0; round < 50; ++round)
	{
		Expression e = random_poly(rng, mpool, 3);
		ExpressionResult back = parse_expression(render_text(e, ext), mx, true);
		REQUIRE(back.expression.has_value());
		CHECK(*back.expression == e);
	}

	ExpressionResult bad = parse_expression("y + ) + y", doc);
	CHECK(!bad.expression.has_value());
	REQUIRE(!bad.diagnostics.empty());
	bad = parse_expression("y y", doc);
	CHECK(mentions(bad.diagnostics.front(), "trailing input"));
}

TEST_CASE("json round-trip and loader validation")
{
	ModelDocument doc = parse_ok(std::string(mech_header) + "param c\nformal phi\n");
	Rng rng(909);
	std::vector<Atom> pool = jet_pool(doc.spec, 3);
	pool.push_back(Atom::param("c"));
	pool.push_back(Atom::formal("phi", MultiIndex::unit(1, 0)));
	for (int round = 0; round < 60; ++round)
	{
		Expression e = random_poly(rng, pool, 4);
		std::string js = render_json(e, doc.spec);
		CHECK(expression_from_json(js, doc.spec) == e);
		/* serialization is deterministic */
		CHECK(render_json(e, doc.spec) == js);
	}
	CHECK(render_json(Expression(), doc.spec) ==
	      "{\"schema\":\"jetvar-expression/1\",\"terms\":[]}");
	CHECK(expression_from_json("{\"schema\":\"jetvar-expression/1\",\"terms\":[]}", doc.spec)
	          .is_zero());

	CHECK_THROWS_AS(expression_from_json("{\"schema\":\"nope/9\",\"terms\":[]}", doc.spec),
	                std::invalid_argument);
	CHECK_THROWS_AS(
	    expression_from_json("{\"schema\":\"jetvar-expression/1\",\"terms\":[{\"coeff\":\"1\","
	                         "\"factors\":[{\"kind\":\"jet\",\"field\":7,\"deriv\":[1],"
	                         "\"power\":1}]}]}",
	                         doc.spec),
	    std::invalid_argument);
	CHECK_THROWS_AS(
	    expression_from_json("{\"schema\":\"jetvar-expression/1\",\"terms\":[{\"coeff\":\"1\","
	                         "\"factors\":[{\"kind\":\"jet\",\"field\":0,\"deriv\":[1,0],"
	                         "\"power\":1}]}]}",
	                         doc.spec),
	    std::invalid_argument);
}

TEST_CASE("formatting contract")
{
	BundleSpec mech{{"t"}, {"y"}, 6};
	Expression y = Expression::jet(0, MultiIndex::zero(1));
	Expression ytt = Expression::jet(0, MultiIndex(std::vector<int>{2}));
	Expression omega = Expression::param("omega");

	CHECK(render_text(Expression(), mech) == "0");
	CHECK(render_latex(Expression(), mech) == "0");
	CHECK(render_json(Expression(), mech) == "{\"schema\":\"jetvar-expression/1\",\"terms\":[]}");

	CHECK(render_text(-(ytt + omega.pow(2) * y), mech) == "-(y_tt + omega^2*y)");
	CHECK(render_text(ytt - omega.pow(2) * y, mech) == "y_tt - omega^2*y");
	CHECK(render_text(Expression::base(0).scaled(make_rational(3, 2)), mech) == "3/2*t");
	CHECK(render_text(-Expression::jet(0, MultiIndex::unit(1, 0)).pow(2), mech) == "-y_t^2");
	CHECK(render_text(Expression::integer(1) + y.pow(3), mech) == "y^3 + 1");

	CHECK(render_latex(omega.pow(2) * y, mech) == "{\\omega}^{2} y");
	CHECK(render_latex(ytt.scaled(make_rational(-1, 2)), mech) == "-\\frac{1}{2} {y}_{t t}");

	BundleSpec fam{{"x0", "x1"}, {"A[0]", "A[1]"}, 6};
	Expression a1 = Expression::jet(1, MultiIndex({1, 1}));
	CHECK(render_text(a1, fam) == "A[1]_x0x1");
	CHECK(render_latex(a1, fam) == "{A^{1}}_{x_{0} x_{1}}");
	Expression eps = Expression::param("eps");
	CHECK(render_latex(eps, fam) == "\\varepsilon");
}
