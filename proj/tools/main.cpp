#include "jetvar/model.hpp"
#include "jetvar/render.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace jetvar;

namespace {

struct Options {
	std::string model_path;
	std::string lagrangian;
	std::string format = "text";
	std::string out;
	int max_order = 0; // 0: keep the file's cap
};

/* Labeled expressions plus scalar notes; every subcommand except `check`
 * reduces to this shape, so the three formats share one emitter. */
struct Item {
	std::string label;
	Expression value;
};

struct Note {
	std::string key;
	std::string text;
	nlohmann::json value;
};

struct Output {
	std::vector<Item> items;
	std::vector<Note> notes;
};

struct CheckRow {
	std::string name;
	bool pass = false;
};

/* Usage-level faults after a successful parse (missing Lagrangian, absent
 * params block, ...): diagnostics, not engine errors. */
struct UsageError {
	std::string message;
};

struct Session {
	ModelDocument doc;
	ScalarDensity L;
	std::string lag_name;
	GaugeContext gctx; // meaningful iff doc.has_params
	LiftSpec lift;

	const BundleSpec& render_spec() const { return doc.has_params ? gctx.ext : doc.spec; }
};

std::string subscript(const MultiIndex& alpha, const BundleSpec& spec)
{
	if (alpha.is_zero())
		return "";
	std::string s = "_";
	for (int d = 0; d < alpha.dim(); ++d)
		for (int r = 0; r < alpha[d]; ++r)
			s += spec.base[(size_t)d];
	return s;
}

int jet_order(const Expression& e)
{
	int best = 0;
	for (const Term& t : e.terms())
		for (const PoweredAtom& pa : t.mono)
			if (pa.atom.kind == AtomKind::Jet && pa.atom.deriv.order() > best)
				best = pa.atom.deriv.order();
	return best;
}

bool all_zero(const std::vector<Expression>& v)
{
	for (const Expression& e : v)
		if (!e.is_zero())
			return false;
	return true;
}

bool table_zero(const IndexedTable& t)
{
	for (const auto& [key, e] : t)
		if (!e.is_zero())
			return false;
	return true;
}

void need_params(const Session& s, const std::string& cmd)
{
	if (!s.doc.has_params)
		throw UsageError{fmt::format("'{}' needs parameters, but the model has no params block", cmd)};
}

/* Parameter-field display names in product-bundle order: xi first, then eps. */
std::vector<std::string> param_labels(const GaugeModel& g)
{
	std::vector<std::string> names = g.xi_names;
	names.insert(names.end(), g.eps_names.begin(), g.eps_names.end());
	return names;
}

Output compute(const std::string& cmd, const Session& s)
{
	Output out;
	const BundleSpec& spec = s.doc.spec;
	if (cmd == "el")
	{
		EulerLagrangeResult el = euler_lagrange(s.L, spec);
		for (int i = 0; i < spec.m(); ++i)
			out.items.push_back({fmt::format("E[{}]", spec.fields[(size_t)i]), el.source.comps[(size_t)i]});
		out.notes.push_back({"order", std::to_string(el.order), el.order});
	}
	else if (cmd == "helmholtz")
	{
		HelmholtzTensor H = helmholtz(euler_lagrange(s.L, spec).source, spec);
		for (const auto& [key, e] : H.entries)
			if (!e.is_zero())
				out.items.push_back({fmt::format("H[{},{}]{}", spec.fields[(size_t)std::get<0>(key)],
				                                 spec.fields[(size_t)std::get<1>(key)],
				                                 subscript(std::get<2>(key), spec)),
				                     e});
		bool lv = H.all_zero();
		out.notes.push_back({"locally variational", lv ? "yes" : "no", lv});
	}
	else if (cmd == "jacobi")
	{
		if (s.doc.has_params)
		{
			std::vector<Expression> jac = gauge_jacobi(s.L, s.gctx, s.lift);
			for (int i = 0; i < spec.m(); ++i)
				out.items.push_back({fmt::format("jacobi[{}]", spec.fields[(size_t)i]), jac[(size_t)i]});
			bool kernel = all_zero(jac);
			out.notes.push_back({"lift in the kernel", kernel ? "yes" : "no", kernel});
		}
		else
		{
			JacobiOperator J = jacobi_operator(s.L, spec);
			for (const auto& [key, e] : J.entries)
				if (!e.is_zero())
					out.items.push_back({fmt::format("J[{},{}]{}", spec.fields[(size_t)std::get<0>(key)],
					                                 spec.fields[(size_t)std::get<1>(key)],
					                                 subscript(std::get<2>(key), spec)),
					                     e});
			out.notes.push_back({"rows", std::to_string(J.rows), J.rows});
			out.notes.push_back({"cols", std::to_string(J.cols), J.cols});
		}
	}
	else if (cmd == "invariance")
	{
		need_params(s, cmd);
		Expression r = invariance_residual(s.L, s.gctx, s.lift);
		out.items.push_back({"residual", r});
		out.notes.push_back({"invariant", r.is_zero() ? "yes" : "no", r.is_zero()});
	}
	else if (cmd == "noether")
	{
		need_params(s, cmd);
		NoetherResult nr = noether_current(s.L, s.gctx, s.lift);
		for (int mu = 0; mu < spec.n(); ++mu)
			out.items.push_back({fmt::format("current[{}]", spec.base[(size_t)mu]),
			                     nr.current.comps[(size_t)mu]});
		out.items.push_back({"residual", nr.residual});
		out.notes.push_back({"invariant", nr.invariant ? "yes" : "no", nr.invariant});
	}
	else if (cmd == "bianchi")
	{
		need_params(s, cmd);
		BianchiResult br = bianchi_decompose(s.L, s.gctx, s.lift);
		std::vector<std::string> names = param_labels(s.doc.gauge);
		for (size_t p = 0; p < br.beta.size(); ++p)
			out.items.push_back({fmt::format("beta[{}]", names[p]), br.beta[p]});
		for (int mu = 0; mu < spec.n(); ++mu)
			out.items.push_back({fmt::format("reduced[{}]", spec.base[(size_t)mu]),
			                     br.reduced.comps[(size_t)mu]});
		bool hold = all_zero(br.beta);
		out.notes.push_back({"identities hold", hold ? "yes" : "no", hold});
	}
	else if (cmd == "superpotential")
	{
		need_params(s, cmd);
		SuperpotentialResult sp = superpotential(s.L, s.gctx, s.lift);
		for (int mu = 0; mu < spec.n(); ++mu)
			for (int nu = mu + 1; nu < spec.n(); ++nu)
				out.items.push_back({fmt::format("nu[{},{}]", spec.base[(size_t)mu],
				                                 spec.base[(size_t)nu]),
				                     sp.nu.at(mu, nu)});
		for (int mu = 0; mu < spec.n(); ++mu)
			out.items.push_back({fmt::format("delta[{}]", spec.base[(size_t)mu]),
			                     sp.delta.comps[(size_t)mu]});
	}
	return out;
}

int write_out(const std::string& text, const Options& opt)
{
	if (opt.out.empty())
	{
		fmt::print("{}", text);
		return 0;
	}
	std::ofstream f(opt.out, std::ios::binary);
	if (!f.good())
	{
		fmt::print(stderr, "error: cannot write '{}'\n", opt.out);
		return 1;
	}
	f << text;
	return f.good() ? 0 : 1;
}

int emit(const Output& out, const std::string& cmd, const Session& s, const Options& opt)
{
	std::string text;
	if (opt.format == "json")
	{
		nlohmann::json root;
		root["schema"] = "jetvar-result/1";
		root["command"] = cmd;
		root["lagrangian"] = s.lag_name;
		nlohmann::json items = nlohmann::json::array();
		for (const Item& it : out.items)
			items.push_back({{"label", it.label},
			                 {"expression", nlohmann::json::parse(render_json(it.value, s.render_spec()))}});
		root["items"] = std::move(items);
		nlohmann::json notes = nlohmann::json::object();
		for (const Note& n : out.notes)
			notes[n.key] = n.value;
		root["notes"] = std::move(notes);
		text = root.dump() + "\n";
	}
	else
	{
		for (const Item& it : out.items)
			text += fmt::format("{} = {}\n", it.label,
			                    opt.format == "latex" ? render_latex(it.value, s.render_spec())
			                                          : render_text(it.value, s.render_spec()));
		for (const Note& n : out.notes)
			text += fmt::format("{}: {}\n", n.key, n.text);
	}
	return write_out(text, opt);
}

int run_check(const Session& s, const Options& opt)
{
	std::vector<CheckRow> rows;
	const BundleSpec& spec = s.doc.spec;
	EulerLagrangeResult el = euler_lagrange(s.L, spec);
	rows.push_back({"field equations are locally variational",
	                helmholtz(el.source, spec).all_zero()});
	rows.push_back({"jacobi operator is self-adjoint",
	                table_zero(self_adjointness_residual(s.L, spec).entries)});
	rows.push_back({"jacobi operator matches the second variation",
	                all_zero(jacobi_commutation_residual(s.L, spec))});
	if (s.doc.has_params)
	{
		Expression inv = invariance_residual(s.L, s.gctx, s.lift);
		rows.push_back({"lagrangian is invariant under the lift", inv.is_zero()});

		NoetherResult nr = noether_current(s.L, s.gctx, s.lift);
		Expression defect = formal_divergence(nr.current, s.gctx.ext).value - nr.residual;
		std::vector<Expression> pounds = lie_derivative_section(s.gctx, s.lift);
		for (int i = 0; i < spec.m(); ++i)
			defect -= pounds[(size_t)i] * el.source.comps[(size_t)i];
		rows.push_back({"noether current satisfies the off-shell identity", defect.is_zero()});

		BianchiResult br = bianchi_decompose(s.L, s.gctx, s.lift);
		rows.push_back({"bianchi decomposition closes", br.residual.is_zero()});
		bool beta0 = all_zero(br.beta);
		rows.push_back({"bianchi identities hold", beta0});
		if (inv.is_zero() && beta0)
		{
			SuperpotentialResult sp = superpotential(s.L, s.gctx, s.lift);
			bool ok = sp.nu.is_antisymmetric() && all_zero(sp.residual.comps) &&
			          formal_divergence(sp.delta, s.gctx.ext).value.is_zero();
			rows.push_back({"superpotential reproduces the conserved current", ok});
		}
	}

	int passed = 0;
	for (const CheckRow& r : rows)
		passed += r.pass ? 1 : 0;
	bool all = passed == (int)rows.size();

	std::string text;
	if (opt.format == "json")
	{
		nlohmann::json root;
		root["schema"] = "jetvar-result/1";
		root["command"] = "check";
		root["lagrangian"] = s.lag_name;
		nlohmann::json jrows = nlohmann::json::array();
		for (const CheckRow& r : rows)
			jrows.push_back({{"check", r.name}, {"status", r.pass ? "pass" : "fail"}});
		root["rows"] = std::move(jrows);
		root["passed"] = all;
		text = root.dump() + "\n";
	}
	else
	{
		for (const CheckRow& r : rows)
			text += fmt::format("[{}] {}\n", r.pass ? "PASS" : "FAIL", r.name);
		text += fmt::format("{} checks: {} passed, {} failed\n", rows.size(), passed,
		                    (int)rows.size() - passed);
	}
	int werr = write_out(text, opt);
	if (werr != 0)
		return werr;
	return all ? 0 : 1;
}

int run(const std::string& cmd, const Options& opt)
{
	std::ifstream in(opt.model_path);
	if (!in.good())
	{
		fmt::print(stderr, "error: cannot open model file '{}'\n", opt.model_path);
		return 1;
	}
	std::ostringstream buf;
	buf << in.rdbuf();
	ParseResult parsed = parse_model(buf.str());
	if (!parsed.ok())
	{
		for (const Diagnostic& d : parsed.diagnostics)
			fmt::print(stderr, "{}\n", format_diagnostic(d));
		return 1;
	}

	Session s;
	s.doc = std::move(*parsed.document);
	if (opt.max_order > 0)
		s.doc.spec.max_order = opt.max_order;

	if (s.doc.lagrangians.empty())
	{
		fmt::print(stderr, "error: model '{}' declares no Lagrangian\n", opt.model_path);
		return 1;
	}
	if (!opt.lagrangian.empty())
	{
		const Expression* L = s.doc.lagrangian(opt.lagrangian);
		if (L == nullptr)
		{
			fmt::print(stderr, "error: no Lagrangian named '{}' in '{}'\n", opt.lagrangian,
			           opt.model_path);
			return 1;
		}
		s.L = ScalarDensity{*L};
		s.lag_name = opt.lagrangian;
	}
	else if (s.doc.lagrangians.size() > 1)
	{
		std::string names;
		for (const auto& [nm, e] : s.doc.lagrangians)
			names += names.empty() ? nm : ", " + nm;
		fmt::print(stderr, "error: model declares several Lagrangians ({}); pick one with --lagrangian\n",
		           names);
		return 1;
	}
	else
	{
		s.L = ScalarDensity{s.doc.lagrangians[0].second};
		s.lag_name = s.doc.lagrangians[0].first;
	}
	if (jet_order(s.L.value) > s.doc.spec.max_order)
	{
		fmt::print(stderr, "error: jet-order cap {} is below the Lagrangian's order {}\n",
		           s.doc.spec.max_order, jet_order(s.L.value));
		return 1;
	}

	try
	{
		if (s.doc.has_params)
		{
			s.gctx = make_gauge_context(s.doc.spec, s.doc.gauge);
			s.lift = decompose_lift(s.gctx, s.doc.lift_fiber);
		}
		if (cmd == "check")
			return run_check(s, opt);
		return emit(compute(cmd, s), cmd, s, opt);
	}
	catch (const UsageError& e)
	{
		fmt::print(stderr, "error: {}\n", e.message);
		return 1;
	}
	catch (const EngineError& e)
	{
		fmt::print(stderr, "error: {}: {}\n", error_kind_name(e.kind), e.what());
		return 2;
	}
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"exact variational calculus on jet bundles"};
	app.require_subcommand(1);
	Options opt;
	const std::pair<const char*, const char*> cmds[] = {
	    {"el", "Euler-Lagrange source form of a Lagrangian"},
	    {"helmholtz", "Helmholtz tensor of the field equations"},
	    {"jacobi", "Jacobi morphism: operator table, or kernel residual along the lift"},
	    {"noether", "Noether current and the off-shell identity data"},
	    {"bianchi", "decomposition of the contracted identity into Bianchi terms"},
	    {"superpotential", "superpotential generating the strongly conserved current"},
	    {"invariance", "Lie-derivative residual of the Lagrangian along the lift"},
	    {"check", "run every applicable identity and print a pass/fail table"},
	};
	for (const auto& [name, desc] : cmds)
	{
		CLI::App* sub = app.add_subcommand(name, desc);
		sub->add_option("--model", opt.model_path, "model file (.jv)")->required();
		sub->add_option("--lagrangian", opt.lagrangian,
		                "Lagrangian to use (defaults to the file's only one)");
		sub->add_option("--format", opt.format, "output format: text, latex or json")
		    ->check(CLI::IsMember({"text", "latex", "json"}));
		sub->add_option("--out", opt.out, "write the result to a file instead of stdout");
		sub->add_option("--max-order", opt.max_order, "override the model's jet-order cap")
		    ->check(CLI::PositiveNumber);
	}
	try
	{
		app.parse(argc, argv);
	}
	catch (const CLI::ParseError& e)
	{
		int code = app.exit(e);
		return code == 0 ? 0 : 1;
	}
	return run(app.get_subcommands().front()->get_name(), opt);
}
