#include "jetvar/render.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <set>

namespace jetvar {

namespace {

std::string dirs_text(const MultiIndex& a, const BundleSpec& spec)
{
	std::string s;
	for (int d = 0; d < a.dim(); ++d)
		for (int r = 0; r < a[d]; ++r)
			s += spec.base[(size_t)d];
	return s;
}

std::string atom_text(const Atom& a, const BundleSpec& spec)
{
	switch (a.kind)
	{
	case AtomKind::Base:
		return spec.base[(size_t)a.index];
	case AtomKind::Jet:
		return a.deriv.is_zero()
		           ? spec.fields[(size_t)a.index]
		           : spec.fields[(size_t)a.index] + "_" + dirs_text(a.deriv, spec);
	case AtomKind::Param:
		return a.name;
	case AtomKind::Formal:
		return a.deriv.is_zero() ? a.name : a.name + "_" + dirs_text(a.deriv, spec);
	}
	return {};
}

/* Display order, distinct from the kernel's canonical order: inside a
 * monomial, symbolic constants come first and jets last (omega^2*y, not
 * y*omega^2); across terms, higher derivatives lead (y_tt + omega^2*y). */
int display_rank(AtomKind k)
{
	switch (k)
	{
	case AtomKind::Param:
		return 0;
	case AtomKind::Base:
		return 1;
	case AtomKind::Formal:
		return 2;
	case AtomKind::Jet:
		return 3;
	}
	return 4;
}

std::vector<PoweredAtom> display_factors(const Term& t)
{
	std::vector<PoweredAtom> mono = t.mono;
	std::stable_sort(mono.begin(), mono.end(), [](const PoweredAtom& x, const PoweredAtom& y) {
		int rx = display_rank(x.atom.kind), ry = display_rank(y.atom.kind);
		if (rx != ry)
			return rx < ry;
		return atom_cmp(x.atom, y.atom) < 0;
	});
	return mono;
}

std::vector<Term> display_terms(const Expression& e)
{
	std::vector<Term> terms = e.terms();
	auto max_jet = [](const Term& t) {
		int best = -1;
		for (const PoweredAtom& pa : t.mono)
			if (pa.atom.kind == AtomKind::Jet && pa.atom.deriv.order() > best)
				best = pa.atom.deriv.order();
		return best;
	};
	std::stable_sort(terms.begin(), terms.end(), [&](const Term& a, const Term& b) {
		int ja = max_jet(a), jb = max_jet(b);
		if (ja != jb)
			return ja > jb;
		return false;
	});
	return terms;
}

std::string term_text(const Term& t, const BundleSpec& spec)
{
	std::string factors;
	for (const PoweredAtom& pa : display_factors(t))
	{
		if (!factors.empty())
			factors += "*";
		factors += atom_text(pa.atom, spec);
		if (pa.exp > 1)
			factors += fmt::format("^{}", pa.exp);
	}
	if (factors.empty())
		return rational_to_string(t.coeff);
	if (t.coeff == 1)
		return factors;
	if (t.coeff == -1)
		return "-" + factors;
	return rational_to_string(t.coeff) + "*" + factors;
}

/* The shared sign-handling skeleton of the text and LaTeX renderers: an
 * all-negative multi-term expression is factored as -(...). */
template <class TermFn>
std::string join_terms(const Expression& e, TermFn&& term_fn, const char* neg_open,
                       const char* neg_close)
{
	std::vector<Term> terms = display_terms(e);
	bool all_neg = true;
	for (const Term& t : terms)
		if (t.coeff >= 0)
			all_neg = false;
	if (all_neg && terms.size() > 1)
	{
		std::string out = neg_open;
		bool first = true;
		for (const Term& t : terms)
		{
			Term pos = t;
			pos.coeff = Rational(-t.coeff);
			out += first ? term_fn(pos) : " + " + term_fn(pos);
			first = false;
		}
		return out + neg_close;
	}
	std::string out;
	bool first = true;
	for (const Term& t : terms)
	{
		if (first)
			out += term_fn(t);
		else if (t.coeff < 0)
		{
			Term pos = t;
			pos.coeff = Rational(-t.coeff);
			out += " - " + term_fn(pos);
		}
		else
			out += " + " + term_fn(t);
		first = false;
	}
	return out;
}

const std::set<std::string>& greek_names()
{
	static const std::set<std::string> names = {
	    "alpha", "beta",  "gamma",   "delta", "epsilon", "zeta", "eta",   "theta",
	    "iota",  "kappa", "lambda",  "mu",    "nu",      "xi",   "pi",    "rho",
	    "sigma", "tau",   "upsilon", "phi",   "chi",     "psi",  "omega", "varepsilon",
	    "varphi"};
	return names;
}

/* Name -> LaTeX: family indices become superscripts, trailing digits become
 * subscripts, Greek names become macros ("eps" is shorthand for
 * \varepsilon). */
std::string name_latex(const std::string& name)
{
	size_t br = name.find('[');
	if (br != std::string::npos && name.back() == ']')
		return name_latex(name.substr(0, br)) +
		       fmt::format("^{{{}}}", name.substr(br + 1, name.size() - br - 2));
	size_t cut = name.size();
	while (cut > 0 && name[cut - 1] >= '0' && name[cut - 1] <= '9')
		--cut;
	std::string head = name.substr(0, cut), tail = name.substr(cut);
	if (head == "eps")
		head = "\\varepsilon";
	else if (greek_names().count(head))
		head = "\\" + head;
	return tail.empty() ? head : fmt::format("{}_{{{}}}", head, tail);
}

std::string dirs_latex(const MultiIndex& a, const BundleSpec& spec)
{
	std::string s;
	for (int d = 0; d < a.dim(); ++d)
		for (int r = 0; r < a[d]; ++r)
		{
			if (!s.empty())
				s += " ";
			s += name_latex(spec.base[(size_t)d]);
		}
	return s;
}

std::string atom_latex(const Atom& a, const BundleSpec& spec)
{
	switch (a.kind)
	{
	case AtomKind::Base:
		return name_latex(spec.base[(size_t)a.index]);
	case AtomKind::Jet:
	{
		std::string nm = name_latex(spec.fields[(size_t)a.index]);
		return a.deriv.is_zero() ? nm
		                         : fmt::format("{{{}}}_{{{}}}", nm, dirs_latex(a.deriv, spec));
	}
	case AtomKind::Param:
		return name_latex(a.name);
	case AtomKind::Formal:
	{
		std::string nm = name_latex(a.name);
		return a.deriv.is_zero() ? nm
		                         : fmt::format("{{{}}}_{{{}}}", nm, dirs_latex(a.deriv, spec));
	}
	}
	return {};
}

std::string rational_latex(const Rational& q)
{
	if (q.get_den() == 1)
		return q.get_str();
	std::string sign = q < 0 ? "-" : "";
	Rational a = q < 0 ? Rational(-q) : q;
	return fmt::format("{}\\frac{{{}}}{{{}}}", sign, a.get_num().get_str(),
	                   a.get_den().get_str());
}

std::string term_latex(const Term& t, const BundleSpec& spec)
{
	std::string factors;
	for (const PoweredAtom& pa : display_factors(t))
	{
		if (!factors.empty())
			factors += " ";
		std::string at = atom_latex(pa.atom, spec);
		factors += pa.exp > 1 ? fmt::format("{{{}}}^{{{}}}", at, pa.exp) : at;
	}
	if (factors.empty())
		return rational_latex(t.coeff);
	if (t.coeff == 1)
		return factors;
	if (t.coeff == -1)
		return "-" + factors;
	return rational_latex(t.coeff) + " " + factors;
}

} // namespace

std::string render_text(const Expression& e, const BundleSpec& spec)
{
	if (e.is_zero())
		return "0";
	return join_terms(
	    e, [&](const Term& t) { return term_text(t, spec); }, "-(", ")");
}

std::string render_latex(const Expression& e, const BundleSpec& spec)
{
	if (e.is_zero())
		return "0";
	return join_terms(
	    e, [&](const Term& t) { return term_latex(t, spec); }, "-\\left(", "\\right)");
}

std::string render_json(const Expression& e, const BundleSpec& spec)
{
	nlohmann::json root;
	root["schema"] = "jetvar-expression/1";
	nlohmann::json terms = nlohmann::json::array();
	for (const Term& t : e.terms())
	{
		nlohmann::json jt;
		jt["coeff"] = rational_to_string(t.coeff);
		nlohmann::json factors = nlohmann::json::array();
		for (const PoweredAtom& pa : t.mono)
		{
			nlohmann::json f;
			f["power"] = pa.exp;
			switch (pa.atom.kind)
			{
			case AtomKind::Base:
				f["kind"] = "base";
				f["dir"] = pa.atom.index;
				f["name"] = spec.base[(size_t)pa.atom.index];
				break;
			case AtomKind::Jet:
				f["kind"] = "jet";
				f["field"] = pa.atom.index;
				f["name"] = spec.fields[(size_t)pa.atom.index];
				f["deriv"] = pa.atom.deriv.counts();
				break;
			case AtomKind::Param:
				f["kind"] = "param";
				f["name"] = pa.atom.name;
				break;
			case AtomKind::Formal:
				f["kind"] = "formal";
				f["name"] = pa.atom.name;
				f["deriv"] = pa.atom.deriv.counts();
				break;
			}
			factors.push_back(std::move(f));
		}
		jt["factors"] = std::move(factors);
		terms.push_back(std::move(jt));
	}
	root["terms"] = std::move(terms);
	return root.dump();
}

Expression expression_from_json(const std::string& text, const BundleSpec& spec)
{
	nlohmann::json root = nlohmann::json::parse(text);
	if (!root.is_object() || root.value("schema", "") != "jetvar-expression/1")
		throw std::invalid_argument("unsupported expression schema");
	auto read_deriv = [&](const nlohmann::json& f) {
		std::vector<int> counts = f.at("deriv").get<std::vector<int>>();
		if ((int)counts.size() != spec.n())
			throw std::invalid_argument("derivative record has the wrong dimension");
		for (int c : counts)
			if (c < 0)
				throw std::invalid_argument("negative derivative count");
		return MultiIndex(std::move(counts));
	};
	std::vector<Term> terms;
	for (const nlohmann::json& jt : root.at("terms"))
	{
		Term t;
		t.coeff = rational_from_string(jt.at("coeff").get<std::string>());
		for (const nlohmann::json& f : jt.at("factors"))
		{
			PoweredAtom pa;
			pa.exp = f.at("power").get<int>();
			if (pa.exp < 1)
				throw std::invalid_argument("factor power must be positive");
			std::string kind = f.at("kind").get<std::string>();
			if (kind == "base")
			{
				int dir = f.at("dir").get<int>();
				if (dir < 0 || dir >= spec.n())
					throw std::invalid_argument("base direction out of range");
				pa.atom = Atom::base(dir);
			}
			else if (kind == "jet")
			{
				int field = f.at("field").get<int>();
				if (field < 0 || field >= spec.m())
					throw std::invalid_argument("field index out of range");
				pa.atom = Atom::jet(field, read_deriv(f));
			}
			else if (kind == "param")
				pa.atom = Atom::param(f.at("name").get<std::string>());
			else if (kind == "formal")
				pa.atom = Atom::formal(f.at("name").get<std::string>(), read_deriv(f));
			else
				throw std::invalid_argument("unknown factor kind: " + kind);
			t.mono.push_back(std::move(pa));
		}
		terms.push_back(std::move(t));
	}
	return Expression::normalize(std::move(terms));
}

std::string render_document(const ModelDocument& doc)
{
	std::string out = "bundle {\n\tbase";
	for (const std::string& bn : doc.spec.base)
		out += " " + bn;
	out += "\n\tfield";
	for (const FieldDecl& fd : doc.field_decls)
		out += fd.count == 0 ? " " + fd.name : fmt::format(" {}[{}]", fd.name, fd.count);
	out += fmt::format("\n\torder {}\n}}\n", doc.spec.max_order);

	BundleSpec ext = doc.spec;
	if (doc.has_params)
	{
		out += "\nparams {\n";
		if (!doc.gauge.xi_names.empty())
		{
			out += "\txi";
			for (const std::string& nm : doc.gauge.xi_names)
				out += " " + nm;
			out += "\n";
		}
		if (!doc.gauge.eps_names.empty())
		{
			out += "\tgauge";
			for (const std::string& nm : doc.gauge.eps_names)
				out += " " + nm;
			out += "\n";
		}
		out += fmt::format("\tcaps r {} k {}\n}}\n", doc.gauge.r, doc.gauge.k);
		std::vector<std::string> extra = doc.gauge.xi_names;
		extra.insert(extra.end(), doc.gauge.eps_names.begin(), doc.gauge.eps_names.end());
		ext = doc.spec.with_fields_appended(extra);
	}

	bool any_lift = false;
	for (const Expression& c : doc.lift_fiber)
		if (!c.is_zero())
			any_lift = true;
	if (any_lift)
	{
		out += "\nlift {\n";
		for (size_t i = 0; i < doc.lift_fiber.size(); ++i)
			if (!doc.lift_fiber[i].is_zero())
				out += fmt::format("\t{} = {}\n", doc.spec.fields[i],
				                   render_text(doc.lift_fiber[i], ext));
		out += "}\n";
	}

	if (!doc.param_names.empty())
	{
		out += "\nparam";
		for (const std::string& nm : doc.param_names)
			out += " " + nm;
		out += "\n";
	}
	if (!doc.formal_names.empty())
	{
		out += doc.param_names.empty() ? "\nformal" : "formal";
		for (const std::string& nm : doc.formal_names)
			out += " " + nm;
		out += "\n";
	}
	for (const auto& [name, L] : doc.lagrangians)
		out += fmt::format("\nlagrangian {} = {}\n", name, render_text(L, doc.spec));
	return out;
}

} // namespace jetvar
