#include "jetvar/model.hpp"

#include <fmt/format.h>

#include <map>
#include <memory>
#include <set>

namespace jetvar {

std::string format_diagnostic(const Diagnostic& d)
{
	return fmt::format("error:{}:{}: {}", d.span.line, d.span.column, d.message);
}

namespace {

enum class Tok {
	Ident,
	Number,
	LBrace,
	RBrace,
	LBracket,
	RBracket,
	LParen,
	RParen,
	Plus,
	Minus,
	Star,
	Slash,
	Caret,
	Equals,
	Comma,
	Underscore,
	Newline,
	End,
};

const char* token_name(Tok k)
{
	switch (k)
	{
	case Tok::Ident:
		return "identifier";
	case Tok::Number:
		return "number";
	case Tok::LBrace:
		return "'{'";
	case Tok::RBrace:
		return "'}'";
	case Tok::LBracket:
		return "'['";
	case Tok::RBracket:
		return "']'";
	case Tok::LParen:
		return "'('";
	case Tok::RParen:
		return "')'";
	case Tok::Plus:
		return "'+'";
	case Tok::Minus:
		return "'-'";
	case Tok::Star:
		return "'*'";
	case Tok::Slash:
		return "'/'";
	case Tok::Caret:
		return "'^'";
	case Tok::Equals:
		return "'='";
	case Tok::Comma:
		return "','";
	case Tok::Underscore:
		return "'_'";
	case Tok::Newline:
		return "end of line";
	case Tok::End:
		return "end of input";
	}
	return "token";
}

struct Token {
	Tok kind = Tok::End;
	std::string text;
	Span span;
};

struct ParseAbort {};

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

/* One index argument inside brackets: a literal value or an index variable. */
struct IndexArg {
	bool is_var = false;
	int value = 0;
	std::string var;
	Span span;
};

/* One piece of a jet subscript: a run of concrete base directions (already
 * resolved by greedy longest-match) or a bracketed index variable/literal. */
struct SubItem {
	bool is_var = false;
	std::vector<int> dirs;
	std::string var;
	Span span;
};

struct Node;
using NodePtr = std::unique_ptr<Node>;

struct Node {
	enum class Kind { Number, Ref, Neg, Add, Sub, Mul, Div, Pow } kind = Kind::Number;
	Rational number;
	std::string name;
	std::vector<IndexArg> indices;
	std::vector<SubItem> subscript;
	NodePtr a, b;
	int expo = 0;
	Span span;
};

struct Symbol {
	enum class Kind {
		BaseCoord,
		ScalarField,
		FieldFamily,
		XiName,
		EpsName,
		ScalarParam,
		FormalFn,
		ConstDiag,
		DefName,
	} kind = Kind::BaseCoord;
	int index = 0; // direction / field / family start / parameter position
	int count = 0; // FieldFamily size
	std::vector<Rational> diag;
};

struct DefMacro {
	std::vector<std::string> params;
	NodePtr body;
};

using EvalEnv = std::map<std::string, int>;

struct Parser {
	std::vector<Diagnostic> diags;
	std::vector<Token> toks;
	size_t pos = 0;

	ModelDocument doc;
	std::map<std::string, Symbol> symbols;
	std::map<std::string, DefMacro> defs;
	std::set<std::string> lag_names;
	bool have_bundle = false;
	bool have_order = false;
	bool have_lift = false;
	Span params_span, lift_span;
	BundleSpec ext; // spec with parameter fields appended
	int xi_base = -1, eps_base = -1;

	[[noreturn]] void fail(Span s, std::string msg)
	{
		diags.push_back({std::move(msg), s});
		throw ParseAbort{};
	}

	// ------------------------------------------------------------------ lexing

	void lex(const std::string& text)
	{
		int line = 1, col = 1;
		size_t i = 0;
		auto push = [&](Tok k, std::string t, int length) {
			toks.push_back({k, std::move(t), Span{line, col, length}});
			col += length;
		};
		while (i < text.size())
		{
			char c = text[i];
			if (c == '\n')
			{
				toks.push_back({Tok::Newline, "\n", Span{line, col, 1}});
				++line;
				col = 1;
				++i;
				continue;
			}
			if (c == ' ' || c == '\t' || c == '\r')
			{
				++col;
				++i;
				continue;
			}
			if (c == '#')
			{
				while (i < text.size() && text[i] != '\n')
				{
					++i;
					++col;
				}
				continue;
			}
			if (is_ident_start(c))
			{
				size_t j = i + 1;
				while (j < text.size() && is_ident_char(text[j]))
					++j;
				push(Tok::Ident, text.substr(i, j - i), (int)(j - i));
				i = j;
				continue;
			}
			if (is_digit(c))
			{
				size_t j = i + 1;
				while (j < text.size() && is_digit(text[j]))
					++j;
				push(Tok::Number, text.substr(i, j - i), (int)(j - i));
				i = j;
				continue;
			}
			Tok k;
			switch (c)
			{
			case '{': k = Tok::LBrace; break;
			case '}': k = Tok::RBrace; break;
			case '[': k = Tok::LBracket; break;
			case ']': k = Tok::RBracket; break;
			case '(': k = Tok::LParen; break;
			case ')': k = Tok::RParen; break;
			case '+': k = Tok::Plus; break;
			case '-': k = Tok::Minus; break;
			case '*': k = Tok::Star; break;
			case '/': k = Tok::Slash; break;
			case '^': k = Tok::Caret; break;
			case '=': k = Tok::Equals; break;
			case ',': k = Tok::Comma; break;
			case '_': k = Tok::Underscore; break;
			default:
				fail(Span{line, col, 1}, fmt::format("unexpected character '{}'", c));
			}
			push(k, std::string(1, c), 1);
			++i;
		}
		toks.push_back({Tok::End, "", Span{line, col, 0}});
	}

	// ---------------------------------------------------------------- cursors

	const Token& peek() const { return toks[pos]; }
	const Token& prev() const { return toks[pos - 1]; }
	bool at(Tok k) const { return peek().kind == k; }

	const Token& take()
	{
		const Token& t = toks[pos];
		if (t.kind != Tok::End)
			++pos;
		return t;
	}

	const Token& expect(Tok k, const char* what)
	{
		if (!at(k))
			fail(peek().span, fmt::format("expected {} ({}), found {}", token_name(k), what,
			                              peek().kind == Tok::Ident || peek().kind == Tok::Number
			                                  ? fmt::format("'{}'", peek().text)
			                                  : token_name(peek().kind)));
		return take();
	}

	/* Token glued to the previous one with no intervening whitespace. */
	bool adjacent() const
	{
		return pos > 0 && prev().span.line == peek().span.line &&
		       prev().span.column + prev().span.length == peek().span.column;
	}

	void skip_newlines()
	{
		while (at(Tok::Newline))
			take();
	}

	void end_line(const char* what)
	{
		if (at(Tok::RBrace) || at(Tok::End))
			return;
		expect(Tok::Newline, what);
	}

	int take_int(const char* what)
	{
		const Token& t = expect(Tok::Number, what);
		try
		{
			return std::stoi(t.text);
		}
		catch (const std::exception&)
		{
			fail(t.span, "number out of range");
		}
	}

	// ---------------------------------------------------------------- symbols

	void declare(const Token& name, Symbol sym)
	{
		if (symbols.count(name.text))
			fail(name.span, fmt::format("duplicate declaration of '{}'", name.text));
		symbols.emplace(name.text, std::move(sym));
	}

	int field_count() const { return doc.spec.m(); }

	// ------------------------------------------------------------- statements

	void run(const std::string& text)
	{
		lex(text);
		skip_newlines();
		while (!at(Tok::End))
		{
			const Token& kw = expect(Tok::Ident, "a declaration keyword");
			if (!have_bundle && kw.text != "bundle")
				fail(kw.span, "the bundle block must come first");
			if (kw.text == "bundle")
				parse_bundle(kw);
			else if (kw.text == "params")
				parse_params(kw);
			else if (kw.text == "lift")
				parse_lift(kw);
			else if (kw.text == "param")
				parse_scalar_params();
			else if (kw.text == "formal")
				parse_formals();
			else if (kw.text == "const")
				parse_const();
			else if (kw.text == "def")
				parse_def();
			else if (kw.text == "lagrangian")
				parse_lagrangian();
			else
				fail(kw.span, fmt::format("unknown declaration '{}'", kw.text));
			skip_newlines();
		}
		finish();
	}

	void open_block(const char* what)
	{
		expect(Tok::LBrace, what);
		skip_newlines();
	}

	void parse_bundle(const Token& kw)
	{
		if (have_bundle)
			fail(kw.span, "duplicate bundle block");
		have_bundle = true;
		open_block("bundle block body");
		bool have_base = false, have_field = false;
		while (!at(Tok::RBrace))
		{
			const Token& st = expect(Tok::Ident, "a bundle statement");
			if (st.text == "base")
			{
				have_base = true;
				do
				{
					const Token& nm = expect(Tok::Ident, "a base coordinate name");
					declare(nm, Symbol{Symbol::Kind::BaseCoord, (int)doc.spec.base.size(), 0, {}});
					doc.spec.base.push_back(nm.text);
				} while (at(Tok::Ident));
			}
			else if (st.text == "field")
			{
				have_field = true;
				do
				{
					const Token& nm = expect(Tok::Ident, "a field name");
					if (at(Tok::LBracket) && adjacent())
					{
						take();
						const Token& ct = peek();
						int count = take_int("family size");
						if (count < 1)
							fail(ct.span, "family size must be positive");
						expect(Tok::RBracket, "closing the family size");
						declare(nm, Symbol{Symbol::Kind::FieldFamily, field_count(), count, {}});
						doc.field_decls.push_back({nm.text, count});
						for (int j = 0; j < count; ++j)
							doc.spec.fields.push_back(fmt::format("{}[{}]", nm.text, j));
					}
					else
					{
						declare(nm, Symbol{Symbol::Kind::ScalarField, field_count(), 0, {}});
						doc.field_decls.push_back({nm.text, 0});
						doc.spec.fields.push_back(nm.text);
					}
				} while (at(Tok::Ident));
			}
			else if (st.text == "order")
			{
				if (have_order)
					fail(st.span, "duplicate order statement");
				have_order = true;
				const Token& ot = peek();
				doc.spec.max_order = take_int("the jet-order cap");
				if (doc.spec.max_order < 1)
					fail(ot.span, "the jet-order cap must be at least 1");
			}
			else
				fail(st.span, fmt::format("unknown bundle statement '{}'", st.text));
			end_line("after the bundle statement");
			skip_newlines();
		}
		expect(Tok::RBrace, "closing the bundle block");
		end_line("after the bundle block");
		if (!have_base)
			fail(kw.span, "bundle block is missing a base statement");
		if (!have_field)
			fail(kw.span, "bundle block is missing a field statement");
		if (!have_order)
			fail(kw.span, "bundle block is missing an order statement");
		/* greedy subscript splitting needs prefix-free base names */
		for (size_t i = 0; i < doc.spec.base.size(); ++i)
			for (size_t j = 0; j < doc.spec.base.size(); ++j)
				if (i != j && doc.spec.base[j].size() > doc.spec.base[i].size() &&
				    doc.spec.base[j].compare(0, doc.spec.base[i].size(), doc.spec.base[i]) == 0)
					fail(kw.span,
					     fmt::format("base coordinate '{}' is a prefix of '{}'; jet subscripts would be ambiguous",
					                 doc.spec.base[i], doc.spec.base[j]));
		ext = doc.spec;
	}

	void parse_params(const Token& kw)
	{
		if (doc.has_params)
			fail(kw.span, "duplicate params block");
		if (have_lift)
			fail(kw.span, "params block must precede the lift block");
		doc.has_params = true;
		params_span = kw.span;
		open_block("params block body");
		bool have_caps = false;
		while (!at(Tok::RBrace))
		{
			const Token& st = expect(Tok::Ident, "a params statement");
			if (st.text == "xi")
			{
				if (!doc.gauge.xi_names.empty())
					fail(st.span, "duplicate xi statement");
				do
				{
					const Token& nm = expect(Tok::Ident, "a base-parameter name");
					declare(nm, Symbol{Symbol::Kind::XiName, (int)doc.gauge.xi_names.size(), 0, {}});
					doc.gauge.xi_names.push_back(nm.text);
				} while (at(Tok::Ident));
			}
			else if (st.text == "gauge")
			{
				if (!doc.gauge.eps_names.empty())
					fail(st.span, "duplicate gauge statement");
				do
				{
					const Token& nm = expect(Tok::Ident, "a gauge-parameter name");
					declare(nm, Symbol{Symbol::Kind::EpsName, (int)doc.gauge.eps_names.size(), 0, {}});
					doc.gauge.eps_names.push_back(nm.text);
				} while (at(Tok::Ident));
			}
			else if (st.text == "caps")
			{
				if (have_caps)
					fail(st.span, "duplicate caps statement");
				have_caps = true;
				const Token& rt = expect(Tok::Ident, "caps syntax: caps r <int> k <int>");
				if (rt.text != "r")
					fail(rt.span, "caps syntax: caps r <int> k <int>");
				doc.gauge.r = take_int("the gauge-sector jet cap");
				const Token& kt = expect(Tok::Ident, "caps syntax: caps r <int> k <int>");
				if (kt.text != "k")
					fail(kt.span, "caps syntax: caps r <int> k <int>");
				doc.gauge.k = take_int("the base-sector jet cap");
			}
			else
				fail(st.span, fmt::format("unknown params statement '{}'", st.text));
			end_line("after the params statement");
			skip_newlines();
		}
		expect(Tok::RBrace, "closing the params block");
		end_line("after the params block");
		if (doc.gauge.xi_names.empty() && doc.gauge.eps_names.empty())
			fail(kw.span, "params block declares no parameters");
		if (!doc.gauge.xi_names.empty() && (int)doc.gauge.xi_names.size() != doc.spec.n())
			fail(kw.span, fmt::format("xi needs one name per base direction ({} declared, {} needed)",
			                          doc.gauge.xi_names.size(), doc.spec.n()));
		try
		{
			doc.gauge.validate(doc.spec);
		}
		catch (const EngineError& err)
		{
			fail(kw.span, err.what());
		}
		xi_base = doc.gauge.has_base_sector() ? field_count() : -1;
		eps_base = doc.gauge.gauge_count() > 0
		               ? field_count() + (int)doc.gauge.xi_names.size()
		               : -1;
		std::vector<std::string> extra = doc.gauge.xi_names;
		extra.insert(extra.end(), doc.gauge.eps_names.begin(), doc.gauge.eps_names.end());
		ext = doc.spec.with_fields_appended(extra);
	}

	void parse_lift(const Token& kw)
	{
		if (have_lift)
			fail(kw.span, "duplicate lift block");
		if (!doc.has_params)
			fail(kw.span, "lift block requires a params block");
		have_lift = true;
		lift_span = kw.span;
		doc.lift_fiber.assign((size_t)field_count(), Expression());
		std::vector<bool> assigned((size_t)field_count(), false);
		open_block("lift block body");
		while (!at(Tok::RBrace))
		{
			const Token& nm = expect(Tok::Ident, "a field reference");
			auto it = symbols.find(nm.text);
			if (it == symbols.end())
				fail(nm.span, fmt::format("undeclared identifier '{}'", nm.text));
			const Symbol& sym = it->second;
			if (sym.kind != Symbol::Kind::ScalarField && sym.kind != Symbol::Kind::FieldFamily)
				fail(nm.span, fmt::format("'{}' is not a field", nm.text));
			std::vector<IndexArg> lhs;
			while (at(Tok::LBracket) && adjacent())
			{
				take();
				lhs.push_back(parse_index_arg());
				expect(Tok::RBracket, "closing the index");
			}
			if (sym.kind == Symbol::Kind::ScalarField && !lhs.empty())
				fail(nm.span, fmt::format("'{}' is a scalar field and takes no index", nm.text));
			if (sym.kind == Symbol::Kind::FieldFamily && lhs.size() != 1)
				fail(nm.span, fmt::format("family '{}' takes exactly one index", nm.text));
			expect(Tok::Equals, "the lift assignment");
			NodePtr rhs = parse_expr();
			end_line("after the lift assignment");
			skip_newlines();

			/* expand index variables on the left over the family range */
			EvalEnv env;
			auto assign_one = [&](int field, Span where) {
				if (assigned[(size_t)field])
					fail(where, fmt::format("duplicate lift assignment for field '{}'",
					                        doc.spec.fields[(size_t)field]));
				assigned[(size_t)field] = true;
				doc.lift_fiber[(size_t)field] = eval_summed(*rhs, env, true);
			};
			if (sym.kind == Symbol::Kind::ScalarField)
				assign_one(sym.index, nm.span);
			else if (!lhs[0].is_var)
			{
				if (lhs[0].value < 0 || lhs[0].value >= sym.count)
					fail(lhs[0].span, fmt::format("index {} out of range for family '{}' (size {})",
					                              lhs[0].value, nm.text, sym.count));
				assign_one(sym.index + lhs[0].value, nm.span);
			}
			else
				for (int v = 0; v < sym.count; ++v)
				{
					env[lhs[0].var] = v;
					assign_one(sym.index + v, nm.span);
				}
		}
		expect(Tok::RBrace, "closing the lift block");
		end_line("after the lift block");
	}

	void parse_scalar_params()
	{
		do
		{
			const Token& nm = expect(Tok::Ident, "a constant name");
			declare(nm, Symbol{Symbol::Kind::ScalarParam, 0, 0, {}});
			doc.param_names.push_back(nm.text);
		} while (at(Tok::Ident));
		end_line("after the param declaration");
	}

	void parse_formals()
	{
		do
		{
			const Token& nm = expect(Tok::Ident, "a formal function name");
			declare(nm, Symbol{Symbol::Kind::FormalFn, 0, 0, {}});
			doc.formal_names.push_back(nm.text);
		} while (at(Tok::Ident));
		end_line("after the formal declaration");
	}

	Rational parse_signed_rational()
	{
		bool neg = false;
		if (at(Tok::Minus))
		{
			take();
			neg = true;
		}
		const Token& num = expect(Tok::Number, "a rational entry");
		std::string text = num.text;
		if (at(Tok::Slash))
		{
			take();
			const Token& den = expect(Tok::Number, "a denominator");
			if (den.text.find_first_not_of('0') == std::string::npos)
				fail(den.span, "zero denominator");
			text += "/" + den.text;
		}
		Rational q = rational_from_string(text);
		return neg ? Rational(-q) : q;
	}

	void parse_const()
	{
		const Token& nm = expect(Tok::Ident, "a constant tensor name");
		expect(Tok::Equals, "the constant definition");
		const Token& fn = expect(Tok::Ident, "diag(...)");
		if (fn.text != "diag")
			fail(fn.span, "only diagonal constant tensors are supported: diag(...)");
		expect(Tok::LParen, "the diagonal entries");
		std::vector<Rational> entries;
		entries.push_back(parse_signed_rational());
		while (at(Tok::Comma))
		{
			take();
			entries.push_back(parse_signed_rational());
		}
		expect(Tok::RParen, "closing the diagonal entries");
		end_line("after the const declaration");
		if ((int)entries.size() != doc.spec.n())
			fail(nm.span, fmt::format("diag needs one entry per base direction ({} given, {} needed)",
			                          entries.size(), doc.spec.n()));
		declare(nm, Symbol{Symbol::Kind::ConstDiag, 0, 0, std::move(entries)});
	}

	void parse_def()
	{
		const Token& nm = expect(Tok::Ident, "a definition name");
		DefMacro macro;
		while (at(Tok::LBracket) && adjacent())
		{
			take();
			const Token& v = expect(Tok::Ident, "an index variable");
			for (const std::string& p : macro.params)
				if (p == v.text)
					fail(v.span, fmt::format("repeated index variable '{}'", v.text));
			if (symbols.count(v.text))
				fail(v.span, fmt::format("index variable '{}' shadows a declaration", v.text));
			macro.params.push_back(v.text);
			expect(Tok::RBracket, "closing the index variable");
		}
		expect(Tok::Equals, "the definition body");
		macro.body = parse_expr();
		end_line("after the definition");
		validate_refs(*macro.body, macro.params);
		declare(nm, Symbol{Symbol::Kind::DefName, 0, (int)macro.params.size(), {}});
		defs.emplace(nm.text, std::move(macro));
	}

	void parse_lagrangian()
	{
		const Token& nm = expect(Tok::Ident, "a Lagrangian name");
		if (!lag_names.insert(nm.text).second)
			fail(nm.span, fmt::format("duplicate Lagrangian '{}'", nm.text));
		expect(Tok::Equals, "the Lagrangian body");
		NodePtr body = parse_expr();
		end_line("after the Lagrangian");
		EvalEnv env;
		doc.lagrangians.emplace_back(nm.text, eval_summed(*body, env, false));
	}

	void finish()
	{
		if (!have_bundle)
			fail(peek().span, "empty input: a bundle block is required");
		if (doc.has_params && !have_lift)
		{
			doc.lift_fiber.assign((size_t)field_count(), Expression());
			lift_span = params_span;
		}
		if (doc.has_params)
		{
			try
			{
				GaugeContext ctx = make_gauge_context(doc.spec, doc.gauge);
				decompose_lift(ctx, doc.lift_fiber);
			}
			catch (const EngineError& err)
			{
				fail(lift_span, err.what());
			}
		}
	}

	// ------------------------------------------------------------ expressions

	IndexArg parse_index_arg()
	{
		IndexArg arg;
		if (at(Tok::Number))
		{
			const Token& t = peek();
			arg.value = take_int("an index");
			arg.span = t.span;
		}
		else
		{
			const Token& t = expect(Tok::Ident, "an index");
			arg.is_var = true;
			arg.var = t.text;
			arg.span = t.span;
		}
		return arg;
	}

	/* Split a concrete subscript chunk into base directions by greedy
	 * longest-match; base names are prefix-free, so this is unambiguous. */
	std::vector<int> split_subscript(const Token& chunk)
	{
		std::vector<int> dirs;
		const std::string& s = chunk.text;
		size_t at_pos = 0;
		while (at_pos < s.size())
		{
			int best = -1;
			size_t best_len = 0;
			for (int d = 0; d < doc.spec.n(); ++d)
			{
				const std::string& bn = doc.spec.base[(size_t)d];
				if (bn.size() > best_len && s.compare(at_pos, bn.size(), bn) == 0)
				{
					best = d;
					best_len = bn.size();
				}
			}
			if (best < 0)
				fail(Span{chunk.span.line, chunk.span.column + (int)at_pos,
				          (int)(s.size() - at_pos)},
				     fmt::format("cannot resolve jet subscript '{}' against the declared base coordinates",
				                 s.substr(at_pos)));
			dirs.push_back(best);
			at_pos += best_len;
		}
		return dirs;
	}

	NodePtr parse_expr()
	{
		NodePtr lhs = parse_term();
		while (at(Tok::Plus) || at(Tok::Minus))
		{
			bool plus = at(Tok::Plus);
			Span op = take().span;
			NodePtr rhs = parse_term();
			NodePtr node = std::make_unique<Node>();
			node->kind = plus ? Node::Kind::Add : Node::Kind::Sub;
			node->span = op;
			node->a = std::move(lhs);
			node->b = std::move(rhs);
			lhs = std::move(node);
		}
		return lhs;
	}

	NodePtr parse_term()
	{
		NodePtr lhs = parse_factor();
		while (at(Tok::Star) || at(Tok::Slash))
		{
			bool mul = at(Tok::Star);
			Span op = take().span;
			NodePtr rhs = parse_factor();
			NodePtr node = std::make_unique<Node>();
			node->kind = mul ? Node::Kind::Mul : Node::Kind::Div;
			node->span = op;
			node->a = std::move(lhs);
			node->b = std::move(rhs);
			lhs = std::move(node);
		}
		return lhs;
	}

	NodePtr parse_factor()
	{
		if (at(Tok::Minus))
		{
			Span op = take().span;
			NodePtr inner = parse_factor();
			NodePtr node = std::make_unique<Node>();
			node->kind = Node::Kind::Neg;
			node->span = op;
			node->a = std::move(inner);
			return node;
		}
		NodePtr base = parse_primary();
		if (at(Tok::Caret))
		{
			Span op = take().span;
			const Token& et = peek();
			int e = take_int("an exponent");
			if (e > 64)
				fail(et.span, "exponent too large");
			NodePtr node = std::make_unique<Node>();
			node->kind = Node::Kind::Pow;
			node->span = op;
			node->a = std::move(base);
			node->expo = e;
			return node;
		}
		return base;
	}

	NodePtr parse_primary()
	{
		if (at(Tok::Number))
		{
			const Token& t = take();
			NodePtr node = std::make_unique<Node>();
			node->kind = Node::Kind::Number;
			node->number = rational_from_string(t.text);
			node->span = t.span;
			return node;
		}
		if (at(Tok::LParen))
		{
			take();
			NodePtr inner = parse_expr();
			expect(Tok::RParen, "closing the parenthesis");
			return inner;
		}
		const Token& nm = expect(Tok::Ident, "an expression");
		NodePtr node = std::make_unique<Node>();
		node->kind = Node::Kind::Ref;
		node->name = nm.text;
		node->span = nm.span;
		while (at(Tok::LBracket) && adjacent())
		{
			take();
			node->indices.push_back(parse_index_arg());
			expect(Tok::RBracket, "closing the index");
		}
		if (at(Tok::Underscore) && adjacent())
		{
			take();
			bool any = false;
			while (adjacent() && (at(Tok::Ident) || at(Tok::LBracket)))
			{
				if (at(Tok::Ident))
				{
					const Token& chunk = take();
					SubItem item;
					item.dirs = split_subscript(chunk);
					item.span = chunk.span;
					node->subscript.push_back(std::move(item));
				}
				else
				{
					take();
					IndexArg arg = parse_index_arg();
					expect(Tok::RBracket, "closing the subscript index");
					SubItem item;
					if (arg.is_var)
					{
						item.is_var = true;
						item.var = arg.var;
					}
					else
					{
						if (arg.value < 0 || arg.value >= doc.spec.n())
							fail(arg.span, fmt::format("direction index {} out of range", arg.value));
						item.dirs.push_back(arg.value);
					}
					item.span = arg.span;
					node->subscript.push_back(std::move(item));
				}
				any = true;
			}
			if (!any)
				fail(prev().span, "empty jet subscript");
			int order = 0;
			for (const SubItem& it : node->subscript)
				order += it.is_var ? 1 : (int)it.dirs.size();
			if (order > doc.spec.max_order)
				fail(nm.span, fmt::format("jet order {} exceeds the declared cap {}", order,
				                          doc.spec.max_order));
		}
		return node;
	}

	// ------------------------------------------------------------- validation

	/* Check that every reference in a definition body resolves; free index
	 * variables beyond the bound set are legal (they will be summed). */
	void validate_refs(const Node& node, const std::vector<std::string>&)
	{
		if (node.kind == Node::Kind::Ref && !symbols.count(node.name))
			fail(node.span, fmt::format("undeclared identifier '{}'", node.name));
		if (node.a)
			validate_refs(*node.a, {});
		if (node.b)
			validate_refs(*node.b, {});
	}

	// ------------------------------------------------------------- evaluation

	void collect_free(const Node& node, const EvalEnv& env, std::set<std::string>& out) const
	{
		for (const IndexArg& a : node.indices)
			if (a.is_var && !env.count(a.var))
				out.insert(a.var);
		for (const SubItem& s : node.subscript)
			if (s.is_var && !env.count(s.var))
				out.insert(s.var);
		if (node.a)
			collect_free(*node.a, env, out);
		if (node.b)
			collect_free(*node.b, env, out);
	}

	/* Evaluate with all free index variables summed over the base directions. */
	Expression eval_summed(const Node& node, EvalEnv env, bool with_params)
	{
		std::set<std::string> free_vars;
		collect_free(node, env, free_vars);
		std::vector<std::string> order(free_vars.begin(), free_vars.end());
		Expression sum;
		std::function<void(size_t)> loop = [&](size_t level) {
			if (level == order.size())
			{
				sum += eval(node, env, with_params);
				return;
			}
			for (int v = 0; v < doc.spec.n(); ++v)
			{
				env[order[level]] = v;
				loop(level + 1);
			}
		};
		loop(0);
		return sum;
	}

	int index_value(const IndexArg& a, const EvalEnv& env) const
	{
		if (!a.is_var)
			return a.value;
		auto it = env.find(a.var);
		return it == env.end() ? -1 : it->second;
	}

	std::optional<Rational> as_constant(const Expression& e) const
	{
		if (e.is_zero())
			return make_rational(0);
		const auto& terms = e.terms();
		if (terms.size() == 1 && terms[0].mono.empty())
			return terms[0].coeff;
		return std::nullopt;
	}

	Expression eval(const Node& node, const EvalEnv& env, bool with_params)
	{
		switch (node.kind)
		{
		case Node::Kind::Number:
			return Expression::constant(node.number);
		case Node::Kind::Neg:
			return -eval(*node.a, env, with_params);
		case Node::Kind::Add:
			return eval(*node.a, env, with_params) + eval(*node.b, env, with_params);
		case Node::Kind::Sub:
			return eval(*node.a, env, with_params) - eval(*node.b, env, with_params);
		case Node::Kind::Mul:
			return eval(*node.a, env, with_params) * eval(*node.b, env, with_params);
		case Node::Kind::Div:
		{
			Expression num = eval(*node.a, env, with_params);
			Expression den = eval(*node.b, env, with_params);
			std::optional<Rational> q = as_constant(den);
			if (!q)
				fail(node.span, "division only by nonzero constants");
			if (*q == 0)
				fail(node.span, "division by zero");
			return num.scaled(Rational(1 / *q));
		}
		case Node::Kind::Pow:
			return eval(*node.a, env, with_params).pow(node.expo);
		case Node::Kind::Ref:
			return eval_ref(node, env, with_params);
		}
		return Expression();
	}

	MultiIndex subscript_index(const Node& node, const EvalEnv& env)
	{
		MultiIndex alpha = MultiIndex::zero(doc.spec.n());
		for (const SubItem& item : node.subscript)
		{
			if (item.is_var)
			{
				auto it = env.find(item.var);
				if (it == env.end() || it->second < 0 || it->second >= doc.spec.n())
					fail(item.span, fmt::format("direction index {} out of range in jet subscript",
					                            it == env.end() ? -1 : it->second));
				alpha = alpha.plus(it->second);
			}
			else
				for (int d : item.dirs)
					alpha = alpha.plus(d);
		}
		return alpha;
	}

	void forbid_indices(const Node& node, const char* what)
	{
		if (!node.indices.empty())
			fail(node.indices[0].span, fmt::format("'{}' is {} and takes no index", node.name, what));
	}

	void forbid_subscript(const Node& node, const char* what)
	{
		if (!node.subscript.empty())
			fail(node.subscript[0].span,
			     fmt::format("'{}' is {} and takes no jet subscript", node.name, what));
	}

	Expression eval_ref(const Node& node, const EvalEnv& env, bool with_params)
	{
		auto it = symbols.find(node.name);
		if (it == symbols.end())
			fail(node.span, fmt::format("undeclared identifier '{}'", node.name));
		const Symbol& sym = it->second;
		switch (sym.kind)
		{
		case Symbol::Kind::BaseCoord:
			forbid_indices(node, "a base coordinate");
			forbid_subscript(node, "a base coordinate");
			return Expression::base(sym.index);
		case Symbol::Kind::ScalarField:
			forbid_indices(node, "a scalar field");
			return Expression::jet(sym.index, subscript_index(node, env));
		case Symbol::Kind::FieldFamily:
		{
			if (node.indices.size() != 1)
				fail(node.span, fmt::format("family '{}' takes exactly one index", node.name));
			int v = index_value(node.indices[0], env);
			if (v < 0 || v >= sym.count)
				fail(node.indices[0].span,
				     fmt::format("index {} out of range for family '{}' (size {})", v, node.name,
				                 sym.count));
			return Expression::jet(sym.index + v, subscript_index(node, env));
		}
		case Symbol::Kind::XiName:
		case Symbol::Kind::EpsName:
		{
			if (!with_params)
				fail(node.span,
				     fmt::format("parameter '{}' may not appear in a Lagrangian", node.name));
			forbid_indices(node, "a parameter");
			int field = sym.kind == Symbol::Kind::XiName ? xi_base + sym.index
			                                             : eps_base + sym.index;
			return Expression::jet(field, subscript_index(node, env));
		}
		case Symbol::Kind::ScalarParam:
			forbid_indices(node, "a symbolic constant");
			forbid_subscript(node, "a symbolic constant");
			return Expression::param(node.name);
		case Symbol::Kind::FormalFn:
			forbid_indices(node, "a formal function");
			return Expression::formal(node.name, subscript_index(node, env));
		case Symbol::Kind::ConstDiag:
		{
			if (node.indices.size() != 2)
				fail(node.span, fmt::format("constant tensor '{}' takes exactly two indices", node.name));
			forbid_subscript(node, "a constant tensor");
			int a = index_value(node.indices[0], env);
			int b = index_value(node.indices[1], env);
			if (a < 0 || a >= doc.spec.n())
				fail(node.indices[0].span, fmt::format("index {} out of range", a));
			if (b < 0 || b >= doc.spec.n())
				fail(node.indices[1].span, fmt::format("index {} out of range", b));
			return a == b ? Expression::constant(sym.diag[(size_t)a]) : Expression();
		}
		case Symbol::Kind::DefName:
		{
			const DefMacro& macro = defs.at(node.name);
			forbid_subscript(node, "a definition");
			if ((int)node.indices.size() != (int)macro.params.size())
				fail(node.span, fmt::format("definition '{}' expects {} indices, {} given", node.name,
				                            macro.params.size(), node.indices.size()));
			EvalEnv inner;
			for (size_t i = 0; i < macro.params.size(); ++i)
			{
				int v = index_value(node.indices[i], env);
				if (v < 0)
					fail(node.indices[i].span,
					     fmt::format("unbound index variable '{}'", node.indices[i].var));
				inner[macro.params[i]] = v;
			}
			return eval_summed(*macro.body, std::move(inner), with_params);
		}
		}
		return Expression();
	}

	// ---------------------------------------------------- expression frontend

	void load_document(const ModelDocument& from, bool with_params)
	{
		doc.spec = from.spec;
		doc.field_decls = from.field_decls;
		doc.gauge = from.gauge;
		doc.has_params = from.has_params && with_params;
		int dir = 0;
		for (const std::string& bn : from.spec.base)
			symbols.emplace(bn, Symbol{Symbol::Kind::BaseCoord, dir++, 0, {}});
		int field = 0;
		for (const FieldDecl& fd : from.field_decls)
		{
			if (fd.count == 0)
				symbols.emplace(fd.name, Symbol{Symbol::Kind::ScalarField, field, 0, {}});
			else
				symbols.emplace(fd.name, Symbol{Symbol::Kind::FieldFamily, field, fd.count, {}});
			field += fd.count == 0 ? 1 : fd.count;
		}
		for (const std::string& nm : from.param_names)
			symbols.emplace(nm, Symbol{Symbol::Kind::ScalarParam, 0, 0, {}});
		for (const std::string& nm : from.formal_names)
			symbols.emplace(nm, Symbol{Symbol::Kind::FormalFn, 0, 0, {}});
		ext = doc.spec;
		if (doc.has_params)
		{
			int i = 0;
			for (const std::string& nm : from.gauge.xi_names)
				symbols.emplace(nm, Symbol{Symbol::Kind::XiName, i++, 0, {}});
			i = 0;
			for (const std::string& nm : from.gauge.eps_names)
				symbols.emplace(nm, Symbol{Symbol::Kind::EpsName, i++, 0, {}});
			xi_base = from.gauge.has_base_sector() ? doc.spec.m() : -1;
			eps_base = from.gauge.gauge_count() > 0
			               ? doc.spec.m() + (int)from.gauge.xi_names.size()
			               : -1;
			std::vector<std::string> extra = from.gauge.xi_names;
			extra.insert(extra.end(), from.gauge.eps_names.begin(), from.gauge.eps_names.end());
			ext = doc.spec.with_fields_appended(extra);
		}
	}

	Expression run_expression(const std::string& text, bool with_params)
	{
		lex(text);
		skip_newlines();
		NodePtr body = parse_expr();
		skip_newlines();
		if (!at(Tok::End))
			fail(peek().span, "trailing input after the expression");
		EvalEnv env;
		return eval_summed(*body, env, with_params);
	}
};

} // namespace

ParseResult parse_model(const std::string& text)
{
	Parser p;
	try
	{
		p.run(text);
	}
	catch (const ParseAbort&)
	{
		return {std::nullopt, std::move(p.diags)};
	}
	return {std::move(p.doc), std::move(p.diags)};
}

ExpressionResult parse_expression(const std::string& text, const ModelDocument& doc,
                                  bool with_params)
{
	Parser p;
	p.load_document(doc, with_params);
	try
	{
		Expression e = p.run_expression(text, with_params);
		return {std::move(e), std::move(p.diags)};
	}
	catch (const ParseAbort&)
	{
		return {std::nullopt, std::move(p.diags)};
	}
}

bool same_document(const ModelDocument& a, const ModelDocument& b)
{
	auto same_decls = [](const std::vector<FieldDecl>& x, const std::vector<FieldDecl>& y) {
		if (x.size() != y.size())
			return false;
		for (size_t i = 0; i < x.size(); ++i)
			if (x[i].name != y[i].name || x[i].count != y[i].count)
				return false;
		return true;
	};
	if (a.spec.base != b.spec.base || a.spec.fields != b.spec.fields ||
	    a.spec.max_order != b.spec.max_order || !same_decls(a.field_decls, b.field_decls))
		return false;
	if (a.has_params != b.has_params || a.gauge.xi_names != b.gauge.xi_names ||
	    a.gauge.eps_names != b.gauge.eps_names || a.gauge.r != b.gauge.r ||
	    a.gauge.k != b.gauge.k)
		return false;
	if (a.param_names != b.param_names || a.formal_names != b.formal_names)
		return false;
	if (a.lift_fiber.size() != b.lift_fiber.size())
		return false;
	for (size_t i = 0; i < a.lift_fiber.size(); ++i)
		if (!(a.lift_fiber[i] == b.lift_fiber[i]))
			return false;
	if (a.lagrangians.size() != b.lagrangians.size())
		return false;
	for (size_t i = 0; i < a.lagrangians.size(); ++i)
		if (a.lagrangians[i].first != b.lagrangians[i].first ||
		    !(a.lagrangians[i].second == b.lagrangians[i].second))
			return false;
	return true;
}

} // namespace jetvar
