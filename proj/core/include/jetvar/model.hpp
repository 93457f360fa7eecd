#pragma once

#include "jetvar/gauge.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace jetvar {

/* Source location of a token or construct: 1-based line and column plus the
 * length in characters.  length == 0 marks a position without extent (end of
 * input). */
struct Span {
	int line = 0;
	int column = 0;
	int length = 0;
};

struct Diagnostic {
	std::string message;
	Span span;
};

/* "error:LINE:COL: message" — the machine-greppable one-line form. */
std::string format_diagnostic(const Diagnostic& d);

/* A fiber-field declaration as written: scalar (count == 0) or an indexed
 * family `name[count]` that expands to the scalar fields name[0] .. name[count-1]. */
struct FieldDecl {
	std::string name;
	int count = 0;
};

/* Abstract model document.  Surface conveniences (defs, diagonal constants)
 * are expanded away during parsing; what remains is the bundle, the parameter
 * content, the lift in kernel form, and named Lagrangian densities.  Two
 * documents are the same model iff same_document says so; the renderer and
 * parser form an identity on this abstraction. */
struct ModelDocument {
	std::vector<FieldDecl> field_decls;
	BundleSpec spec; // field_decls expanded
	bool has_params = false;
	GaugeModel gauge;
	std::vector<std::string> param_names;  // symbolic scalar constants
	std::vector<std::string> formal_names; // formal base functions
	std::vector<Expression> lift_fiber;    // on the product bundle; size m when has_params
	std::vector<std::pair<std::string, Expression>> lagrangians;

	const Expression* lagrangian(const std::string& name) const
	{
		for (const auto& [nm, e] : lagrangians)
			if (nm == name)
				return &e;
		return nullptr;
	}
};

bool same_document(const ModelDocument& a, const ModelDocument& b);

struct ParseResult {
	std::optional<ModelDocument> document;
	std::vector<Diagnostic> diagnostics;

	bool ok() const { return document.has_value() && diagnostics.empty(); }
};

/* Parse a model file.  On failure the document is absent and diagnostics
 * carry spans; on success every expression is normalized kernel form and the
 * lift (when present) has already passed decompose_lift. */
ParseResult parse_model(const std::string& text);

/* Parse a bare expression against a finished document (used by the
 * round-trip tests and the expression loader).  Index variables are summed
 * over the base dimension as in Lagrangian position; parameters of the gauge
 * sector are in scope iff with_params. */
struct ExpressionResult {
	std::optional<Expression> expression;
	std::vector<Diagnostic> diagnostics;
};

ExpressionResult parse_expression(const std::string& text, const ModelDocument& doc,
                                  bool with_params = false);

} // namespace jetvar
