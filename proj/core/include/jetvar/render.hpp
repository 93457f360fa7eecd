#pragma once

#include "jetvar/model.hpp"

namespace jetvar {

/* Plain-text form, valid model-file expression syntax against the given
 * spec's coordinate names; parse_expression inverts it up to normalization. */
std::string render_text(const Expression& e, const BundleSpec& spec);

/* LaTeX form with jet subscripts; Greek parameter names are mapped to their
 * macros. */
std::string render_latex(const Expression& e, const BundleSpec& spec);

/* Machine form: a versioned term-tree (schema jetvar-expression/1) with
 * exact rational coefficients as strings.  Key order is fixed, so equal
 * expressions serialize byte-identically. */
std::string render_json(const Expression& e, const BundleSpec& spec);

/* Inverse of render_json; throws std::invalid_argument on schema or shape
 * violations. */
Expression expression_from_json(const std::string& text, const BundleSpec& spec);

/* A model file that parses back to the same abstract document. */
std::string render_document(const ModelDocument& doc);

} // namespace jetvar
