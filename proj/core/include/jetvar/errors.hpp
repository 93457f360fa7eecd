#pragma once

#include <stdexcept>
#include <string>

namespace jetvar {

/* Engine-level failure taxonomy.  Anything a caller can trigger with
 * well-formed but unsatisfiable input lands here; programming errors
 * (mismatched dimensions etc.) throw std::invalid_argument instead. */
enum class ErrorKind {
	OrderOverflow,        // a total derivative would exceed the declared jet-order cap
	MalformedLift,        // lift coefficients violate linearity / dependency rules
	BianchiNonzero,       // superpotential requested but the obstruction terms do not vanish
	ExtractionIncomplete, // superpotential extraction left a nonzero remainder
	InvalidModel,         // structurally inconsistent bundle/model data
};

struct EngineError : std::runtime_error {
	ErrorKind kind;

	EngineError(ErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

inline const char* error_kind_name(ErrorKind k)
{
	switch (k)
	{
	case ErrorKind::OrderOverflow:
		return "OrderOverflow";
	case ErrorKind::MalformedLift:
		return "MalformedLift";
	case ErrorKind::BianchiNonzero:
		return "BianchiNonzero";
	case ErrorKind::ExtractionIncomplete:
		return "ExtractionIncomplete";
	case ErrorKind::InvalidModel:
		return "InvalidModel";
	}
	return "EngineError";
}

} // namespace jetvar
