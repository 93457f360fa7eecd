#pragma once

#include "jetvar/errors.hpp"

#include <string>
#include <vector>

namespace jetvar {

/* Fibered chart data: base coordinate names, fiber field names, and the
 * admissible jet-order cap.  Field identity everywhere in the engine is the
 * index into `fields`; parameter fields of a gauge model are appended after
 * the dynamical ones, so one spec governs the whole product bundle. */
struct BundleSpec {
	std::vector<std::string> base;
	std::vector<std::string> fields;
	int max_order = 1;

	int n() const { return (int)base.size(); }
	int m() const { return (int)fields.size(); }

	void validate() const
	{
		if (base.empty() || fields.empty())
			throw EngineError(ErrorKind::InvalidModel, "bundle needs at least one base and one fiber coordinate");
		if (max_order < 1)
			throw EngineError(ErrorKind::InvalidModel, "jet-order cap must be at least 1");
		std::vector<std::string> names = base;
		names.insert(names.end(), fields.begin(), fields.end());
		for (size_t i = 0; i < names.size(); ++i)
			for (size_t j = i + 1; j < names.size(); ++j)
				if (names[i] == names[j])
					throw EngineError(ErrorKind::InvalidModel, "duplicate coordinate name: " + names[i]);
	}

	BundleSpec with_fields_appended(const std::vector<std::string>& extra) const
	{
		BundleSpec out = *this;
		out.fields.insert(out.fields.end(), extra.begin(), extra.end());
		return out;
	}
};

} // namespace jetvar
