#pragma once

#include "jetvar/multi_index.hpp"

#include <string>

namespace jetvar {

/* The four generator classes of the coefficient ring:
 *   Base    x^s            — a base coordinate
 *   Jet     y^i_alpha      — a jet coordinate of field i (alpha may be zero)
 *   Param   named constant — symbolic scalar, killed by every derivative
 *   Formal  f_alpha(x)     — unspecified smooth function of the base point,
 *                            carried with its formal derivative record
 * Field identity is a plain index into the governing BundleSpec. */
enum class AtomKind : std::uint8_t { Base = 0, Jet = 1, Param = 2, Formal = 3 };

struct Atom {
	AtomKind kind = AtomKind::Base;
	int index = 0;     // Base: direction; Jet: field
	MultiIndex deriv;  // Jet / Formal derivative record (empty otherwise)
	std::string name;  // Param / Formal

	static Atom base(int dir)
	{
		Atom a;
		a.kind = AtomKind::Base;
		a.index = dir;
		return a;
	}

	static Atom jet(int field, MultiIndex alpha)
	{
		Atom a;
		a.kind = AtomKind::Jet;
		a.index = field;
		a.deriv = std::move(alpha);
		return a;
	}

	static Atom param(std::string name)
	{
		Atom a;
		a.kind = AtomKind::Param;
		a.name = std::move(name);
		return a;
	}

	static Atom formal(std::string name, MultiIndex alpha)
	{
		Atom a;
		a.kind = AtomKind::Formal;
		a.name = std::move(name);
		a.deriv = std::move(alpha);
		return a;
	}

	int jet_order() const { return kind == AtomKind::Jet ? deriv.order() : 0; }

	bool operator==(const Atom& b) const
	{
		return kind == b.kind && index == b.index && name == b.name && deriv == b.deriv;
	}
};

/* Total atom order: class, then field/direction index or name, then the
 * graded-colex order on the derivative record.  This is the key order behind
 * the canonical form; every container of atoms in the engine is sorted by it. */
inline int atom_cmp(const Atom& a, const Atom& b)
{
	if (a.kind != b.kind)
		return (int)a.kind < (int)b.kind ? -1 : 1;
	switch (a.kind)
	{
	case AtomKind::Base:
		return a.index == b.index ? 0 : (a.index < b.index ? -1 : 1);
	case AtomKind::Jet:
		if (a.index != b.index)
			return a.index < b.index ? -1 : 1;
		return multi_index_cmp(a.deriv, b.deriv);
	case AtomKind::Param:
		return a.name.compare(b.name) < 0 ? -1 : (a.name == b.name ? 0 : 1);
	case AtomKind::Formal:
		if (int c = a.name.compare(b.name); c != 0)
			return c < 0 ? -1 : 1;
		return multi_index_cmp(a.deriv, b.deriv);
	}
	return 0;
}

struct AtomLess {
	bool operator()(const Atom& a, const Atom& b) const { return atom_cmp(a, b) < 0; }
};

} // namespace jetvar
