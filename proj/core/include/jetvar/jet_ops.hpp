#pragma once

#include "jetvar/bundle.hpp"
#include "jetvar/densities.hpp"
#include "jetvar/expression.hpp"

#include <map>

namespace jetvar {

/* Formal (total) derivative D_dir: explicit base derivative plus shift of
 * every jet atom one order up.  Throws OrderOverflow past spec.max_order. */
Expression total_derivative(const Expression& e, int dir, const BundleSpec& spec);

/* Iterated D over a multi-index (directions commute, order irrelevant). */
Expression total_derivative(const Expression& e, const MultiIndex& alpha, const BundleSpec& spec);

/* Projectable vector field on the bundle: base components depend on base
 * coordinates only, fiber components at most on order-0 jets. */
struct ProjectableVectorField {
	std::vector<Expression> base;  // xi^sigma, size n
	std::vector<Expression> fiber; // Xi^i, size m

	void validate(const BundleSpec& spec) const;
};

/* Components of the s-jet prolongation, keyed by (field, alpha), |alpha|<=s.
 * The alpha=0 entries coincide with the fiber components. */
struct ProlongedField {
	std::vector<Expression> base;
	std::map<std::pair<int, MultiIndex>, Expression,
	         bool (*)(const std::pair<int, MultiIndex>&, const std::pair<int, MultiIndex>&)>
	    comps;
	int order = 0;

	static bool key_less(const std::pair<int, MultiIndex>& a, const std::pair<int, MultiIndex>& b)
	{
		if (a.first != b.first)
			return a.first < b.first;
		return multi_index_cmp(a.second, b.second) < 0;
	}

	ProlongedField() : comps(&key_less) {}

	const Expression& at(int field, const MultiIndex& alpha) const;
};

/* Jet prolongation of a projectable field, by the multinomial formula
 *   Xi^i_alpha = D_alpha Xi^i - sum_{beta+gamma=alpha, beta!=0}
 *                (alpha!/(beta!gamma!)) (D_beta xi^mu) y^i_{gamma+mu}. */
ProlongedField prolong(const ProjectableVectorField& vf, int s, const BundleSpec& spec);

/* Horizontal/vertical splitting: the horizontal part acts as xi^sigma D_sigma,
 * the vertical part prolongs the characteristic Q^i = Xi^i - y^i_sigma xi^sigma
 * by plain iterated total derivatives. */
struct SplitField {
	std::vector<Expression> horizontal; // xi^sigma
	ProlongedField vertical;            // components D_alpha Q^i
};

SplitField split_hv(const ProjectableVectorField& vf, int s, const BundleSpec& spec);

/* Derivation action of a prolonged field on an expression:
 * xi^sigma (explicit d/dx^sigma) + sum Xi^i_alpha d/d(y^i_alpha). */
Expression apply(const ProlongedField& pf, const Expression& e);

/* Commutator of projectable fields (again projectable). */
ProjectableVectorField bracket(const ProjectableVectorField& a, const ProjectableVectorField& b,
                               const BundleSpec& spec);

/* Horizontal differential on density representatives. */
ScalarDensity formal_divergence(const VectorDensity& v, const BundleSpec& spec);
VectorDensity formal_divergence(const SkewDensity2& w, const BundleSpec& spec);

} // namespace jetvar
