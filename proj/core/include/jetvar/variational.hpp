#pragma once

#include "jetvar/jet_ops.hpp"

#include <map>
#include <tuple>

namespace jetvar {

/* Key order for (field-or-direction, field, multi-index) tables. */
struct IndexedKeyLess {
	bool operator()(const std::tuple<int, int, MultiIndex>& a,
	                const std::tuple<int, int, MultiIndex>& b) const
	{
		if (std::get<0>(a) != std::get<0>(b))
			return std::get<0>(a) < std::get<0>(b);
		if (std::get<1>(a) != std::get<1>(b))
			return std::get<1>(a) < std::get<1>(b);
		return multi_index_cmp(std::get<2>(a), std::get<2>(b)) < 0;
	}
};

using IndexedTable = std::map<std::tuple<int, int, MultiIndex>, Expression, IndexedKeyLess>;

/* Interior Euler operator of order mu in the direction of one field:
 *   I^mu_f(e) = sum_alpha (-1)^|alpha| ((mu+alpha)!/(mu! alpha!)) D_alpha d^{mu+alpha}_f e.
 * At mu = 0 this is the Euler-Lagrange operator; the higher operators
 * generate the canonical boundary data. */
Expression interior_euler(const Expression& e, int field, const MultiIndex& mu, const BundleSpec& spec);

Expression euler_lagrange_component(const Expression& e, int field, const BundleSpec& spec);

struct EulerLagrangeResult {
	CovectorDensity source; // one component per field
	int order = 0;          // max jet order over the components
};

EulerLagrangeResult euler_lagrange(const ScalarDensity& L, const BundleSpec& spec);

/* Canonical momenta p^mu_{f,beta}, built from the interior Euler operators:
 *   p^mu_{f,beta} = sum_{|nu|>=1, nu_mu>=1, beta<=nu-mu}
 *                   (nu_mu/|nu|) C(nu-mu, beta) D_{nu-mu-beta} I^nu_f(L),
 * chosen so that the first-variation identity below holds exactly.  Other
 * representatives differ by d_H-exact rearrangements; the residual checks are
 * the contract, not this particular table. */
struct MomentumTable {
	IndexedTable entries; // key (mu, field, beta)

	const Expression* find(int mu, int field, const MultiIndex& beta) const
	{
		auto hit = entries.find({mu, field, beta});
		return hit == entries.end() ? nullptr : &hit->second;
	}
};

MomentumTable canonical_momentum(const ScalarDensity& L, const BundleSpec& spec);

/* S^mu(u) = sum_{f,beta} (D_beta u^f) p^mu_{f,beta} for arbitrary component
 * expressions u (typically a vertical characteristic). */
VectorDensity boundary_current(const MomentumTable& p, const std::vector<Expression>& u,
                               const BundleSpec& spec);

/* Lie derivative of the Lagrangian density along the prolonged field, by the
 * direct prolongation formula plus the volume transport term L d_s xi^s. */
Expression lie_derivative_density(const ScalarDensity& L, const ProjectableVectorField& vf,
                                  const BundleSpec& spec);

/* Defect of the first-variation decomposition
 *   Lie_{jXi}(L omega) - Q.E(L) - d_H(S(Q) + xi.L);  identically zero. */
Expression first_variation_residual(const ScalarDensity& L, const ProjectableVectorField& vf,
                                    const BundleSpec& spec);

/* Linear differential operator in jet coordinates, acting on fields
 * [0, cols) of the governing spec: (J u)_i = sum_{j,alpha} J_{ij,alpha} D_alpha u^j. */
struct JacobiOperator {
	int rows = 0, cols = 0;
	IndexedTable entries; // key (i, j, alpha)

	Expression entry(int i, int j, const MultiIndex& alpha) const
	{
		auto hit = entries.find({i, j, alpha});
		return hit == entries.end() ? Expression() : hit->second;
	}
};

/* Linearization of a source form: J_{ij,alpha} = d^alpha_j E_i. */
JacobiOperator linearization(const CovectorDensity& E, const BundleSpec& spec);

/* Jacobi morphism of a Lagrangian: the linearization of its Euler-Lagrange
 * source along vertical variations. */
JacobiOperator jacobi_operator(const ScalarDensity& L, const BundleSpec& spec);

/* (J u)_i with D taken over `spec` (which may extend the bundle the operator
 * was built on; u components may involve the extra fields). */
std::vector<Expression> apply_jacobi(const JacobiOperator& J, const std::vector<Expression>& u,
                                     const BundleSpec& spec);

/* Formal adjoint: (J*)_{ij,beta} = sum_{alpha>=beta} (-1)^|alpha| C(alpha,beta)
 * D_{alpha-beta} J_{ji,alpha}. */
JacobiOperator formal_adjoint(const JacobiOperator& J, const BundleSpec& spec);

/* J - J* of the Jacobi operator; vanishes identically for any Lagrangian
 * (symmetry of the variational Hessian). */
JacobiOperator self_adjointness_residual(const ScalarDensity& L, const BundleSpec& spec);

/* Helmholtz tensor of a source form: the same defect J - J* computed from E
 * alone; E is locally variational iff all entries vanish. */
struct HelmholtzTensor {
	IndexedTable entries; // key (i, j, alpha)

	bool all_zero() const
	{
		for (const auto& [k, e] : entries)
			if (!e.is_zero())
				return false;
		return true;
	}
};

HelmholtzTensor helmholtz(const CovectorDensity& E, const BundleSpec& spec);
bool is_locally_variational(const CovectorDensity& E, const BundleSpec& spec);

/* Dual-route check of the second-variation reading: with fresh variation
 * fields u adjoined to the bundle, the Euler-Lagrange components (in the
 * original field directions) of the contraction sum_i u^i E_i(L) must equal
 * (J u)_i exactly.  Returns the componentwise differences. */
std::vector<Expression> jacobi_commutation_residual(const ScalarDensity& L, const BundleSpec& spec);

/* Decomposition of a density that is linear in the jets of the fields in
 * [field_begin, field_end):  w = sum_f P^f euler[f] + d_H(boundary), with
 * euler[f] = I^0_f(w).  Throws InvalidModel if w is not linear there. */
struct VariationSplit {
	std::vector<Expression> euler;
	VectorDensity boundary;
};

VariationSplit variation_split(const Expression& w, const BundleSpec& spec, int field_begin,
                               int field_end);

} // namespace jetvar
