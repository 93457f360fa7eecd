#pragma once

#include "jetvar/variational.hpp"

namespace jetvar {

/* Parameter content of a gauge model.  The base-direction components xi^mu
 * and the gauge components eps^A are realized as auxiliary fiber fields on a
 * product bundle, so every operator downstream is the ordinary jet machinery
 * applied there.  r caps the eps-jet order and k the xi-jet order admissible
 * in a lift, with the standing assumption r <= k. */
struct GaugeModel {
	std::vector<std::string> xi_names;  // one per base direction, or empty
	std::vector<std::string> eps_names; // scalar gauge parameters
	int r = 0;
	int k = 1;

	bool has_base_sector() const { return !xi_names.empty(); }
	int gauge_count() const { return (int)eps_names.size(); }

	void validate(const BundleSpec& spec) const;
};

/* Product-bundle realization: the dynamical fields keep their indices, then
 * come the xi components, then the eps components, all over the same base. */
struct GaugeContext {
	BundleSpec spec; // dynamical bundle
	GaugeModel model;
	BundleSpec ext; // spec with the parameter fields appended
	int m = 0;      // dynamical field count
	int xi0 = -1;   // ext index of xi^0, -1 without a base sector
	int eps0 = -1;  // ext index of eps^0, -1 without gauge parameters

	int param_begin() const { return m; }
	int xi_field(int mu) const { return xi0 + mu; }
	int eps_field(int a) const { return eps0 + a; }

	/* xi^mu as an expression: its order-0 parameter jet, or zero. */
	Expression xi(int mu) const;
};

GaugeContext make_gauge_context(const BundleSpec& spec, const GaugeModel& model);

/* Lift coefficient tables Z, defining the fiber components
 *   Xihat^i = sum_{|nu| <= r} Z^{i nu}_A eps^A_nu
 *           + sum_{1 <= |lam| <= k} Z^{i lam}_mu xi^mu_lam.
 * Coefficients live on the dynamical bundle: base coordinates, order-0 jets,
 * constants and formal functions only. */
struct LiftSpec {
	IndexedTable eps_coeff; // key (i, A, nu)
	IndexedTable xi_coeff;  // key (i, mu, lam)
};

/* Validate and decompose raw fiber components given on the product bundle.
 * Throws MalformedLift when a component is nonlinear in the parameter jets,
 * has a parameter-free part, carries coefficients outside the fiber, uses an
 * undifferentiated base parameter, or exceeds the (r, k) caps. */
LiftSpec decompose_lift(const GaugeContext& ctx, const std::vector<Expression>& fiber);

/* Recomposed fiber components Xihat^i on the product bundle. */
std::vector<Expression> lift_components(const GaugeContext& ctx, const LiftSpec& lift);

/* Lie derivative of the generic section: pounds^i = y^i_sigma xi^sigma - Xihat^i,
 * linear in the parameter jets; -pounds is the vertical characteristic of the
 * lift, so D_alpha(-pounds^i) are its vertical prolongation components. */
std::vector<Expression> lie_derivative_section(const GaugeContext& ctx, const LiftSpec& lift);

/* Substitute concrete parameter functions (expressions in the base
 * coordinates; xi_vals sized n, eps_vals sized gauge_count) into the lift,
 * yielding an honest projectable field on the dynamical bundle. */
ProjectableVectorField instantiate(const GaugeContext& ctx, const LiftSpec& lift,
                                   const std::vector<Expression>& xi_vals,
                                   const std::vector<Expression>& eps_vals);

/* Functoriality defect on concrete inputs: components (base then fiber) of
 * lift([X1, X2]) - [lift(X1), lift(X2)], with the parameter bracket
 *   [(xi1, eps1), (xi2, eps2)] = ([xi1, xi2], xi1(eps2) - xi2(eps1))
 * of a trivial abelian structure group.  Zero certifies the lift. */
std::vector<Expression> lift_bracket_residual(const GaugeContext& ctx, const LiftSpec& lift,
                                              const std::vector<Expression>& xi1,
                                              const std::vector<Expression>& eps1,
                                              const std::vector<Expression>& xi2,
                                              const std::vector<Expression>& eps2);

/* Lie derivative of the Lagrangian density along the prolonged lift, via the
 * jet splitting xi^sigma D_sigma + sum (D_alpha Q^i) d^alpha_i + volume
 * transport, with Q = -pounds.  Linear in the parameter jets; identically
 * zero exactly when L is invariant under every parameter choice. */
Expression invariance_residual(const ScalarDensity& L, const GaugeContext& ctx,
                               const LiftSpec& lift);

/* Conserved current eps^mu = S^mu(-pounds) + xi^mu L on the product bundle.
 * Off-shell identity, exact for any L:
 *   D_mu eps^mu = invariance_residual + sum_i pounds^i E_i. */
struct NoetherResult {
	VectorDensity current;
	Expression residual; // invariance residual of (L, lift)
	bool invariant = false;
};

NoetherResult noether_current(const ScalarDensity& L, const GaugeContext& ctx,
                              const LiftSpec& lift);

/* Decomposition of omega = sum_i pounds^i E_i by integration by parts in the
 * parameter directions:  omega = sum_P P beta_P + D_mu reduced^mu.  beta_P is
 * the Euler expression of omega with respect to parameter field P; for an
 * invariant Lagrangian every beta_P vanishes identically. */
struct BianchiResult {
	std::vector<Expression> beta; // per parameter field, xi components first
	VectorDensity reduced;        // the reduced current
	Expression residual;          // decomposition defect, zero by construction
};

BianchiResult bianchi_decompose(const ScalarDensity& L, const GaugeContext& ctx,
                                const LiftSpec& lift);

/* Jacobi morphism along the lift: the linearized source applied to the
 * vertical characteristic u^i = -pounds^i.  The components are the kernel
 * residual: identically zero means the lifted variations annihilate the
 * second variation for every parameter choice; otherwise they are the Jacobi
 * equations cutting out that kernel. */
std::vector<Expression> gauge_jacobi(const ScalarDensity& L, const GaugeContext& ctx,
                                     const LiftSpec& lift);

/* Superpotential extraction from delta = noether current - reduced current.
 * Requires beta == 0 (else BianchiNonzero), which makes D_mu delta^mu == 0
 * exactly; then delta^mu = D_nu nu^{nu mu} for an antisymmetric nu, found by
 * redistributing one base derivative off the top parameter-jet layer at a
 * time.  residual = delta - divergence(nu) is rechecked and must vanish;
 * ExtractionIncomplete reports any defect instead of dropping it. */
struct SuperpotentialResult {
	SkewDensity2 nu;
	VectorDensity delta;    // strongly conserved current eps - eps~
	VectorDensity residual; // delta - divergence(nu), identically zero
};

SuperpotentialResult superpotential(const ScalarDensity& L, const GaugeContext& ctx,
                                    const LiftSpec& lift);

/* The redistribution step on its own: given any delta that is linear in the
 * parameter jets with D_mu delta^mu == 0, produce an antisymmetric nu with
 * divergence(nu) == delta by peeling the top parameter-jet layer per round.
 * Throws ExtractionIncomplete when delta fails either hypothesis. */
SkewDensity2 redistribute_into_superpotential(const VectorDensity& delta, const GaugeContext& ctx);

} // namespace jetvar
