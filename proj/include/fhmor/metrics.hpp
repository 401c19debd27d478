#pragma once

#include <fhmor/types.hpp>

namespace fhmor {

enum class GramianSide { Reachability, Observability };

// Composite Gauss-Legendre discretization of [0, tf].
struct QuadratureRule {
    int panels = 32;
    int nodes_per_panel = 16;
    void validate() const {
        if (panels < 1) throw InvalidArgument("QuadratureRule: panels must be >= 1");
        if (nodes_per_panel < 4) throw InvalidArgument("QuadratureRule: need >= 4 nodes per panel");
    }
};

struct TimeLimitedGramian {
    Eigen::MatrixXd P;
    double tf = 0.0;
    GramianSide side = GramianSide::Reachability;
    bool quadrature_fallback = false;  // Lyapunov route was ill-posed
};

// ⟨g, h⟩ over [0, tf] in closed form: Σ_i Σ_j (u_iᵀ w_j)(z_jᵀ v_i)·phi1(α_i + β_j, tf)
// for g = Σ e^{α_i t} u_i v_iᵀ, h = Σ e^{β_j t} w_j z_jᵀ. The value of a real
// inner product; a non-dust imaginary part throws ConjugateClosureViolation.
double inner_product(const PoleResidueModel& g, const PoleResidueModel& h, Horizon horizon);

// ‖g‖² = ⟨g, g⟩ ≥ 0.
double norm_sq(const PoleResidueModel& g, Horizon horizon);

// J = ‖h‖² − 2⟨h, h_r⟩ + ‖h_r‖², clamped at 0 when cancellation leaves
// a residual within 1e-12·‖h‖²; beyond that throws NegativeErrorSquare.
double error_sq(const PoleResidueModel& full, const PoleResidueModel& reduced, Horizon horizon);
double error_sq(const PoleResidueModel& full, const PoleResidueModel& reduced, Horizon horizon,
                double full_norm_sq);

// P(tf) = ∫_0^tf e^{At} B Bᵀ e^{Aᵀt} dt via the shifted Lyapunov equation
// A P + P Aᵀ = F B Bᵀ Fᵀ − B Bᵀ with F = e^{A·tf} (dual for observability).
// Falls back to quadrature, with a flag, when the equation is ill-posed.
TimeLimitedGramian time_limited_gramian(const StateSpaceModel& model, Horizon horizon,
                                        GramianSide side);

// trace(C · P(tf) · Cᵀ); equals norm_sq of the modal form.
double norm_sq_gramian(const StateSpaceModel& model, Horizon horizon);

// Direct discretization of ∫_0^tf Tr(h(t)ᵀ g(t)) dt; refines by panel doubling
// until successive values agree to 1e-9 relative, else QuadratureNotConverged.
// Serves as the independent oracle for the closed forms above.
double quadrature_inner_product(const PoleResidueModel& g, const PoleResidueModel& h,
                                Horizon horizon, const QuadratureRule& rule = {});

}  // namespace fhmor
