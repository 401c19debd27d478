#pragma once

#include <fhmor/types.hpp>

namespace fhmor {

// Gradients of the squared finite-horizon error J with respect to the reduced
// model's parameters; column k of d_left/d_right belongs to term k, and
// conjugate-pair partner columns are conjugates of each other.
struct GradientBundle {
    Eigen::VectorXcd d_pole;  // ∂J/∂λ_k
    Eigen::MatrixXcd d_left;  // p x r, ∇_{ℓ_k} J
    Eigen::MatrixXcd d_right; // m x r, ∇_{r_k} J
};

// Per-pole interpolation residuals of the first-order optimality conditions:
// left/right tangential value matching and the Hermite (derivative) condition,
// each raw and normalized by the matched quantity's magnitude.
struct OptimalityResiduals {
    Eigen::VectorXd left_abs, right_abs, hermite_abs;
    Eigen::VectorXd left_rel, right_rel, hermite_rel;

    double max_value_rel() const {
        return left_rel.size() == 0
                   ? 0.0
                   : std::max(left_rel.maxCoeff(), right_rel.maxCoeff());
    }
    double max_hermite_rel() const {
        return hermite_rel.size() == 0 ? 0.0 : hermite_rel.maxCoeff();
    }
    bool stationary(double eps_value = 1e-6, double eps_hermite = 1e-4) const {
        return max_value_rel() <= eps_value && max_hermite_rel() <= eps_hermite;
    }
};

// Laplace transform of the impulse response truncated to [0, tf]:
// G(s) = Σ_j c_j b_jᵀ · phi1(ρ_j − s, tf). Entire in s (the poles are
// removable), so no pole-hit precondition.
Eigen::MatrixXcd truncated_laplace(const PoleResidueModel& model, Complex s, Horizon horizon);

// Same function from the realization: G(s) = C(sI−A)^{-1}(B − e^{−s·tf} e^{A·tf} B).
// Kept as an independent route; requires s off the spectrum of A.
Eigen::MatrixXcd truncated_laplace(const StateSpaceModel& model, Complex s, Horizon horizon);

// G'(s) = −Σ_j c_j b_jᵀ · phi2(ρ_j − s, tf).
Eigen::MatrixXcd truncated_laplace_derivative(const PoleResidueModel& model, Complex s,
                                              Horizon horizon);

GradientBundle gradients(const PoleResidueModel& full, const PoleResidueModel& reduced,
                         Horizon horizon);

OptimalityResiduals optimality_residuals(const PoleResidueModel& full,
                                         const PoleResidueModel& reduced, Horizon horizon);

}  // namespace fhmor
