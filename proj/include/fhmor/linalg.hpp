#pragma once

#include <fhmor/types.hpp>

namespace fhmor {

// Dense matrix exponential (scaling-and-squaring Padé).
Eigen::MatrixXd expm(const Eigen::MatrixXd& A);

// Solves A·X + X·Aᵀ = W for symmetric W via Bartels–Stewart on the complex
// Schur form of A. Throws LyapunovIllPosed when two eigenvalues of A sum to
// (numerically) zero.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& W);

// Gauss–Legendre nodes/weights on [-1, 1].
struct GaussLegendre {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};
GaussLegendre gauss_legendre(int n);

// Composite rule: `panels` equal panels of an n-point Gauss–Legendre rule
// mapped onto [a, b]; t and w list all nodes in increasing order.
struct PanelGrid {
    Eigen::VectorXd t;
    Eigen::VectorXd w;
};
PanelGrid panel_grid(int panels, int nodes_per_panel, double a, double b);

// Symmetric PSD square-root factor: returns L with L·Lᵀ ≈ P, eigenvalues
// clamped at zero. Used for Gramian balancing.
Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& P);

}  // namespace fhmor
