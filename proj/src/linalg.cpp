#include "fhmor/linalg.hpp"

#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace fhmor {

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw DimensionMismatch("expm: matrix must be square");
    return A.exp();
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& W) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || W.rows() != n || W.cols() != n)
        throw DimensionMismatch("solve_lyapunov: incompatible shapes");

    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(A.cast<Complex>());
    if (schur.info() != Eigen::Success)
        throw LyapunovIllPosed("solve_lyapunov: Schur decomposition failed");
    const Eigen::MatrixXcd& U = schur.matrixU();
    const Eigen::MatrixXcd& T = schur.matrixT();

    // A = U T Uᴴ, Aᵀ = Aᴴ = U Tᴴ Uᴴ, so with Y = Uᴴ X U the equation becomes
    // T Y + Y Tᴴ = Uᴴ W U, solvable column by column from the last.
    Eigen::MatrixXcd R = U.adjoint() * W.cast<Complex>() * U;
    Eigen::MatrixXcd Y(n, n);
    const double diag_scale = std::max(1.0, T.diagonal().cwiseAbs().maxCoeff());

    for (Eigen::Index k = n - 1; k >= 0; --k) {
        Eigen::MatrixXcd Tk = T;
        const Complex shift = std::conj(T(k, k));
        Tk.diagonal().array() += shift;
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::abs(Tk(i, i)) < 1e-13 * diag_scale)
                throw LyapunovIllPosed(
                    "solve_lyapunov: eigenvalue pair sums to ~0 (lambda_i + lambda_k = " +
                    std::to_string(std::abs(Tk(i, i))) + ")");
        Y.col(k) = Tk.triangularView<Eigen::Upper>().solve(R.col(k));
        // Fold this column's contribution into the remaining right-hand sides.
        for (Eigen::Index j = 0; j < k; ++j) R.col(j) -= std::conj(T(j, k)) * Y.col(k);
    }

    Eigen::MatrixXd X = (U * Y * U.adjoint()).real();
    return 0.5 * (X + X.transpose());
}

GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    // Newton iteration on P_n from the three-term recurrence; roots are
    // symmetric so only the lower half is computed.
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double p_prime = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            p_prime = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / p_prime;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes(i) = -x;
        rule.nodes(n - 1 - i) = x;
        const double w = 2.0 / ((1.0 - x * x) * p_prime * p_prime);
        rule.weights(i) = w;
        rule.weights(n - 1 - i) = w;
    }
    if (n % 2 == 1) rule.nodes(half - 1) = 0.0;
    return rule;
}

PanelGrid panel_grid(int panels, int nodes_per_panel, double a, double b) {
    if (panels < 1) throw InvalidArgument("panel_grid: panels must be positive");
    const GaussLegendre base = gauss_legendre(nodes_per_panel);
    PanelGrid grid;
    grid.t.resize(static_cast<Eigen::Index>(panels) * nodes_per_panel);
    grid.w.resize(grid.t.size());
    const double width = (b - a) / panels;
    Eigen::Index pos = 0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double mid = lo + 0.5 * width;
        for (int k = 0; k < nodes_per_panel; ++k, ++pos) {
            grid.t(pos) = mid + 0.5 * width * base.nodes(k);
            grid.w(pos) = 0.5 * width * base.weights(k);
        }
    }
    return grid;
}

Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& P) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (P + P.transpose()));
    if (eig.info() != Eigen::Success)
        throw GramianFailure("psd_sqrt_factor: eigendecomposition failed");
    Eigen::VectorXd d = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * d.asDiagonal();
}

}  // namespace fhmor
