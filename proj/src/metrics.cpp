#include "fhmor/metrics.hpp"

#include <Eigen/Eigenvalues>

#include "fhmor/linalg.hpp"
#include "fhmor/phi.hpp"
#include "fhmor/system.hpp"

namespace fhmor {

namespace {

// Compensated (Kahan) accumulator; the double sums below have a fixed
// iteration order so results are deterministic.
struct KahanSum {
    Complex sum{0.0, 0.0};
    Complex carry{0.0, 0.0};
    double abs_terms = 0.0;

    void add(Complex term) {
        abs_terms += std::abs(term);
        const Complex y = term - carry;
        const Complex t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

double take_real(const KahanSum& acc, const char* what) {
    const double imag = std::abs(acc.sum.imag());
    if (imag > 1e-10 * std::abs(acc.sum) + 1e-14 * acc.abs_terms)
        throw ConjugateClosureViolation(std::string(what) + ": imaginary residual " +
                                        std::to_string(imag) +
                                        " (inputs are not conjugate-closed)");
    return acc.sum.real();
}

void require_compatible(const PoleResidueModel& g, const PoleResidueModel& h, const char* what) {
    if (g.outputs() != h.outputs() || g.inputs() != h.inputs())
        throw DimensionMismatch(std::string(what) + ": models have different (p, m)");
}

// ∫_0^tf e^{At} B Bᵀ e^{Aᵀt} dt by composite Gauss-Legendre; propagates
// e^{At}B through the eigenbasis when A is diagonalizable, otherwise one
// matrix exponential per node.
Eigen::MatrixXd gramian_by_quadrature(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                      double tf) {
    const Eigen::Index n = A.rows();
    const PanelGrid grid = panel_grid(32, 16, 0.0, tf);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);

    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    bool modal_ok = es.info() == Eigen::Success;
    Eigen::MatrixXcd X, XinvB;
    if (modal_ok) {
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(es.eigenvectors());
        modal_ok = lu.isInvertible();
        if (modal_ok) {
            X = es.eigenvectors();
            XinvB = lu.solve(B.cast<Complex>());
        }
    }

    for (Eigen::Index k = 0; k < grid.t.size(); ++k) {
        Eigen::MatrixXd Zt;
        if (modal_ok) {
            const Eigen::VectorXcd e = (es.eigenvalues().array() * grid.t(k)).exp();
            Zt = (X * (e.asDiagonal() * XinvB)).real();
        } else {
            Zt = expm(A * grid.t(k)) * B;
        }
        P.noalias() += grid.w(k) * (Zt * Zt.transpose());
    }
    return 0.5 * (P + P.transpose());
}

TimeLimitedGramian reachability_gramian(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                        double tf, GramianSide side) {
    TimeLimitedGramian result;
    result.tf = tf;
    result.side = side;

    const Eigen::MatrixXd FB = expm(A * tf) * B;
    const Eigen::MatrixXd W = FB * FB.transpose() - B * B.transpose();
    try {
        Eigen::MatrixXd P = solve_lyapunov(A, W);
        // Guard against a quietly inaccurate solve as well.
        const double resid = (A * P + P * A.transpose() - W).norm();
        if (resid > 1e-8 * std::max(1.0, W.norm())) throw LyapunovIllPosed("residual too large");
        result.P = std::move(P);
    } catch (const LyapunovIllPosed&) {
        result.P = gramian_by_quadrature(A, B, tf);
        result.quadrature_fallback = true;
    }
    return result;
}

}  // namespace

double inner_product(const PoleResidueModel& g, const PoleResidueModel& h, Horizon horizon) {
    require_compatible(g, h, "inner_product");
    KahanSum acc;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        for (Eigen::Index j = 0; j < h.size(); ++j) {
            // Tr((u vᵀ)ᵀ (w zᵀ)) = (uᵀw)(zᵀv)
            const Complex coupling = (g.left.col(i).transpose() * h.left.col(j)).value() *
                                     (h.right.col(j).transpose() * g.right.col(i)).value();
            acc.add(coupling * phi1(g.poles(i) + h.poles(j), horizon.tf));
        }
    }
    return take_real(acc, "inner_product");
}

double norm_sq(const PoleResidueModel& g, Horizon horizon) {
    const double v = inner_product(g, g, horizon);
    return v < 0.0 ? 0.0 : v;  // roundoff dust only; the integrand is >= 0
}

double error_sq(const PoleResidueModel& full, const PoleResidueModel& reduced, Horizon horizon) {
    return error_sq(full, reduced, horizon, norm_sq(full, horizon));
}

double error_sq(const PoleResidueModel& full, const PoleResidueModel& reduced, Horizon horizon,
                double full_norm_sq) {
    require_compatible(full, reduced, "error_sq");
    const double cross = inner_product(full, reduced, horizon);
    const double red_sq = norm_sq(reduced, horizon);
    const double J = full_norm_sq - 2.0 * cross + red_sq;
    if (J < 0.0) {
        if (J >= -1e-12 * std::max(full_norm_sq, 1.0)) return 0.0;
        throw NegativeErrorSquare("error_sq: J = " + std::to_string(J) +
                                  " beyond the cancellation guard");
    }
    return J;
}

TimeLimitedGramian time_limited_gramian(const StateSpaceModel& model, Horizon horizon,
                                        GramianSide side) {
    if (side == GramianSide::Reachability)
        return reachability_gramian(model.A, model.B, horizon.tf, side);
    return reachability_gramian(model.A.transpose(), model.C.transpose(), horizon.tf, side);
}

double norm_sq_gramian(const StateSpaceModel& model, Horizon horizon) {
    const TimeLimitedGramian g =
        time_limited_gramian(model, horizon, GramianSide::Reachability);
    const double v = (model.C * g.P * model.C.transpose()).trace();
    return v < 0.0 ? 0.0 : v;
}

double quadrature_inner_product(const PoleResidueModel& g, const PoleResidueModel& h,
                                Horizon horizon, const QuadratureRule& rule) {
    rule.validate();
    require_compatible(g, h, "quadrature_inner_product");

    double max_sample = 0.0;
    auto integrate = [&](int panels) {
        const PanelGrid grid = panel_grid(panels, rule.nodes_per_panel, 0.0, horizon.tf);
        double acc = 0.0, carry = 0.0;
        for (Eigen::Index k = 0; k < grid.t.size(); ++k) {
            const Eigen::MatrixXd gt = impulse_response(g, grid.t(k));
            const Eigen::MatrixXd ht = impulse_response(h, grid.t(k));
            const double f = gt.cwiseProduct(ht).sum();  // Tr(gᵀh)
            max_sample = std::max(max_sample, std::abs(f));
            const double y = grid.w(k) * f - carry;
            const double t = acc + y;
            carry = (t - acc) - y;
            acc = t;
        }
        return acc;
    };

    constexpr int kMaxRefinements = 6;
    int panels = rule.panels;
    double previous = integrate(panels);
    for (int step = 0; step < kMaxRefinements; ++step) {
        panels *= 2;
        const double refined = integrate(panels);
        const double tol = 1e-9 * std::abs(refined) + 1e-15 * max_sample * horizon.tf;
        if (std::abs(refined - previous) <= tol) return refined;
        previous = refined;
    }
    throw QuadratureNotConverged("quadrature_inner_product: refinement stalled after " +
                                 std::to_string(kMaxRefinements) + " doublings");
}

}  // namespace fhmor
