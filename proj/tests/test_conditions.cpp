#include <doctest.h>

#include "fhmor/conditions.hpp"
#include "fhmor/linalg.hpp"
#include "fhmor/metrics.hpp"
#include "fhmor/system.hpp"
#include "helpers.hpp"

using namespace fhmor;
using fhmor::testing::rel_close;

namespace {

const Horizon kUnit{1.0};

PoleResidueModel scalar_pr(double pole, double residue) {
    return PoleResidueModel::siso(Eigen::VectorXcd::Constant(1, Complex(pole, 0.0)),
                                  Eigen::VectorXcd::Constant(1, Complex(residue, 0.0)));
}

// Quadrature oracle for the truncated Laplace transform ∫_0^tf h(t) e^{-st} dt.
Eigen::MatrixXcd laplace_by_quadrature(const PoleResidueModel& model, Complex s, double tf) {
    const PanelGrid grid = panel_grid(64, 16, 0.0, tf);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(model.outputs(), model.inputs());
    for (Eigen::Index k = 0; k < grid.t.size(); ++k)
        acc += grid.w(k) * std::exp(-s * grid.t(k)) *
               impulse_response(model, grid.t(k)).cast<Complex>();
    return acc;
}

// Central difference of error_sq along one real coordinate of the reduced
// model, mirrored at the conjugate partner so closure (and realness of J)
// survives the perturbation.
enum class Param { PoleRe, PoleIm, Left, Right };

double fd_error_sq(const PoleResidueModel& full, const PoleResidueModel& red, Horizon horizon,
                   Eigen::Index k, Eigen::Index partner, Param what, Eigen::Index entry,
                   bool imag_coord, double h) {
    auto perturbed = [&](double step) {
        PoleResidueModel m = red;
        const Complex delta = imag_coord ? Complex(0.0, step) : Complex(step, 0.0);
        switch (what) {
            case Param::PoleRe:
            case Param::PoleIm: {
                m.poles(k) += delta;
                if (partner != k) m.poles(partner) += std::conj(delta);
                break;
            }
            case Param::Left: {
                m.left(entry, k) += delta;
                if (partner != k) m.left(entry, partner) += std::conj(delta);
                break;
            }
            case Param::Right: {
                m.right(entry, k) += delta;
                if (partner != k) m.right(entry, partner) += std::conj(delta);
                break;
            }
        }
        return error_sq(full, m, horizon);
    };
    return (perturbed(h) - perturbed(-h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("truncated laplace anchors") {
    const auto full = scalar_pr(-1.0, 1.0);
    CHECK(rel_close(truncated_laplace(full, Complex(0.0, 0.0), kUnit)(0, 0),
                    Complex(0.6321205588285577, 0.0), 1e-14));
    // s equal to the pole: removable singularity, value tf
    CHECK(rel_close(truncated_laplace(full, Complex(-1.0, 0.0), kUnit)(0, 0),
                    Complex(1.0, 0.0), 1e-14));
}

TEST_CASE("truncated laplace matches its quadrature oracle") {
    std::mt19937_64 rng(51);
    const auto model = fhmor::testing::random_pole_residue(
        rng, {.n_real = 2, .n_pairs = 1, .p = 2, .m = 2});
    for (const Complex s : {Complex(0.0, 0.0), Complex(1.0, 1.0), Complex(-0.3, 0.0)}) {
        const Eigen::MatrixXcd closed = truncated_laplace(model, s, kUnit);
        const Eigen::MatrixXcd oracle = laplace_by_quadrature(model, s, 1.0);
        CHECK(rel_close(closed, oracle, 1e-7));
    }
}

TEST_CASE("state-space and pole-residue routes agree") {
    const auto full = scalar_pr(-1.0, 1.0);
    Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1);
    A << -1.0;
    B << 1.0;
    C << 1.0;
    const StateSpaceModel ss(A, B, C);
    CHECK(rel_close(truncated_laplace(ss, Complex(0.0, 0.0), kUnit)(0, 0),
                    Complex(0.6321205588285577, 0.0), 1e-12));

    std::mt19937_64 rng(52);
    const StateSpaceModel model = fhmor::testing::random_state_space(rng, 4, 1, 1);
    const PoleResidueModel prm = modal_decompose(model);
    for (const Complex s : {Complex(0.7, 0.0), Complex(0.5, 2.0), Complex(-0.4, 1.0)})
        CHECK(rel_close(truncated_laplace(model, s, kUnit), truncated_laplace(prm, s, kUnit),
                        1e-9));
}

TEST_CASE("large horizons collapse G onto the transfer function") {
    // stable model, tf large enough that e^{A tf} is numerically gone
    std::mt19937_64 rng(53);
    const StateSpaceModel model = fhmor::testing::random_state_space(rng, 5, 1, 1);
    const PoleResidueModel prm = modal_decompose(model);
    const Horizon long_horizon(200.0);
    for (const Complex s : {Complex(0.5, 0.0), Complex(1.0, 1.0)}) {
        CHECK(rel_close(truncated_laplace(prm, s, long_horizon), eval_transfer(prm, s), 1e-10));
        CHECK(rel_close(truncated_laplace(model, s, long_horizon), eval_transfer(model, s),
                        1e-10));
    }
}

TEST_CASE("truncated laplace derivative anchors") {
    const auto full = scalar_pr(-1.0, 1.0);
    // -phi2(-2, 1)
    CHECK(rel_close(truncated_laplace_derivative(full, Complex(1.0, 0.0), kUnit)(0, 0),
                    Complex(-0.14849853757254047, 0.0), 1e-14));
    // s at the pole: the term contributes -tf²/2 · c b
    CHECK(rel_close(truncated_laplace_derivative(full, Complex(-1.0, 0.0), kUnit)(0, 0),
                    Complex(-0.5, 0.0), 1e-14));
}

TEST_CASE("truncated laplace derivative matches finite differences") {
    std::mt19937_64 rng(54);
    const auto model = fhmor::testing::random_pole_residue(rng, {.n_real = 1, .n_pairs = 1});
    for (const Complex s : {Complex(0.4, 0.0), Complex(-0.2, 1.3)}) {
        const double h = 1e-6 * (1.0 + std::abs(s));
        const Eigen::MatrixXcd fd =
            (truncated_laplace(model, s + h, kUnit) - truncated_laplace(model, s - h, kUnit)) /
            (2.0 * h);
        CHECK(rel_close(truncated_laplace_derivative(model, s, kUnit), fd, 1e-5));
    }
}

TEST_CASE("gradients vanish at the global minimum") {
    std::mt19937_64 rng(55);
    const auto full = fhmor::testing::random_pole_residue(rng, {.n_real = 2, .n_pairs = 1});
    const GradientBundle bundle = gradients(full, full, kUnit);
    CHECK(bundle.d_pole.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(bundle.d_left.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(bundle.d_right.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gradient entries match finite differences of error_sq") {
    std::mt19937_64 rng(56);
    for (int trial = 0; trial < 5; ++trial) {
        const auto full =
            fhmor::testing::random_pole_residue(rng, {.n_real = 4, .n_pairs = 1});
        const auto red = fhmor::testing::random_pole_residue(rng, {.n_real = 1, .n_pairs = 1});
        const GradientBundle bundle = gradients(full, red, kUnit);
        const ClosureReport closure = validate_conjugate_closure(red);
        REQUIRE(closure.closed);

        const double h = 1e-6;
        const double atol = 1e-9 * (1.0 + bundle.d_pole.cwiseAbs().maxCoeff());
        for (Eigen::Index k = 0; k < red.size(); ++k) {
            const Eigen::Index partner = closure.partner[static_cast<std::size_t>(k)];
            if (partner == k) {
                // real pole: one real coordinate, gradient must be real
                CHECK(std::abs(bundle.d_pole(k).imag()) <= 1e-10);
                const double fd = fd_error_sq(full, red, kUnit, k, partner, Param::PoleRe, 0,
                                              false, h);
                CHECK(rel_close(fd, bundle.d_pole(k).real(), 1e-5, atol));
                const double fdl =
                    fd_error_sq(full, red, kUnit, k, partner, Param::Left, 0, false, h);
                CHECK(rel_close(fdl, bundle.d_left(0, k).real(), 1e-5, atol));
            } else if (red.poles(k).imag() > 0.0) {
                const double fd_re = fd_error_sq(full, red, kUnit, k, partner, Param::PoleRe,
                                                 0, false, h);
                const double fd_im = fd_error_sq(full, red, kUnit, k, partner, Param::PoleIm,
                                                 0, true, h);
                CHECK(rel_close(fd_re, 2.0 * bundle.d_pole(k).real(), 1e-5, atol));
                CHECK(rel_close(fd_im, -2.0 * bundle.d_pole(k).imag(), 1e-5, atol));

                const double fdl_re =
                    fd_error_sq(full, red, kUnit, k, partner, Param::Left, 0, false, h);
                const double fdl_im =
                    fd_error_sq(full, red, kUnit, k, partner, Param::Left, 0, true, h);
                CHECK(rel_close(fdl_re, 2.0 * bundle.d_left(0, k).real(), 1e-5, atol));
                CHECK(rel_close(fdl_im, -2.0 * bundle.d_left(0, k).imag(), 1e-5, atol));

                const double fdr_re =
                    fd_error_sq(full, red, kUnit, k, partner, Param::Right, 0, false, h);
                CHECK(rel_close(fdr_re, 2.0 * bundle.d_right(0, k).real(), 1e-5, atol));
            }
        }
    }
}

TEST_CASE("conjugate-pair gradient entries are conjugate") {
    std::mt19937_64 rng(57);
    const auto full = fhmor::testing::random_pole_residue(rng, {.n_real = 3, .n_pairs = 1});
    const auto red = fhmor::testing::random_pole_residue(rng, {.n_real = 0, .n_pairs = 1});
    const GradientBundle bundle = gradients(full, red, kUnit);
    CHECK(rel_close(bundle.d_pole(0), std::conj(bundle.d_pole(1)), 1e-12));
    CHECK(rel_close(bundle.d_left(0, 0), std::conj(bundle.d_left(0, 1)), 1e-12));
    CHECK(rel_close(bundle.d_right(0, 0), std::conj(bundle.d_right(0, 1)), 1e-12));
}

TEST_CASE("optimality residuals: zero at the optimum, positive elsewhere") {
    std::mt19937_64 rng(58);
    const auto full = fhmor::testing::random_pole_residue(rng, {.n_real = 3, .n_pairs = 1});
    const OptimalityResiduals at_opt = optimality_residuals(full, full, kUnit);
    CHECK(at_opt.max_value_rel() <= 1e-12);
    CHECK(at_opt.max_hermite_rel() <= 1e-12);
    CHECK(at_opt.stationary());

    const auto red = fhmor::testing::random_pole_residue(rng, {.n_real = 1, .n_pairs = 0});
    const OptimalityResiduals off = optimality_residuals(full, red, kUnit);
    CHECK(std::max(off.max_value_rel(), off.max_hermite_rel()) > 1e-3);
    CHECK(off.left_abs.minCoeff() >= 0.0);
    CHECK(off.hermite_abs.minCoeff() >= 0.0);
}
