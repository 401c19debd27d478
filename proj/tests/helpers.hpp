#pragma once

// Shared test utilities: deterministic random models, finite differences, and
// tolerance helpers. Everything here is an independent oracle path — nothing
// reuses the closed-form kernels it is meant to check.

#include <random>

#include "fhmor/linalg.hpp"
#include "fhmor/types.hpp"

namespace fhmor::testing {

inline bool rel_close(double a, double b, double rtol, double atol = 0.0) {
    return std::abs(a - b) <= rtol * std::max(std::abs(a), std::abs(b)) + atol;
}

inline bool rel_close(Complex a, Complex b, double rtol, double atol = 0.0) {
    return std::abs(a - b) <= rtol * std::max(std::abs(a), std::abs(b)) + atol;
}

inline bool rel_close(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B, double rtol,
                      double atol = 0.0) {
    return (A - B).norm() <= rtol * std::max(A.norm(), B.norm()) + atol;
}

struct ModelOptions {
    int n_real = 2;
    int n_pairs = 1;
    Eigen::Index p = 1;
    Eigen::Index m = 1;
    double re_min = 0.2;   // pole real-part magnitudes drawn from [re_min, re_max]
    double re_max = 5.0;
    bool unstable_mix = false;  // flip some real parts positive
};

// Conjugate-closed pole-residue model with well-separated random poles.
inline PoleResidueModel random_pole_residue(std::mt19937_64& rng, const ModelOptions& opt = {}) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const Eigen::Index r = opt.n_real + 2 * opt.n_pairs;
    Eigen::VectorXcd poles(r);
    Eigen::MatrixXcd left(opt.p, r);
    Eigen::MatrixXcd right(opt.m, r);

    auto draw_re = [&] {
        const double mag = opt.re_min + (opt.re_max - opt.re_min) * unit(rng);
        const bool flip = opt.unstable_mix && unit(rng) < 0.3;
        return flip ? 0.2 * mag : -mag;
    };

    Eigen::Index k = 0;
    for (int i = 0; i < opt.n_real; ++i, ++k) {
        poles(k) = Complex(draw_re(), 0.0);
        for (Eigen::Index row = 0; row < opt.p; ++row) left(row, k) = gauss(rng);
        for (Eigen::Index row = 0; row < opt.m; ++row) right(row, k) = gauss(rng);
    }
    for (int i = 0; i < opt.n_pairs; ++i, k += 2) {
        const double im = 0.3 + 3.0 * unit(rng);
        poles(k) = Complex(draw_re(), im);
        poles(k + 1) = std::conj(poles(k));
        for (Eigen::Index row = 0; row < opt.p; ++row) {
            left(row, k) = Complex(gauss(rng), gauss(rng));
            left(row, k + 1) = std::conj(left(row, k));
        }
        for (Eigen::Index row = 0; row < opt.m; ++row) {
            right(row, k) = Complex(gauss(rng), gauss(rng));
            right(row, k + 1) = std::conj(right(row, k));
        }
    }

    // Separate any near-coincident poles (rare with continuous draws).
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = i + 1; j < r; ++j)
            if (std::abs(poles(i) - poles(j)) < 1e-3) poles(j) += Complex(-0.05 * (j + 1), 0.0);

    return PoleResidueModel(poles, left, right);
}

// Random state-space model with known simple spectrum: block-diagonal poles
// conjugated by a random orthogonal similarity.
inline StateSpaceModel random_state_space(std::mt19937_64& rng, int n, Eigen::Index m = 1,
                                          Eigen::Index p = 1, bool stable = true) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    int pos = 0;
    while (pos < n) {
        const double re = stable ? -(0.2 + 4.0 * unit(rng)) : (unit(rng) < 0.2 ? 0.5 : -1.0) *
                                                                  (0.2 + 4.0 * unit(rng));
        if (n - pos >= 2 && unit(rng) < 0.5) {
            const double im = 0.3 + 3.0 * unit(rng);
            D(pos, pos) = re;
            D(pos, pos + 1) = im;
            D(pos + 1, pos) = -im;
            D(pos + 1, pos + 1) = re;
            pos += 2;
        } else {
            D(pos, pos) = re - 0.01 * pos;  // keep reals separated
            pos += 1;
        }
    }

    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = gauss(rng);
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
    const Eigen::MatrixXd A = Q * D * Q.transpose();

    Eigen::MatrixXd B(n, m), C(p, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) B(i, j) = gauss(rng);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < n; ++j) C(i, j) = gauss(rng);
    return StateSpaceModel(A, B, C);
}

// Central finite difference of a scalar function of one real coordinate.
template <typename F>
double central_diff(F&& f, double h) {
    return (f(h) - f(-h)) / (2.0 * h);
}

}  // namespace fhmor::testing
