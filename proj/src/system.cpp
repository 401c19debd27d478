#include "fhmor/system.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

namespace fhmor {

namespace {

constexpr double kExpOverflow = 700.0;

bool nearly_real(Complex z, double tol) { return std::abs(z.imag()) <= tol * (1.0 + std::abs(z)); }

}  // namespace

PoleResidueModel modal_decompose(const StateSpaceModel& model, double gap_threshold_rel) {
    const Eigen::Index n = model.order();

    Eigen::EigenSolver<Eigen::MatrixXd> es(model.A);
    if (es.info() != Eigen::Success)
        throw NonDiagonalizable("modal_decompose: eigenvalue iteration failed");

    const Eigen::VectorXcd rho = es.eigenvalues();
    const Eigen::MatrixXcd X = es.eigenvectors();

    const double gap_threshold = gap_threshold_rel * std::max(model.A.norm(), 1e-300);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (std::abs(rho(i) - rho(j)) < gap_threshold)
                throw NonDiagonalizable("modal_decompose: eigenvalue gap " +
                                        std::to_string(std::abs(rho(i) - rho(j))) +
                                        " below threshold (poles must be simple)");

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(X);
    if (!lu.isInvertible())
        throw NonDiagonalizable("modal_decompose: eigenvector matrix is singular");

    // c_j = C x_j, b_jᵀ = y_jᵀ B with Y = X^{-1} (so y_jᵀ x_j = 1 exactly).
    Eigen::MatrixXcd c = model.C * X;                // p x n, column j
    Eigen::MatrixXcd bT = lu.solve(model.B.cast<Complex>());  // n x m, row j

    // Deterministic term order regardless of eigen-solver ordering.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        const Complex za = rho(a), zb = rho(b);
        if (za.real() != zb.real()) return za.real() < zb.real();
        const double ia = std::abs(za.imag()), ib = std::abs(zb.imag());
        if (ia != ib) return ia < ib;
        return za.imag() > zb.imag();  // +Im representative first
    });

    Eigen::VectorXcd poles(n);
    Eigen::MatrixXcd left(model.outputs(), n);
    Eigen::MatrixXcd right(model.inputs(), n);
    for (Eigen::Index k = 0; k < n; ++k) {
        poles(k) = rho(idx[static_cast<std::size_t>(k)]);
        left.col(k) = c.col(idx[static_cast<std::size_t>(k)]);
        right.col(k) = bT.row(idx[static_cast<std::size_t>(k)]).transpose();
    }

    // Enforce exact conjugate closure: average each pair onto its
    // representative, then mirror. Real eigenvalues of a real A are exactly
    // real already, so only the paired walk matters.
    const double pair_tol = 1e-8;
    Eigen::Index k = 0;
    while (k < n) {
        if (nearly_real(poles(k), pair_tol)) {
            poles(k) = Complex(poles(k).real(), 0.0);
            left.col(k) = left.col(k).real().cast<Complex>();
            right.col(k) = right.col(k).real().cast<Complex>();
            ++k;
            continue;
        }
        if (k + 1 >= n || std::abs(poles(k + 1) - std::conj(poles(k))) >
                              pair_tol * (1.0 + std::abs(poles(k))))
            throw ConjugateClosureViolation(
                "modal_decompose: complex eigenvalue without conjugate partner");
        poles(k) = 0.5 * (poles(k) + std::conj(poles(k + 1)));
        poles(k + 1) = std::conj(poles(k));
        left.col(k) = 0.5 * (left.col(k) + left.col(k + 1).conjugate());
        left.col(k + 1) = left.col(k).conjugate();
        right.col(k) = 0.5 * (right.col(k) + right.col(k + 1).conjugate());
        right.col(k + 1) = right.col(k).conjugate();
        k += 2;
    }

    return PoleResidueModel(std::move(poles), std::move(left), std::move(right));
}

PoleResidueModel modal_decompose_jittered(StateSpaceModel model, std::uint64_t seed,
                                          double jitter_rel) {
    try {
        return modal_decompose(model);
    } catch (const NonDiagonalizable&) {
        std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double scale = jitter_rel * std::max(model.A.norm(), 1.0);
        for (Eigen::Index i = 0; i < model.A.rows(); ++i)
            for (Eigen::Index j = 0; j < model.A.cols(); ++j) model.A(i, j) += scale * u(rng);
        return modal_decompose(model);
    }
}

Eigen::MatrixXcd eval_transfer(const StateSpaceModel& model, Complex s) {
    const Eigen::Index n = model.order();
    Eigen::MatrixXcd shifted = -model.A.cast<Complex>();
    shifted.diagonal().array() += s;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(shifted);
    if (!lu.isInvertible())
        throw SingularShift("eval_transfer: sI - A is singular at s = (" +
                            std::to_string(s.real()) + ", " + std::to_string(s.imag()) + ")");
    (void)n;
    return model.C.cast<Complex>() * lu.solve(model.B.cast<Complex>());
}

Eigen::MatrixXcd eval_transfer(const PoleResidueModel& prm, Complex s) {
    const double tol = 1e-12 * (1.0 + std::abs(s) + prm.poles.cwiseAbs().maxCoeff());
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(prm.outputs(), prm.inputs());
    for (Eigen::Index i = 0; i < prm.size(); ++i) {
        const Complex d = s - prm.poles(i);
        if (std::abs(d) <= tol)
            throw PoleHit("eval_transfer: s hits pole " + std::to_string(i));
        H += prm.left.col(i) * prm.right.col(i).transpose() / d;
    }
    return H;
}

Eigen::MatrixXcd eval_transfer_derivative(const PoleResidueModel& prm, Complex s) {
    const double tol = 1e-12 * (1.0 + std::abs(s) + prm.poles.cwiseAbs().maxCoeff());
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(prm.outputs(), prm.inputs());
    for (Eigen::Index i = 0; i < prm.size(); ++i) {
        const Complex d = s - prm.poles(i);
        if (std::abs(d) <= tol)
            throw PoleHit("eval_transfer_derivative: s hits pole " + std::to_string(i));
        D -= prm.left.col(i) * prm.right.col(i).transpose() / (d * d);
    }
    return D;
}

Eigen::MatrixXd impulse_response(const PoleResidueModel& prm, double t) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw InvalidArgument("impulse_response: t must be finite and >= 0");

    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(prm.outputs(), prm.inputs());
    double term_scale = 0.0;
    for (Eigen::Index i = 0; i < prm.size(); ++i) {
        if (prm.poles(i).real() * t > kExpOverflow)
            throw OverflowError("impulse_response: exp(Re(lambda)*t) overflows");
        const Complex e = std::exp(prm.poles(i) * t);
        S += e * (prm.left.col(i) * prm.right.col(i).transpose());
        term_scale += std::abs(e) * prm.left.col(i).norm() * prm.right.col(i).norm();
    }
    const double imag_norm = S.imag().norm();
    if (imag_norm > 1e-10 * S.norm() + 1e-14 * term_scale)
        throw ConjugateClosureViolation(
            "impulse_response: imaginary residual " + std::to_string(imag_norm) +
            " (model is not conjugate-closed)");
    return S.real();
}

ClosureReport validate_conjugate_closure(const PoleResidueModel& prm, double tol) {
    const Eigen::Index r = prm.size();
    ClosureReport report;
    report.partner.assign(static_cast<std::size_t>(r), Eigen::Index{-1});
    std::vector<bool> used(static_cast<std::size_t>(r), false);

    auto residues_conjugate = [&](Eigen::Index i, Eigen::Index j) {
        const double lscale = 1.0 + prm.left.col(i).norm();
        const double rscale = 1.0 + prm.right.col(i).norm();
        return (prm.left.col(j) - prm.left.col(i).conjugate()).norm() <= tol * lscale &&
               (prm.right.col(j) - prm.right.col(i).conjugate()).norm() <= tol * rscale;
    };

    for (Eigen::Index i = 0; i < r; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        if (nearly_real(prm.poles(i), tol)) {
            const double imag_dust = prm.left.col(i).imag().norm() + prm.right.col(i).imag().norm();
            if (imag_dust > tol * (1.0 + prm.left.col(i).norm() + prm.right.col(i).norm())) {
                report.issues.push_back("real pole " + std::to_string(i) +
                                        " carries a complex residue");
            } else {
                report.partner[static_cast<std::size_t>(i)] = i;
            }
            used[static_cast<std::size_t>(i)] = true;
            continue;
        }
        // Closest unused candidate for conj(λ_i).
        Eigen::Index best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < r; ++j) {
            if (j == i || used[static_cast<std::size_t>(j)]) continue;
            const double d = std::abs(prm.poles(j) - std::conj(prm.poles(i)));
            if (d < best_dist) {
                best_dist = d;
                best = j;
            }
        }
        if (best < 0 || best_dist > tol * (1.0 + std::abs(prm.poles(i)))) {
            report.issues.push_back("pole " + std::to_string(i) + " has no conjugate partner");
            used[static_cast<std::size_t>(i)] = true;
            continue;
        }
        if (!residues_conjugate(i, best)) {
            report.issues.push_back("poles " + std::to_string(i) + "/" + std::to_string(best) +
                                    " pair up but their residues are not conjugate");
            used[static_cast<std::size_t>(i)] = used[static_cast<std::size_t>(best)] = true;
            continue;
        }
        report.partner[static_cast<std::size_t>(i)] = best;
        report.partner[static_cast<std::size_t>(best)] = i;
        used[static_cast<std::size_t>(i)] = used[static_cast<std::size_t>(best)] = true;
    }
    report.closed = report.issues.empty() &&
                    std::none_of(report.partner.begin(), report.partner.end(),
                                 [](Eigen::Index p) { return p < 0; });
    return report;
}

StateSpaceModel realize_siso(const PoleResidueModel& prm) {
    if (!prm.is_siso()) throw DimensionMismatch("realize_siso: SISO models only");
    const ClosureReport report = validate_conjugate_closure(prm, 1e-9);
    if (!report.closed)
        throw ConjugateClosureViolation("realize_siso: model is not conjugate-closed");

    const Eigen::Index r = prm.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(r, r);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(r, 1);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(1, r);

    Eigen::Index pos = 0;
    std::vector<bool> done(static_cast<std::size_t>(r), false);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (done[static_cast<std::size_t>(i)]) continue;
        const Eigen::Index j = report.partner[static_cast<std::size_t>(i)];
        const Complex phi = prm.residue(i);
        if (j == i) {
            A(pos, pos) = prm.poles(i).real();
            B(pos, 0) = 1.0;
            C(0, pos) = phi.real();
            done[static_cast<std::size_t>(i)] = true;
            pos += 1;
        } else {
            // Representative with positive imaginary part.
            const bool rep_is_i = prm.poles(i).imag() > 0.0;
            const Complex lam = rep_is_i ? prm.poles(i) : prm.poles(j);
            const Complex res = rep_is_i ? phi : prm.residue(j);
            A(pos, pos) = lam.real();
            A(pos, pos + 1) = lam.imag();
            A(pos + 1, pos) = -lam.imag();
            A(pos + 1, pos + 1) = lam.real();
            B(pos, 0) = 1.0;
            C(0, pos) = 2.0 * res.real();
            C(0, pos + 1) = 2.0 * res.imag();
            done[static_cast<std::size_t>(i)] = done[static_cast<std::size_t>(j)] = true;
            pos += 2;
        }
    }
    return StateSpaceModel(std::move(A), std::move(B), std::move(C));
}

}  // namespace fhmor
