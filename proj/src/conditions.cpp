#include "fhmor/conditions.hpp"

#include "fhmor/linalg.hpp"
#include "fhmor/phi.hpp"
#include "fhmor/system.hpp"

namespace fhmor {

Eigen::MatrixXcd truncated_laplace(const PoleResidueModel& model, Complex s, Horizon horizon) {
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(model.outputs(), model.inputs());
    for (Eigen::Index j = 0; j < model.size(); ++j)
        G += phi1(model.poles(j) - s, horizon.tf) *
             (model.left.col(j) * model.right.col(j).transpose());
    return G;
}

Eigen::MatrixXcd truncated_laplace(const StateSpaceModel& model, Complex s, Horizon horizon) {
    if (-s.real() * horizon.tf > detail::kPhiOverflowLimit)
        throw OverflowError("truncated_laplace: exp(-s*tf) overflows");
    const Complex damp = std::exp(-s * horizon.tf);
    const Eigen::MatrixXd FB = expm(model.A * horizon.tf) * model.B;
    Eigen::MatrixXcd shifted = -model.A.cast<Complex>();
    shifted.diagonal().array() += s;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(shifted);
    if (!lu.isInvertible())
        throw SingularShift("truncated_laplace: sI - A singular");
    const Eigen::MatrixXcd rhs = model.B.cast<Complex>() - damp * FB.cast<Complex>();
    return model.C.cast<Complex>() * lu.solve(rhs);
}

Eigen::MatrixXcd truncated_laplace_derivative(const PoleResidueModel& model, Complex s,
                                              Horizon horizon) {
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(model.outputs(), model.inputs());
    for (Eigen::Index j = 0; j < model.size(); ++j)
        D -= phi2(model.poles(j) - s, horizon.tf) *
             (model.left.col(j) * model.right.col(j).transpose());
    return D;
}

GradientBundle gradients(const PoleResidueModel& full, const PoleResidueModel& reduced,
                         Horizon horizon) {
    if (full.outputs() != reduced.outputs() || full.inputs() != reduced.inputs())
        throw DimensionMismatch("gradients: models have different (p, m)");
    const Eigen::Index r = reduced.size();
    GradientBundle bundle;
    bundle.d_pole.resize(r);
    bundle.d_left.resize(reduced.outputs(), r);
    bundle.d_right.resize(reduced.inputs(), r);

    for (Eigen::Index k = 0; k < r; ++k) {
        const Complex mirror = -reduced.poles(k);
        const Eigen::MatrixXcd diff = truncated_laplace(reduced, mirror, horizon) -
                                      truncated_laplace(full, mirror, horizon);
        const Eigen::MatrixXcd diff_prime =
            truncated_laplace_derivative(full, mirror, horizon) -
            truncated_laplace_derivative(reduced, mirror, horizon);
        bundle.d_right.col(k) = 2.0 * (diff.transpose() * reduced.left.col(k));
        bundle.d_left.col(k) = 2.0 * (diff * reduced.right.col(k));
        bundle.d_pole(k) =
            2.0 * (reduced.left.col(k).transpose() * diff_prime * reduced.right.col(k)).value();
    }
    return bundle;
}

OptimalityResiduals optimality_residuals(const PoleResidueModel& full,
                                         const PoleResidueModel& reduced, Horizon horizon) {
    if (full.outputs() != reduced.outputs() || full.inputs() != reduced.inputs())
        throw DimensionMismatch("optimality_residuals: models have different (p, m)");
    const Eigen::Index r = reduced.size();
    constexpr double kFloor = 1e-300;

    OptimalityResiduals res;
    res.left_abs.resize(r);
    res.right_abs.resize(r);
    res.hermite_abs.resize(r);
    res.left_rel.resize(r);
    res.right_rel.resize(r);
    res.hermite_rel.resize(r);

    for (Eigen::Index k = 0; k < r; ++k) {
        const Complex mirror = -reduced.poles(k);
        const Eigen::MatrixXcd G = truncated_laplace(full, mirror, horizon);
        const Eigen::MatrixXcd Gr = truncated_laplace(reduced, mirror, horizon);
        const Eigen::MatrixXcd Gp = truncated_laplace_derivative(full, mirror, horizon);
        const Eigen::MatrixXcd Grp = truncated_laplace_derivative(reduced, mirror, horizon);

        const Eigen::RowVectorXcd lT = reduced.left.col(k).transpose();
        const Eigen::VectorXcd rk = reduced.right.col(k);

        res.left_abs(k) = (lT * (G - Gr)).norm();
        res.right_abs(k) = ((G - Gr) * rk).norm();
        res.hermite_abs(k) = std::abs((lT * (Gp - Grp) * rk).value());

        res.left_rel(k) = res.left_abs(k) / ((lT * G).norm() + kFloor);
        res.right_rel(k) = res.right_abs(k) / ((G * rk).norm() + kFloor);
        res.hermite_rel(k) = res.hermite_abs(k) / (std::abs((lT * Gp * rk).value()) + kFloor);
    }
    return res;
}

}  // namespace fhmor
