#include "fhmor/types.hpp"

namespace fhmor {

namespace {

void require_finite(const Eigen::MatrixXd& M, const char* what) {
    if (!M.allFinite()) throw InvalidArgument(std::string(what) + ": entries must be finite");
}

void require_finite(const Eigen::MatrixXcd& M, const char* what) {
    if (!M.allFinite()) throw InvalidArgument(std::string(what) + ": entries must be finite");
}

}  // namespace

StateSpaceModel::StateSpaceModel(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)) {
    if (A.rows() != A.cols())
        throw DimensionMismatch("StateSpaceModel: A must be square, got " +
                                std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
    if (B.rows() != A.rows())
        throw DimensionMismatch("StateSpaceModel: B has " + std::to_string(B.rows()) +
                                " rows, expected " + std::to_string(A.rows()));
    if (C.cols() != A.rows())
        throw DimensionMismatch("StateSpaceModel: C has " + std::to_string(C.cols()) +
                                " columns, expected " + std::to_string(A.rows()));
    if (A.rows() == 0 || B.cols() == 0 || C.rows() == 0)
        throw DimensionMismatch("StateSpaceModel: dimensions must be positive");
    require_finite(A, "StateSpaceModel A");
    require_finite(B, "StateSpaceModel B");
    require_finite(C, "StateSpaceModel C");
}

PoleResidueModel::PoleResidueModel(Eigen::VectorXcd poles_, Eigen::MatrixXcd left_,
                                   Eigen::MatrixXcd right_)
    : poles(std::move(poles_)), left(std::move(left_)), right(std::move(right_)) {
    const Eigen::Index r = poles.size();
    if (r == 0) throw DimensionMismatch("PoleResidueModel: needs at least one term");
    if (left.cols() != r || right.cols() != r)
        throw DimensionMismatch("PoleResidueModel: residue columns must match pole count");
    if (left.rows() == 0 || right.rows() == 0)
        throw DimensionMismatch("PoleResidueModel: residue directions must be non-empty");
    if (!poles.allFinite()) throw InvalidArgument("PoleResidueModel: poles must be finite");
    require_finite(left, "PoleResidueModel left");
    require_finite(right, "PoleResidueModel right");

    // Simple-pole assumption: reject coincident poles outright.
    const double scale = 1.0 + poles.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = i + 1; j < r; ++j)
            if (std::abs(poles(i) - poles(j)) <= 1e-14 * scale)
                throw DegeneratePoles("PoleResidueModel: poles " + std::to_string(i) + " and " +
                                      std::to_string(j) + " coincide");
}

PoleResidueModel PoleResidueModel::siso(const Eigen::VectorXcd& poles,
                                        const Eigen::VectorXcd& residues) {
    if (poles.size() != residues.size())
        throw DimensionMismatch("PoleResidueModel::siso: pole/residue count mismatch");
    Eigen::MatrixXcd left = residues.transpose();
    Eigen::MatrixXcd right = Eigen::MatrixXcd::Ones(1, poles.size());
    return PoleResidueModel(poles, std::move(left), std::move(right));
}

Complex PoleResidueModel::residue(Eigen::Index i) const {
    if (!is_siso()) throw DimensionMismatch("PoleResidueModel::residue: SISO only");
    return left(0, i) * right(0, i);
}

}  // namespace fhmor
