#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fhmor {

using Complex = std::complex<double>;

// Everything the library throws derives from Error, so callers can catch by
// category or wholesale.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NonDiagonalizable : Error { using Error::Error; };
struct SingularShift : Error { using Error::Error; };
struct PoleHit : Error { using Error::Error; };
struct ConjugateClosureViolation : Error { using Error::Error; };
struct OverflowError : Error { using Error::Error; };
struct NegativeErrorSquare : Error { using Error::Error; };
struct QuadratureNotConverged : Error { using Error::Error; };
struct LyapunovIllPosed : Error { using Error::Error; };
struct DegeneratePoles : Error { using Error::Error; };
struct SingularResidueSystem : Error { using Error::Error; };
struct PoleCollision : Error { using Error::Error; };
struct RankDeficientSnapshots : Error { using Error::Error; };
struct GramianFailure : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

struct TieAtTruncation : Error {
    TieAtTruncation(const std::string& msg, int suggested)
        : Error(msg), suggested_order(suggested) {}
    int suggested_order;
};

// The time interval [0, tf] every finite-horizon quantity integrates over.
struct Horizon {
    double tf;
    explicit Horizon(double tf_) : tf(tf_) {
        if (!std::isfinite(tf) || tf <= 0.0)
            throw InvalidArgument("Horizon: tf must be positive and finite");
    }
};

// Real state-space realization (A, B, C): x' = Ax + Bu, y = Cx.
// No stability requirement; finite horizons make unstable models first-class.
struct StateSpaceModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;

    StateSpaceModel() = default;
    StateSpaceModel(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_);

    Eigen::Index order() const { return A.rows(); }    // n
    Eigen::Index inputs() const { return B.cols(); }   // m
    Eigen::Index outputs() const { return C.rows(); }  // p
};

// Pole-residue form: h(t) = Σ_i e^{λ_i t} ℓ_i r_iᵀ, H(s) = Σ_i ℓ_i r_iᵀ/(s−λ_i).
// Column i of `left`/`right` holds ℓ_i / r_i. Poles must be pairwise distinct
// (simple poles); conjugate closure is validated separately where it matters.
struct PoleResidueModel {
    Eigen::VectorXcd poles;
    Eigen::MatrixXcd left;   // p x r
    Eigen::MatrixXcd right;  // m x r

    PoleResidueModel() = default;
    PoleResidueModel(Eigen::VectorXcd poles_, Eigen::MatrixXcd left_, Eigen::MatrixXcd right_);

    // SISO shorthand: ℓ_i = residue_i, r_i = 1.
    static PoleResidueModel siso(const Eigen::VectorXcd& poles, const Eigen::VectorXcd& residues);

    Eigen::Index size() const { return poles.size(); }       // r
    Eigen::Index outputs() const { return left.rows(); }     // p
    Eigen::Index inputs() const { return right.rows(); }     // m
    bool is_siso() const { return outputs() == 1 && inputs() == 1; }

    // Scalar residue ℓ_i·r_i; only meaningful for SISO models.
    Complex residue(Eigen::Index i) const;
};

}  // namespace fhmor
