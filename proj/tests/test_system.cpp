#include <doctest.h>

#include "fhmor/linalg.hpp"
#include "fhmor/system.hpp"
#include "helpers.hpp"

using namespace fhmor;
using fhmor::testing::rel_close;

namespace {

StateSpaceModel scalar_model(double a, double b, double c) {
    Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1);
    A << a;
    B << b;
    C << c;
    return StateSpaceModel(A, B, C);
}

}  // namespace

TEST_CASE("modal decomposition of trivial models") {
    const PoleResidueModel one = modal_decompose(scalar_model(-1.0, 1.0, 1.0));
    REQUIRE(one.size() == 1);
    CHECK(one.poles(0) == Complex(-1.0, 0.0));
    CHECK(rel_close(one.residue(0), Complex(1.0, 0.0), 1e-14));

    Eigen::MatrixXd A = Eigen::Vector2d(-1.0, -2.0).asDiagonal();
    Eigen::MatrixXd B(2, 1), C(1, 2);
    B << 1, 1;
    C << 1, 1;
    const PoleResidueModel two = modal_decompose(StateSpaceModel(A, B, C));
    REQUIRE(two.size() == 2);
    CHECK(two.poles(0) == Complex(-2.0, 0.0));  // sorted by real part
    CHECK(two.poles(1) == Complex(-1.0, 0.0));
    CHECK(rel_close(two.residue(0), Complex(1.0, 0.0), 1e-14));
    CHECK(rel_close(two.residue(1), Complex(1.0, 0.0), 1e-14));
}

TEST_CASE("modal decomposition: conjugate pair with transfer-function oracle") {
    Eigen::MatrixXd A(2, 2), B(2, 1), C(1, 2);
    A << 0, 1, -2, -2;
    B << 0, 1;
    C << 1, 0;
    const StateSpaceModel model(A, B, C);
    const PoleResidueModel prm = modal_decompose(model);

    REQUIRE(prm.size() == 2);
    CHECK(rel_close(prm.poles(0), Complex(-1.0, 1.0), 1e-12));
    CHECK(prm.poles(1) == std::conj(prm.poles(0)));
    CHECK(validate_conjugate_closure(prm).closed);

    // direct rational evaluation oracle at s = 1
    const Complex s(1.0, 0.0);
    CHECK(rel_close(eval_transfer(prm, s)(0, 0), eval_transfer(model, s)(0, 0), 1e-12));
}

TEST_CASE("modal decomposition agrees with state-space evaluation everywhere") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 8; ++trial) {
        const StateSpaceModel model = fhmor::testing::random_state_space(rng, 5, 2, 2);
        const PoleResidueModel prm = modal_decompose(model);
        CHECK(validate_conjugate_closure(prm).closed);
        const Complex s(2.0, 3.0);
        CHECK(rel_close(eval_transfer(prm, s), eval_transfer(model, s), 1e-10));
    }
}

TEST_CASE("modal decomposition rejects repeated eigenvalues") {
    Eigen::MatrixXd A(2, 2), B(2, 1), C(1, 2);
    A << -1, 1, 0, -1;  // Jordan block
    B << 0, 1;
    C << 1, 0;
    CHECK_THROWS_AS(modal_decompose(StateSpaceModel(A, B, C)), NonDiagonalizable);
}

TEST_CASE("state-space transfer evaluation") {
    const StateSpaceModel m = scalar_model(-1.0, 1.0, 1.0);
    CHECK(rel_close(eval_transfer(m, Complex(0.0, 0.0))(0, 0), Complex(1.0, 0.0), 1e-15));
    CHECK(rel_close(eval_transfer(m, Complex(1.0, 0.0))(0, 0), Complex(0.5, 0.0), 1e-15));
    CHECK_THROWS_AS(eval_transfer(m, Complex(-1.0, 0.0)), SingularShift);
}

TEST_CASE("pole-residue transfer evaluation") {
    const PoleResidueModel one =
        PoleResidueModel::siso(Eigen::VectorXcd::Constant(1, Complex(-1.0, 0.0)),
                               Eigen::VectorXcd::Constant(1, Complex(1.0, 0.0)));
    CHECK(rel_close(eval_transfer(one, Complex(0.0, 0.0))(0, 0), Complex(1.0, 0.0), 1e-15));
    CHECK_THROWS_AS(eval_transfer(one, Complex(-1.0, 0.0)), PoleHit);

    // conjugate pair: H(0) = 2 Re(1/(1+i)) = 1
    Eigen::VectorXcd poles(2), residues(2);
    poles << Complex(-1.0, 1.0), Complex(-1.0, -1.0);
    residues << Complex(1.0, 0.0), Complex(1.0, 0.0);
    const PoleResidueModel pair = PoleResidueModel::siso(poles, residues);
    CHECK(rel_close(eval_transfer(pair, Complex(0.0, 0.0))(0, 0), Complex(1.0, 0.0), 1e-14));
}

TEST_CASE("pole-residue evaluation matches the large-|s| asymptote") {
    std::mt19937_64 rng(3);
    const PoleResidueModel prm =
        fhmor::testing::random_pole_residue(rng, {.n_real = 2, .n_pairs = 2, .p = 2, .m = 2});
    const Complex s(1e8, 3e7);
    Eigen::MatrixXcd residue_sum = Eigen::MatrixXcd::Zero(prm.outputs(), prm.inputs());
    for (Eigen::Index i = 0; i < prm.size(); ++i)
        residue_sum += prm.left.col(i) * prm.right.col(i).transpose();
    CHECK(rel_close(eval_transfer(prm, s), Eigen::MatrixXcd(residue_sum / s), 1e-6));
}

TEST_CASE("impulse response anchors and matrix-exponential oracle") {
    const PoleResidueModel one =
        PoleResidueModel::siso(Eigen::VectorXcd::Constant(1, Complex(-1.0, 0.0)),
                               Eigen::VectorXcd::Constant(1, Complex(1.0, 0.0)));
    CHECK(impulse_response(one, 0.0)(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(impulse_response(one, 1.0)(0, 0) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-12));
    CHECK_THROWS_AS(impulse_response(one, -0.5), InvalidArgument);

    std::mt19937_64 rng(17);
    const StateSpaceModel model = fhmor::testing::random_state_space(rng, 3, 1, 1);
    const PoleResidueModel prm = modal_decompose(model);
    for (const double t : {0.1, 1.0}) {
        const Eigen::MatrixXd oracle = model.C * expm(model.A * t) * model.B;
        CHECK(rel_close(Eigen::MatrixXcd(impulse_response(prm, t).cast<Complex>()),
                        Eigen::MatrixXcd(oracle.cast<Complex>()), 1e-9));
    }
}

TEST_CASE("conjugate closure validation") {
    const PoleResidueModel real_pole =
        PoleResidueModel::siso(Eigen::VectorXcd::Constant(1, Complex(-1.0, 0.0)),
                               Eigen::VectorXcd::Constant(1, Complex(1.0, 0.0)));
    CHECK(validate_conjugate_closure(real_pole).closed);

    const PoleResidueModel lonely =
        PoleResidueModel::siso(Eigen::VectorXcd::Constant(1, Complex(-1.0, 1.0)),
                               Eigen::VectorXcd::Constant(1, Complex(1.0, 0.0)));
    CHECK_FALSE(validate_conjugate_closure(lonely).closed);
    CHECK_THROWS_AS(impulse_response(lonely, 1.0), ConjugateClosureViolation);

    Eigen::VectorXcd poles(2), residues(2);
    poles << Complex(-1.0, 1.0), Complex(-1.0, -1.0);
    residues << Complex(1.0, 2.0), Complex(1.0, -2.0);
    const PoleResidueModel pair = PoleResidueModel::siso(poles, residues);
    const ClosureReport report = validate_conjugate_closure(pair);
    CHECK(report.closed);
    CHECK(report.partner[0] == 1);
    CHECK(report.partner[1] == 0);

    residues(1) = Complex(1.0, 2.0);  // break residue conjugation
    CHECK_FALSE(validate_conjugate_closure(PoleResidueModel::siso(poles, residues)).closed);
}

TEST_CASE("realized SISO models reproduce transfer samples") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 6; ++trial) {
        const PoleResidueModel prm =
            fhmor::testing::random_pole_residue(rng, {.n_real = 1, .n_pairs = 2});
        const StateSpaceModel real_form = realize_siso(prm);
        CHECK(real_form.order() == prm.size());
        for (const Complex s : {Complex(0.3, 0.0), Complex(1.0, 2.0), Complex(-0.2, 0.7)})
            CHECK(rel_close(eval_transfer(real_form, s)(0, 0), eval_transfer(prm, s)(0, 0),
                            1e-10));
    }
}

TEST_CASE("transfer derivative matches finite differences") {
    std::mt19937_64 rng(31);
    const PoleResidueModel prm = fhmor::testing::random_pole_residue(rng);
    const Complex s(0.8, 0.4);
    const double h = 1e-6;
    const Eigen::MatrixXcd fd =
        (eval_transfer(prm, s + h) - eval_transfer(prm, s - h)) / (2.0 * h);
    CHECK(rel_close(eval_transfer_derivative(prm, s), fd, 1e-6));
}
