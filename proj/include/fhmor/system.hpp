#pragma once

#include <cstdint>
#include <vector>

#include <fhmor/types.hpp>

namespace fhmor {

// Pairing report from validate_conjugate_closure. partner[i] == i marks a real
// pole; partner[i] == -1 marks an unpaired complex pole.
struct ClosureReport {
    bool closed = false;
    std::vector<Eigen::Index> partner;
    std::vector<std::string> issues;
};

// Eigen-decomposes A and returns the n-term pole-residue form with
// c_j = C·x_j and b_jᵀ = y_jᵀ·B, eigenvectors normalized to y_jᵀ x_j = 1.
// Terms come out sorted by (Re, |Im|, sign Im) with conjugate pairs made
// exactly conjugate. Throws NonDiagonalizable when the minimum eigenvalue gap
// falls below gap_threshold_rel·‖A‖_F.
PoleResidueModel modal_decompose(const StateSpaceModel& model,
                                 double gap_threshold_rel = 1e-10);

// modal_decompose with one jitter-and-retry: on NonDiagonalizable, perturbs A
// by jitter_rel·‖A‖ (seeded, deterministic) and tries again. Baseline reduced
// models occasionally need this to serve as optimizer initializations.
PoleResidueModel modal_decompose_jittered(StateSpaceModel model, std::uint64_t seed,
                                          double jitter_rel = 1e-8);

// H(s) = C·(sI − A)^{-1}·B.
Eigen::MatrixXcd eval_transfer(const StateSpaceModel& model, Complex s);

// H(s) = Σ_i ℓ_i r_iᵀ/(s − λ_i).
Eigen::MatrixXcd eval_transfer(const PoleResidueModel& prm, Complex s);

// H'(s) = −Σ_i ℓ_i r_iᵀ/(s − λ_i)².
Eigen::MatrixXcd eval_transfer_derivative(const PoleResidueModel& prm, Complex s);

// h(t) = Re Σ_i e^{λ_i t} ℓ_i r_iᵀ for t ≥ 0. The imaginary residual must be
// dust (conjugate closure), otherwise ConjugateClosureViolation.
Eigen::MatrixXd impulse_response(const PoleResidueModel& prm, double t);

ClosureReport validate_conjugate_closure(const PoleResidueModel& prm, double tol = 1e-12);

// Real block-diagonal realization of a conjugate-closed SISO model: 1x1 blocks
// for real poles, 2x2 rotation blocks [[a, b], [-b, a]] for pairs a ± ib.
StateSpaceModel realize_siso(const PoleResidueModel& prm);

}  // namespace fhmor
