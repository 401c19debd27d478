#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <fhmor/conditions.hpp>
#include <fhmor/types.hpp>

namespace fhmor {

enum class InitSource { Auto, Pod, Tlbt, Random, File };

// Linear system of the residue subproblem at fixed reduced poles:
// gram_{ij} = phi1(λ_i + λ_j, tf) (complex symmetric, no conjugation) and
// rhs_i = Σ_k ψ_k phi1(ρ_k + λ_i, tf) = G(−λ_i). Solving gram·φ = rhs gives
// the globally optimal residues and enforces the value interpolation
// conditions at the mirrored poles.
struct ResidueSystem {
    Eigen::MatrixXcd gram;
    Eigen::VectorXcd rhs;
    bool near_zero_pole_pair = false;  // some λ_i + λ_j fell into the series branch
};

struct ResidueSolve {
    Eigen::VectorXcd phi;
    double cond = 0.0;
    bool ill_conditioned = false;  // cond above 1e12
};

struct VpObjective {
    double J = 0.0;
    Eigen::VectorXcd phi;
    double cond = 0.0;
};

struct OptimizerConfig {
    int max_iters = 200;
    double grad_tol = 1e-8;       // infinity norm of the real pole gradient
    double step_tol = 1e-10;      // relative pole change
    double ls_shrink = 0.5;       // backtracking factor
    double ls_slope = 1e-4;       // Armijo sufficient-decrease constant
    InitSource init = InitSource::Auto;
    std::uint64_t seed = 0;
    std::string init_file{};      // poles file for InitSource::File
    int pod_snapshots = 200;
};

struct ReductionResult {
    PoleResidueModel reduced;
    StateSpaceModel realization;       // real block-diagonal form of `reduced`
    std::vector<double> J_trace;       // accepted iterates, nonincreasing
    OptimalityResiduals residuals;
    int iterations = 0;
    bool converged = false;
    std::string termination;           // grad_tol | step_tol | max_iters | line_search
    double init_J = 0.0;
    double final_J = 0.0;
    double cond_M = 0.0;
};

// Real coordinates for a conjugate-closed pole set: one parameter per real
// pole, (Re, Im) for each conjugate pair's +Im representative. Keeps BFGS
// steps on the conjugate-closed manifold by construction.
struct PoleParametrization {
    std::vector<Eigen::Index> real_positions;                    // decoded indices
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;    // (rep, conj) indices
    Eigen::Index pole_count = 0;

    int dim() const { return static_cast<int>(real_positions.size() + 2 * pairs.size()); }
    Eigen::VectorXcd decode(const Eigen::VectorXd& x) const;
    Eigen::VectorXd encode(const Eigen::VectorXcd& poles) const;
    // Maps per-pole complex derivatives ∂J/∂λ to the real coordinates.
    Eigen::VectorXd fold_gradient(const Eigen::VectorXcd& d_pole) const;
};

// Canonicalizes (sorts) the poles; throws ConjugateClosureViolation when the
// set is not conjugate-closed.
PoleParametrization make_pole_parametrization(const Eigen::VectorXcd& poles);

PoleResidueModel siso_model_from(const Eigen::VectorXcd& poles, const Eigen::VectorXcd& residues);

ResidueSystem build_residue_system(const PoleResidueModel& full, const Eigen::VectorXcd& poles,
                                   Horizon horizon);

ResidueSolve optimal_residues(const PoleResidueModel& full, const Eigen::VectorXcd& poles,
                              Horizon horizon);

// Variable-projection objective: J at the optimal residues for these poles.
VpObjective objective_vp(const PoleResidueModel& full, const Eigen::VectorXcd& poles,
                         Horizon horizon);

// Same with ‖h‖² precomputed; the full-model norm is constant across an
// optimization run and dominates the cost of a single evaluation.
VpObjective objective_vp_with_norm(const PoleResidueModel& full, const Eigen::VectorXcd& poles,
                                   Horizon horizon, double full_norm_sq);

// Gradient of objective_vp in the real parametrization of `poles` (envelope
// theorem: residues stay at their optimum, so only the explicit pole
// dependence contributes).
Eigen::VectorXd pole_gradient_vp(const PoleResidueModel& full, const Eigen::VectorXcd& poles,
                                 Horizon horizon);

// BFGS descent over the reduced poles with globally optimal residues per
// evaluation. `full` must be SISO and conjugate-closed.
ReductionResult fhirka_run(const PoleResidueModel& full, const Eigen::VectorXcd& init_poles,
                           Horizon horizon, const OptimizerConfig& config = {});

// Convenience entry: modal-decomposes the model, picks initial poles per
// config.init (Auto = TLBT when stable, else POD, random as fallback).
ReductionResult fhirka_run(const StateSpaceModel& full, int r, Horizon horizon,
                           const OptimizerConfig& config = {});

// Initial poles as fhirka_run(StateSpaceModel, ...) would choose them.
Eigen::VectorXcd initial_poles(const StateSpaceModel& full, int r, Horizon horizon,
                               const OptimizerConfig& config);

// Deterministic random conjugate-closed pole set: log-spaced real parts in
// [-10, -0.1], log-spaced imaginary parts for the pairs.
Eigen::VectorXcd random_initial_poles(int r, std::uint64_t seed);

}  // namespace fhmor
