#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <fhmor/fhirka.hpp>
#include <fhmor/types.hpp>

namespace fhmor {

// A named model plus the SISO channel selection used by the reducers
// (channel indices are 0-based here; manifests use 1-based).
struct ModelBundle {
    StateSpaceModel model;
    std::string name;
    std::string provenance;
    Eigen::Index input_channel = 0;
    Eigen::Index output_channel = 0;

    StateSpaceModel siso() const;
};

struct SweepSpec {
    std::vector<int> orders;
    Horizon horizon{1.0};
    std::vector<InitSource> inits{InitSource::Pod, InitSource::Tlbt, InitSource::Random};
    OptimizerConfig optimizer{};
    int threads = 0;  // 0 = hardware concurrency
};

// final_J <= init_J up to the cancellation guard of error_sq (the optimizer
// itself is a strict descent; the row-level inequality additionally compares
// against the baseline's own residues, which only holds to evaluation noise
// once J falls below ~1e-12·‖h‖²).
struct SweepRow {
    int r = 0;
    std::string method;
    std::string status = "ok";  // or "init_failed: ..." / "fhirka_failed: ..."
    double init_J = 0.0;        // squared H2(tf) error of the initialization
    double final_J = 0.0;
    int iterations = 0;
    bool converged = false;
    double max_residual = 0.0;  // max normalized optimality residual
};

struct ErrorTable {
    std::vector<SweepRow> rows;
};

struct ImpulseTrace {
    Eigen::VectorXd t;
    Eigen::VectorXd h;
    Eigen::VectorXd h_r;
    Eigen::VectorXd abs_err;
};

// Loads A, B, C from a JSON manifest:
//   {"name": ..., "files": {"A": ..., "B": ..., "C": ...},
//    "channels": {"input": 1, "output": 1}}
// File paths are resolved relative to the manifest; channels are optional and
// default to the first input/output.
ModelBundle load_model(const std::string& manifest_path);

// Loads A, B, C directly from three Matrix Market files.
ModelBundle load_model(const std::string& path_A, const std::string& path_B,
                       const std::string& path_C);

// Writes A.mtx/B.mtx/C.mtx plus manifest.json into a directory; returns the
// manifest path.
std::string write_model_bundle(const ModelBundle& bundle, const std::string& directory);

// Block-diagonal random model with n_stable poles whose real parts are
// log-uniform in [-100, -0.1] (a random mix of reals and conjugate pairs) and
// n_unstable real poles in [0.1, 1]; B, C have unit-variance Gaussian entries.
// Bit-identical output for identical seeds.
ModelBundle generate_unstable_toy(int n_stable = 400, int n_unstable = 2,
                                  std::uint64_t seed = 0);

// 1-D diffusion finite-difference model: A = (n+1)²·tridiag(1, -2, 1),
// B = e_1, C = e_nᵀ.
ModelBundle generate_heat_like(int n);

// The §-style experimental protocol: for every (r, init) pair run the
// baseline, record its error, run the descent optimizer from it, record the
// row. Failures become row statuses; the sweep itself always completes.
ErrorTable run_sweep(const ModelBundle& bundle, const SweepSpec& spec);

// Pointwise impulse responses and |h - h_r| on a uniform grid over [0, tf],
// both responses propagated by exact matrix exponentials of step dt.
ImpulseTrace impulse_error_trace(const ModelBundle& bundle, const StateSpaceModel& reduced,
                                 Horizon horizon, double dt);

// RFC-4180 CSV with a header row and 17-significant-digit doubles.
void emit_csv(const ErrorTable& table, const std::string& path);
void emit_csv(const ImpulseTrace& trace, const std::string& path);

std::string to_string(InitSource source);
InitSource init_source_from_string(const std::string& name);

}  // namespace fhmor
