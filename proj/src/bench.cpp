#include "fhmor/bench.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <json.hpp>

#include "fhmor/baselines.hpp"
#include "fhmor/linalg.hpp"
#include "fhmor/matrix_market.hpp"
#include "fhmor/metrics.hpp"
#include "fhmor/system.hpp"

namespace fhmor {

namespace fs = std::filesystem;
using nlohmann::json;

StateSpaceModel ModelBundle::siso() const {
    if (input_channel < 0 || input_channel >= model.inputs() || output_channel < 0 ||
        output_channel >= model.outputs())
        throw DimensionMismatch("ModelBundle: channel indices out of range");
    return StateSpaceModel(model.A, model.B.col(input_channel),
                           model.C.row(output_channel));
}

std::string to_string(InitSource source) {
    switch (source) {
        case InitSource::Auto: return "auto";
        case InitSource::Pod: return "pod";
        case InitSource::Tlbt: return "tlbt";
        case InitSource::Random: return "random";
        case InitSource::File: return "file";
    }
    return "unknown";
}

InitSource init_source_from_string(const std::string& name) {
    if (name == "auto") return InitSource::Auto;
    if (name == "pod") return InitSource::Pod;
    if (name == "tlbt") return InitSource::Tlbt;
    if (name == "random") return InitSource::Random;
    if (name == "file") return InitSource::File;
    throw InvalidArgument("unknown init source '" + name + "'");
}

ModelBundle load_model(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("load_model: cannot open " + manifest_path);
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(manifest_path + ": " + e.what());
    }
    if (!manifest.contains("files"))
        throw ParseError(manifest_path + ": manifest needs a 'files' object");
    const json& files = manifest["files"];
    for (const char* key : {"A", "B", "C"})
        if (!files.contains(key))
            throw ParseError(manifest_path + ": manifest 'files' needs entry '" +
                             std::string(key) + "'");

    const fs::path base = fs::path(manifest_path).parent_path();
    auto resolve = [&](const std::string& p) {
        const fs::path path(p);
        return path.is_absolute() ? path.string() : (base / path).string();
    };

    ModelBundle bundle;
    bundle.model = StateSpaceModel(read_matrix_market(resolve(files["A"].get<std::string>())),
                                   read_matrix_market(resolve(files["B"].get<std::string>())),
                                   read_matrix_market(resolve(files["C"].get<std::string>())));
    bundle.name = manifest.value("name", fs::path(manifest_path).stem().string());
    bundle.provenance = manifest_path;
    if (manifest.contains("channels")) {
        const json& ch = manifest["channels"];
        bundle.input_channel = ch.value("input", 1) - 1;
        bundle.output_channel = ch.value("output", 1) - 1;
        if (bundle.input_channel < 0 || bundle.input_channel >= bundle.model.inputs() ||
            bundle.output_channel < 0 || bundle.output_channel >= bundle.model.outputs())
            throw ParseError(manifest_path + ": channel selection out of range");
    }
    return bundle;
}

ModelBundle load_model(const std::string& path_A, const std::string& path_B,
                       const std::string& path_C) {
    ModelBundle bundle;
    bundle.model = StateSpaceModel(read_matrix_market(path_A), read_matrix_market(path_B),
                                   read_matrix_market(path_C));
    bundle.name = fs::path(path_A).stem().string();
    bundle.provenance = path_A + "," + path_B + "," + path_C;
    return bundle;
}

std::string write_model_bundle(const ModelBundle& bundle, const std::string& directory) {
    fs::create_directories(directory);
    const fs::path dir(directory);
    write_matrix_market(bundle.model.A, (dir / "A.mtx").string());
    write_matrix_market(bundle.model.B, (dir / "B.mtx").string());
    write_matrix_market(bundle.model.C, (dir / "C.mtx").string());

    json manifest;
    manifest["name"] = bundle.name;
    manifest["provenance"] = bundle.provenance;
    manifest["files"] = {{"A", "A.mtx"}, {"B", "B.mtx"}, {"C", "C.mtx"}};
    manifest["channels"] = {{"input", bundle.input_channel + 1},
                            {"output", bundle.output_channel + 1}};
    const std::string manifest_path = (dir / "manifest.json").string();
    std::ofstream out(manifest_path);
    if (!out) throw IoError("write_model_bundle: cannot write " + manifest_path);
    out << manifest.dump(2) << "\n";
    return manifest_path;
}

ModelBundle generate_unstable_toy(int n_stable, int n_unstable, std::uint64_t seed) {
    if (n_stable < 0 || n_unstable < 0 || n_stable + n_unstable < 1)
        throw InvalidArgument("generate_unstable_toy: need at least one pole");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int n = n_stable + n_unstable;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);

    int pos = 0;
    int remaining = n_stable;
    while (remaining > 0) {
        const bool make_pair = remaining >= 2 && unit(rng) < 0.5;
        const double re = -std::pow(10.0, -1.0 + 3.0 * unit(rng));  // log-uniform [-100, -0.1]
        if (make_pair) {
            const double im = std::pow(10.0, -1.0 + 3.0 * unit(rng));
            A(pos, pos) = re;
            A(pos, pos + 1) = im;
            A(pos + 1, pos) = -im;
            A(pos + 1, pos + 1) = re;
            pos += 2;
            remaining -= 2;
        } else {
            A(pos, pos) = re;
            pos += 1;
            remaining -= 1;
        }
    }
    for (int k = 0; k < n_unstable; ++k, ++pos) A(pos, pos) = 0.1 + 0.9 * unit(rng);

    Eigen::MatrixXd B(n, 1), C(1, n);
    for (int i = 0; i < n; ++i) B(i, 0) = gauss(rng);
    for (int i = 0; i < n; ++i) C(0, i) = gauss(rng);

    ModelBundle bundle;
    bundle.model = StateSpaceModel(std::move(A), std::move(B), std::move(C));
    bundle.name = "unstable_toy_" + std::to_string(n);
    bundle.provenance = "generate_unstable_toy(" + std::to_string(n_stable) + ", " +
                        std::to_string(n_unstable) + ", seed=" + std::to_string(seed) + ")";
    return bundle;
}

ModelBundle generate_heat_like(int n) {
    if (n < 1) throw InvalidArgument("generate_heat_like: n must be positive");
    const double scale = static_cast<double>(n + 1) * (n + 1);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        A(i, i) = -2.0 * scale;
        if (i + 1 < n) {
            A(i, i + 1) = scale;
            A(i + 1, i) = scale;
        }
    }
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, 1);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(1, n);
    B(0, 0) = 1.0;
    C(0, n - 1) = 1.0;

    ModelBundle bundle;
    bundle.model = StateSpaceModel(std::move(A), std::move(B), std::move(C));
    bundle.name = "heat_like_" + std::to_string(n);
    bundle.provenance = "generate_heat_like(" + std::to_string(n) + ")";
    return bundle;
}

namespace {

struct SweepTask {
    int r;
    InitSource init;
    int method_index;
};

SweepRow run_sweep_row(const PoleResidueModel& full_pr, const StateSpaceModel& full_siso,
                       const SweepTask& task, const SweepSpec& spec) {
    SweepRow row;
    row.r = task.r;
    row.method = to_string(task.init);

    OptimizerConfig cfg = spec.optimizer;
    cfg.init = task.init;
    cfg.seed = spec.optimizer.seed + 1009ULL * static_cast<std::uint64_t>(task.r) +
               static_cast<std::uint64_t>(task.method_index);

    Eigen::VectorXcd init_poles;
    bool have_baseline_error = false;
    try {
        switch (task.init) {
            case InitSource::Pod: {
                const PodResult pod = pod_reduce(full_siso, spec.horizon, task.r,
                                                 cfg.pod_snapshots);
                const PoleResidueModel pod_pr = modal_decompose_jittered(pod.model, cfg.seed);
                row.init_J = error_sq(full_pr, pod_pr, spec.horizon);
                init_poles = pod_pr.poles;
                have_baseline_error = true;
                break;
            }
            case InitSource::Tlbt: {
                const TlbtResult tlbt = tlbt_reduce(full_siso, spec.horizon, task.r);
                const PoleResidueModel tlbt_pr = modal_decompose_jittered(tlbt.model, cfg.seed);
                row.init_J = error_sq(full_pr, tlbt_pr, spec.horizon);
                init_poles = tlbt_pr.poles;
                have_baseline_error = true;
                break;
            }
            case InitSource::Random:
                init_poles = random_initial_poles(task.r, cfg.seed);
                break;
            default:
                init_poles = initial_poles(full_siso, task.r, spec.horizon, cfg);
                break;
        }
    } catch (const Error& e) {
        row.status = std::string("init_failed: ") + e.what();
        return row;
    }

    try {
        const ReductionResult run = fhirka_run(full_pr, init_poles, spec.horizon, cfg);
        if (!have_baseline_error) row.init_J = run.init_J;
        row.final_J = run.final_J;
        row.iterations = run.iterations;
        row.converged = run.converged;
        row.max_residual =
            std::max(run.residuals.max_value_rel(), run.residuals.max_hermite_rel());
    } catch (const Error& e) {
        row.status = std::string("fhirka_failed: ") + e.what();
    }
    return row;
}

}  // namespace

ErrorTable run_sweep(const ModelBundle& bundle, const SweepSpec& spec) {
    if (spec.orders.empty()) throw InvalidArgument("run_sweep: no orders given");
    for (const int r : spec.orders)
        if (r < 1 || r >= bundle.model.order())
            throw InvalidArgument("run_sweep: order " + std::to_string(r) + " out of range");

    const StateSpaceModel full_siso = bundle.siso();
    const PoleResidueModel full_pr = modal_decompose(full_siso);

    std::vector<SweepTask> tasks;
    for (const int r : spec.orders) {
        int method_index = 0;
        for (const InitSource init : spec.inits) tasks.push_back({r, init, method_index++});
    }

    ErrorTable table;
    table.rows.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();)
            table.rows[i] = run_sweep_row(full_pr, full_siso, tasks[i], spec);
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads =
        std::min<std::size_t>(spec.threads > 0 ? static_cast<std::size_t>(spec.threads) : hw,
                              tasks.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return table;
}

ImpulseTrace impulse_error_trace(const ModelBundle& bundle, const StateSpaceModel& reduced,
                                 Horizon horizon, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InvalidArgument("impulse_error_trace: dt must be positive");
    if (reduced.inputs() != 1 || reduced.outputs() != 1)
        throw DimensionMismatch("impulse_error_trace: reduced model must be SISO");

    const StateSpaceModel full = bundle.siso();
    const Eigen::Index steps = static_cast<Eigen::Index>(std::floor(horizon.tf / dt + 1e-9)) + 1;

    ImpulseTrace trace;
    trace.t.resize(steps);
    trace.h.resize(steps);
    trace.h_r.resize(steps);
    trace.abs_err.resize(steps);

    const Eigen::MatrixXd E_full = expm(full.A * dt);
    const Eigen::MatrixXd E_red = expm(reduced.A * dt);
    Eigen::VectorXd x_full = full.B.col(0);
    Eigen::VectorXd x_red = reduced.B.col(0);
    for (Eigen::Index k = 0; k < steps; ++k) {
        trace.t(k) = k * dt;
        trace.h(k) = (full.C * x_full)(0, 0);
        trace.h_r(k) = (reduced.C * x_red)(0, 0);
        trace.abs_err(k) = std::abs(trace.h(k) - trace.h_r(k));
        x_full = E_full * x_full;
        x_red = E_red * x_red;
    }
    return trace;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (const char c : field) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += "\"";
    return quoted;
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: deterministic bytes
    if (!out) throw IoError("emit_csv: cannot write " + path);
    return out;
}

}  // namespace

void emit_csv(const ErrorTable& table, const std::string& path) {
    std::ofstream out = open_csv(path);
    out << "r,method,status,init_h2tf_error,final_h2tf_error,iterations,converged,"
           "max_normalized_residual\n";
    for (const SweepRow& row : table.rows) {
        const bool ok = row.status == "ok";
        out << row.r << ',' << csv_escape(row.method) << ',' << csv_escape(row.status) << ',';
        if (ok)
            out << format_double(std::sqrt(row.init_J)) << ','
                << format_double(std::sqrt(row.final_J)) << ',' << row.iterations << ','
                << (row.converged ? "true" : "false") << ',' << format_double(row.max_residual);
        else
            out << ",,,,";
        out << '\n';
    }
    if (!out) throw IoError("emit_csv: write failed for " + path);
}

void emit_csv(const ImpulseTrace& trace, const std::string& path) {
    std::ofstream out = open_csv(path);
    out << "t,h,h_r,abs_err\n";
    for (Eigen::Index k = 0; k < trace.t.size(); ++k)
        out << format_double(trace.t(k)) << ',' << format_double(trace.h(k)) << ','
            << format_double(trace.h_r(k)) << ',' << format_double(trace.abs_err(k)) << '\n';
    if (!out) throw IoError("emit_csv: write failed for " + path);
}

}  // namespace fhmor
