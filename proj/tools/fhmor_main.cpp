// Command-line harness: model generation, single reductions, order sweeps,
// impulse-error traces, and optimality-condition checks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fhmor/baselines.hpp"
#include "fhmor/bench.hpp"
#include "fhmor/conditions.hpp"
#include "fhmor/fhirka.hpp"
#include "fhmor/metrics.hpp"
#include "fhmor/system.hpp"

namespace {

using namespace fhmor;

std::vector<int> parse_orders(const std::string& text) {
    // MATLAB-style a:b:c (start:step:stop) or a single value.
    std::vector<int> orders;
    int a = 0, b = 0, c = 0;
    if (std::sscanf(text.c_str(), "%d:%d:%d", &a, &b, &c) == 3) {
        if (b <= 0) throw InvalidArgument("--orders: step must be positive");
        for (int r = a; r <= c; r += b) orders.push_back(r);
    } else if (std::sscanf(text.c_str(), "%d", &a) == 1) {
        orders.push_back(a);
    }
    if (orders.empty()) throw InvalidArgument("--orders: cannot parse '" + text + "'");
    return orders;
}

std::vector<InitSource> parse_inits(const std::string& text) {
    std::vector<InitSource> inits;
    std::string token;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            if (!token.empty()) inits.push_back(init_source_from_string(token));
            token.clear();
        } else {
            token += text[i];
        }
    }
    if (inits.empty()) throw InvalidArgument("--init: no methods given");
    return inits;
}

void write_trace_csv(const std::vector<double>& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "iteration,J\n";
    char buf[64];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", trace[i]);
        out << i << ',' << buf << '\n';
    }
}

int cmd_generate(const std::string& out_dir, int heat_n, const std::string& toy_spec,
                 std::uint64_t seed) {
    ModelBundle bundle;
    if (heat_n > 0) {
        bundle = generate_heat_like(heat_n);
    } else if (!toy_spec.empty()) {
        int ns = 0, nu = 0;
        if (std::sscanf(toy_spec.c_str(), "%d,%d", &ns, &nu) != 2)
            throw InvalidArgument("--toy: expected 'n_stable,n_unstable'");
        bundle = generate_unstable_toy(ns, nu, seed);
    } else {
        throw InvalidArgument("generate: pass --heat N or --toy NS,NU");
    }
    const std::string manifest = write_model_bundle(bundle, out_dir);
    std::cout << "wrote " << bundle.name << " (n=" << bundle.model.order() << ") to " << manifest
              << "\n";
    return 0;
}

int cmd_reduce(const std::string& model_path, int r, double tf, const std::string& init_name,
               const std::string& init_file, std::uint64_t seed, int max_iters, double grad_tol,
               const std::string& out_dir) {
    const ModelBundle bundle = load_model(model_path);
    const Horizon horizon(tf);

    OptimizerConfig cfg;
    cfg.init = init_source_from_string(init_name);
    cfg.init_file = init_file;
    cfg.seed = seed;
    cfg.max_iters = max_iters;
    cfg.grad_tol = grad_tol;

    const ReductionResult result = fhirka_run(bundle.siso(), r, horizon, cfg);

    std::printf("r=%d init=%s J: %.6e -> %.6e (H2(tf) error %.6e) in %d iterations\n", r,
                init_name.c_str(), result.init_J, result.final_J, std::sqrt(result.final_J),
                result.iterations);
    std::printf("converged=%s termination=%s max value residual %.3e, hermite %.3e\n",
                result.converged ? "true" : "false", result.termination.c_str(),
                result.residuals.max_value_rel(), result.residuals.max_hermite_rel());

    if (!out_dir.empty()) {
        ModelBundle reduced;
        reduced.model = result.realization;
        reduced.name = bundle.name + "_r" + std::to_string(r);
        reduced.provenance = "fhirka(" + bundle.name + ", r=" + std::to_string(r) + ")";
        const std::string manifest = write_model_bundle(reduced, out_dir);
        write_trace_csv(result.J_trace,
                        (std::filesystem::path(out_dir) / "trace.csv").string());
        std::cout << "reduced model written to " << manifest << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& model_path, const std::string& orders, double tf,
              const std::string& init_names, std::uint64_t seed, int max_iters, double grad_tol,
              const std::string& out_csv, bool strict, int threads) {
    const ModelBundle bundle = load_model(model_path);

    SweepSpec spec;
    spec.orders = parse_orders(orders);
    spec.horizon = Horizon(tf);
    spec.inits = parse_inits(init_names);
    spec.optimizer.seed = seed;
    spec.optimizer.max_iters = max_iters;
    spec.optimizer.grad_tol = grad_tol;
    spec.threads = threads;

    const ErrorTable table = run_sweep(bundle, spec);
    emit_csv(table, out_csv);

    int failures = 0;
    for (const SweepRow& row : table.rows) {
        if (row.status == "ok") {
            std::printf("r=%-3d %-7s error %.6e -> %.6e  iters=%-4d %s\n", row.r,
                        row.method.c_str(), std::sqrt(row.init_J), std::sqrt(row.final_J),
                        row.iterations, row.converged ? "converged" : "not converged");
        } else {
            ++failures;
            std::printf("r=%-3d %-7s %s\n", row.r, row.method.c_str(), row.status.c_str());
        }
    }
    std::cout << "table written to " << out_csv << "\n";
    return (strict && failures > 0) ? 1 : 0;
}

int cmd_impulse(const std::string& model_path, const std::string& reduced_path, double tf,
                double dt, const std::string& out_csv) {
    const ModelBundle bundle = load_model(model_path);
    const ModelBundle reduced = load_model(reduced_path);
    const ImpulseTrace trace =
        impulse_error_trace(bundle, reduced.siso(), Horizon(tf), dt);
    emit_csv(trace, out_csv);
    std::cout << trace.t.size() << " samples written to " << out_csv << "\n";
    return 0;
}

int cmd_check(const std::string& model_path, const std::string& reduced_path, double tf) {
    const ModelBundle bundle = load_model(model_path);
    const ModelBundle reduced_bundle = load_model(reduced_path);
    const Horizon horizon(tf);

    // Compare against the full MIMO model when dimensions line up, otherwise
    // against the selected SISO channel.
    const StateSpaceModel& reduced_ss = reduced_bundle.model;
    const bool mimo_match = reduced_ss.inputs() == bundle.model.inputs() &&
                            reduced_ss.outputs() == bundle.model.outputs();
    const StateSpaceModel full_ss = mimo_match ? bundle.model : bundle.siso();
    if (reduced_ss.inputs() != full_ss.inputs() || reduced_ss.outputs() != full_ss.outputs())
        throw DimensionMismatch("check: model/reduced input-output dimensions do not match");

    const PoleResidueModel full = modal_decompose(full_ss);
    const PoleResidueModel reduced = modal_decompose(reduced_ss);
    const OptimalityResiduals res = optimality_residuals(full, reduced, horizon);

    std::printf("%-4s %-26s %-12s %-12s %-12s\n", "k", "pole", "left_rel", "right_rel",
                "hermite_rel");
    for (Eigen::Index k = 0; k < reduced.size(); ++k)
        std::printf("%-4ld %12.6g %+12.6gi %-12.4e %-12.4e %-12.4e\n", static_cast<long>(k),
                    reduced.poles(k).real(), reduced.poles(k).imag(), res.left_rel(k),
                    res.right_rel(k), res.hermite_rel(k));
    std::printf("max value residual %.4e, hermite residual %.4e, J = %.6e\n",
                res.max_value_rel(), res.max_hermite_rel(),
                error_sq(full, reduced, horizon));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-horizon H2 model order reduction toolkit"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "generate a benchmark model");
    int heat_n = 0;
    std::string toy_spec, gen_out = "model";
    std::uint64_t gen_seed = 0;
    generate->add_option("--heat", heat_n, "1-D diffusion model of order N");
    generate->add_option("--toy", toy_spec, "unstable toy model: n_stable,n_unstable");
    generate->add_option("--seed", gen_seed, "generator seed");
    generate->add_option("--out", gen_out, "output directory")->required();

    // shared reduction options
    std::string model_path, init_name = "auto", init_file, out_path;
    double tf = 1.0, grad_tol = 1e-8;
    std::uint64_t seed = 0;
    int max_iters = 200;

    auto* reduce = app.add_subcommand("reduce", "reduce one model at one order");
    int order = 0;
    reduce->add_option("--model", model_path, "model manifest")->required();
    reduce->add_option("-r,--order", order, "reduced order")->required();
    reduce->add_option("--tf", tf, "time horizon");
    reduce->add_option("--init", init_name, "pod|tlbt|random|file|auto");
    reduce->add_option("--init-file", init_file, "pole list for --init file");
    reduce->add_option("--seed", seed, "seed");
    reduce->add_option("--max-iters", max_iters, "optimizer iteration cap");
    reduce->add_option("--grad-tol", grad_tol, "gradient tolerance");
    reduce->add_option("--out", out_path, "directory for the reduced model");

    auto* sweep = app.add_subcommand("sweep", "order sweep with baseline comparisons");
    std::string orders, init_names = "pod,tlbt,random", sweep_csv = "sweep.csv";
    bool strict = false;
    int threads = 0;
    sweep->add_option("--model", model_path, "model manifest")->required();
    sweep->add_option("--orders", orders, "orders a:b:c (start:step:stop)")->required();
    sweep->add_option("--tf", tf, "time horizon");
    sweep->add_option("--init", init_names, "comma-separated init methods");
    sweep->add_option("--seed", seed, "seed");
    sweep->add_option("--max-iters", max_iters, "optimizer iteration cap");
    sweep->add_option("--grad-tol", grad_tol, "gradient tolerance");
    sweep->add_option("--out", sweep_csv, "output CSV");
    sweep->add_option("--threads", threads, "worker threads (0 = auto)");
    sweep->add_flag("--strict", strict, "exit 1 if any row fails");

    auto* impulse = app.add_subcommand("impulse", "impulse-error trace CSV");
    std::string reduced_path;
    double dt = 5e-4;
    impulse->add_option("--model", model_path, "model manifest")->required();
    impulse->add_option("--reduced", reduced_path, "reduced model manifest")->required();
    impulse->add_option("--tf", tf, "time horizon");
    impulse->add_option("--dt", dt, "sample step");
    impulse->add_option("--out", out_path, "output CSV")->required();

    auto* check = app.add_subcommand("check", "optimality residuals of a model pair");
    check->add_option("--model", model_path, "model manifest")->required();
    check->add_option("--reduced", reduced_path, "reduced model manifest")->required();
    check->add_option("--tf", tf, "time horizon");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(gen_out, heat_n, toy_spec, gen_seed);
        if (reduce->parsed())
            return cmd_reduce(model_path, order, tf, init_name, init_file, seed, max_iters,
                              grad_tol, out_path);
        if (sweep->parsed())
            return cmd_sweep(model_path, orders, tf, init_names, seed, max_iters, grad_tol,
                             sweep_csv, strict, threads);
        if (impulse->parsed()) return cmd_impulse(model_path, reduced_path, tf, dt, out_path);
        if (check->parsed()) return cmd_check(model_path, reduced_path, tf);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
