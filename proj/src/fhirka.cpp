#include "fhmor/fhirka.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "fhmor/baselines.hpp"
#include "fhmor/metrics.hpp"
#include "fhmor/phi.hpp"
#include "fhmor/system.hpp"

namespace fhmor {

namespace {

double pole_scale(const Eigen::VectorXcd& poles) {
    return 1.0 + poles.cwiseAbs().maxCoeff();
}

// Partner index per pole (i for reals), or nullopt when the set is not
// conjugate-closed within tol.
std::optional<std::vector<Eigen::Index>> pole_pairing(const Eigen::VectorXcd& poles,
                                                      double tol = 1e-9) {
    const Eigen::Index r = poles.size();
    std::vector<Eigen::Index> partner(static_cast<std::size_t>(r), -1);
    std::vector<bool> used(static_cast<std::size_t>(r), false);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        const double scale = tol * (1.0 + std::abs(poles(i)));
        if (std::abs(poles(i).imag()) <= scale) {
            partner[static_cast<std::size_t>(i)] = i;
            used[static_cast<std::size_t>(i)] = true;
            continue;
        }
        Eigen::Index best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < r; ++j) {
            if (j == i || used[static_cast<std::size_t>(j)]) continue;
            const double d = std::abs(poles(j) - std::conj(poles(i)));
            if (d < best_dist) {
                best_dist = d;
                best = j;
            }
            if (d == 0.0) break;  // exact partner; avoids cross-matching close pairs
        }
        if (best < 0 || best_dist > scale) return std::nullopt;
        partner[static_cast<std::size_t>(i)] = best;
        partner[static_cast<std::size_t>(best)] = i;
        used[static_cast<std::size_t>(i)] = used[static_cast<std::size_t>(best)] = true;
    }
    return partner;
}

void require_distinct(const Eigen::VectorXcd& poles, double rel_tol, const char* what) {
    const double scale = pole_scale(poles);
    for (Eigen::Index i = 0; i < poles.size(); ++i)
        for (Eigen::Index j = i + 1; j < poles.size(); ++j)
            if (std::abs(poles(i) - poles(j)) <= rel_tol * scale)
                throw DegeneratePoles(std::string(what) + ": poles " + std::to_string(i) +
                                      " and " + std::to_string(j) + " nearly coincide");
}

Eigen::VectorXcd siso_full_residues(const PoleResidueModel& full) {
    if (!full.is_siso())
        throw DimensionMismatch("fhirka: the residue subproblem is SISO only");
    Eigen::VectorXcd psi(full.size());
    for (Eigen::Index k = 0; k < full.size(); ++k) psi(k) = full.residue(k);
    return psi;
}

// Fold roundoff off the conjugate-closed structure of a residue vector.
void symmetrize_residues(const Eigen::VectorXcd& poles, Eigen::VectorXcd& phi) {
    const auto pairing = pole_pairing(poles);
    if (!pairing) return;
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
        const Eigen::Index j = (*pairing)[static_cast<std::size_t>(i)];
        if (j == i) {
            phi(i) = Complex(phi(i).real(), 0.0);
        } else if (j > i) {
            phi(i) = 0.5 * (phi(i) + std::conj(phi(j)));
            phi(j) = std::conj(phi(i));
        }
    }
}

}  // namespace

Eigen::VectorXcd PoleParametrization::decode(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw DimensionMismatch("PoleParametrization::decode: wrong size");
    Eigen::VectorXcd poles(pole_count);
    int cursor = 0;
    for (const Eigen::Index pos : real_positions) poles(pos) = Complex(x(cursor++), 0.0);
    for (const auto& [rep, conj_pos] : pairs) {
        const double re = x(cursor++);
        const double im = x(cursor++);
        poles(rep) = Complex(re, im);
        poles(conj_pos) = Complex(re, -im);
    }
    return poles;
}

Eigen::VectorXd PoleParametrization::encode(const Eigen::VectorXcd& poles) const {
    if (poles.size() != pole_count)
        throw DimensionMismatch("PoleParametrization::encode: wrong pole count");
    Eigen::VectorXd x(dim());
    int cursor = 0;
    for (const Eigen::Index pos : real_positions) x(cursor++) = poles(pos).real();
    for (const auto& [rep, conj_pos] : pairs) {
        (void)conj_pos;
        x(cursor++) = poles(rep).real();
        x(cursor++) = poles(rep).imag();
    }
    return x;
}

Eigen::VectorXd PoleParametrization::fold_gradient(const Eigen::VectorXcd& d_pole) const {
    if (d_pole.size() != pole_count)
        throw DimensionMismatch("PoleParametrization::fold_gradient: wrong size");
    Eigen::VectorXd g(dim());
    int cursor = 0;
    for (const Eigen::Index pos : real_positions) g(cursor++) = d_pole(pos).real();
    for (const auto& [rep, conj_pos] : pairs) {
        // λ_rep = x + iy, λ_conj = x − iy: dJ/dx = d_rep + d_conj,
        // dJ/dy = i(d_rep − d_conj); both real for conjugate-consistent data.
        g(cursor++) = (d_pole(rep) + d_pole(conj_pos)).real();
        g(cursor++) = -(d_pole(rep) - d_pole(conj_pos)).imag();
    }
    return g;
}

PoleParametrization make_pole_parametrization(const Eigen::VectorXcd& poles) {
    const auto pairing = pole_pairing(poles);
    if (!pairing)
        throw ConjugateClosureViolation("make_pole_parametrization: poles are not closed");

    PoleParametrization param;
    param.pole_count = poles.size();
    std::vector<Eigen::Index> reps;
    for (Eigen::Index i = 0; i < poles.size(); ++i) {
        const Eigen::Index j = (*pairing)[static_cast<std::size_t>(i)];
        if (j == i)
            param.real_positions.push_back(i);
        else if (poles(i).imag() > 0.0)
            param.pairs.emplace_back(i, j);
    }
    std::sort(param.real_positions.begin(), param.real_positions.end(),
              [&](Eigen::Index a, Eigen::Index b) { return poles(a).real() < poles(b).real(); });
    std::sort(param.pairs.begin(), param.pairs.end(), [&](const auto& a, const auto& b) {
        const Complex za = poles(a.first), zb = poles(b.first);
        if (za.real() != zb.real()) return za.real() < zb.real();
        return za.imag() < zb.imag();
    });
    return param;
}

PoleResidueModel siso_model_from(const Eigen::VectorXcd& poles, const Eigen::VectorXcd& residues) {
    return PoleResidueModel::siso(poles, residues);
}

ResidueSystem build_residue_system(const PoleResidueModel& full, const Eigen::VectorXcd& poles,
                                   Horizon horizon) {
    const Eigen::VectorXcd psi = siso_full_residues(full);
    require_distinct(poles, 1e-12, "build_residue_system");
    if (!pole_pairing(poles))
        throw ConjugateClosureViolation("build_residue_system: poles are not conjugate-closed");

    const Eigen::Index r = poles.size();
    ResidueSystem sys;
    sys.gram.resize(r, r);
    sys.rhs.resize(r);

    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = i; j < r; ++j) {
            const Complex sum = poles(i) + poles(j);
            if (std::abs(sum) * horizon.tf < detail::kPhiSeriesSwitch)
                sys.near_zero_pole_pair = true;
            sys.gram(i, j) = phi1(sum, horizon.tf);
            sys.gram(j, i) = sys.gram(i, j);
        }
        Complex w(0.0, 0.0);
        double term_scale = 0.0;
        for (Eigen::Index k = 0; k < psi.size(); ++k) {
            const Complex term = psi(k) * phi1(full.poles(k) + poles(i), horizon.tf);
            w += term;
            term_scale += std::abs(term);
        }
        sys.rhs(i) = w;

        // Independent route through the truncated Laplace transform. The two
        // sums may cancel heavily (large alternating residues), so the check
        // is relative to the term scale, not just |w|.
        const Complex g = truncated_laplace(full, -poles(i), horizon)(0, 0);
        if (std::abs(g - w) > 1e-10 * std::abs(w) + 1e-13 * term_scale)
            throw Error("build_residue_system: rhs cross-check failed at pole " +
                        std::to_string(i));
    }
    return sys;
}

ResidueSolve optimal_residues(const PoleResidueModel& full, const Eigen::VectorXcd& poles,
                              Horizon horizon) {
    const ResidueSystem sys = build_residue_system(full, poles, horizon);

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sys.gram);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();

    ResidueSolve solve;
    solve.cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    solve.ill_conditioned = solve.cond > 1e12;

    // Exponential Gram matrices turn Cauchy-like and lose digits quickly as r
    // grows; an ill-conditioned solve is still reported and used (cond is in
    // the result), only an unsolvable one is an error.
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(sys.gram);
    solve.phi = lu.solve(sys.rhs);
    if (!solve.phi.allFinite())
        throw SingularResidueSystem("optimal_residues: gram matrix singular (poles too close)");
    symmetrize_residues(poles, solve.phi);
    return solve;
}

VpObjective objective_vp(const PoleResidueModel& full, const Eigen::VectorXcd& poles,
                         Horizon horizon) {
    return objective_vp_with_norm(full, poles, horizon, norm_sq(full, horizon));
}

VpObjective objective_vp_with_norm(const PoleResidueModel& full, const Eigen::VectorXcd& poles,
                                   Horizon horizon, double full_norm_sq) {
    ResidueSolve solve = optimal_residues(full, poles, horizon);
    VpObjective obj;
    obj.cond = solve.cond;
    obj.J = error_sq(full, PoleResidueModel::siso(poles, solve.phi), horizon, full_norm_sq);
    obj.phi = std::move(solve.phi);
    return obj;
}

Eigen::VectorXd pole_gradient_vp(const PoleResidueModel& full, const Eigen::VectorXcd& poles,
                                 Horizon horizon) {
    const PoleParametrization param = make_pole_parametrization(poles);
    const ResidueSolve solve = optimal_residues(full, poles, horizon);
    const PoleResidueModel reduced = PoleResidueModel::siso(poles, solve.phi);
    // Envelope theorem: ∇_φ J = 0 at the optimal residues, so the chain rule
    // reduces to the explicit pole derivative.
    const GradientBundle bundle = gradients(full, reduced, horizon);
    return param.fold_gradient(bundle.d_pole);
}

namespace {

struct VpEvaluator {
    const PoleResidueModel& full;
    Horizon horizon;
    double full_norm_sq;
    PoleParametrization param;

    VpObjective objective(const Eigen::VectorXd& x) const {
        return objective_vp_with_norm(full, param.decode(x), horizon, full_norm_sq);
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& x, const Eigen::VectorXcd& phi) const {
        const Eigen::VectorXcd poles = param.decode(x);
        const GradientBundle bundle =
            gradients(full, PoleResidueModel::siso(poles, phi), horizon);
        return param.fold_gradient(bundle.d_pole);
    }
};

// Objective evaluation for trial steps: failures (overflow, collapsing poles,
// singular or numerically garbage residue systems) count as +inf so the line
// search backs off.
std::optional<VpObjective> try_objective(const VpEvaluator& eval, const Eigen::VectorXd& x) {
    try {
        return eval.objective(x);
    } catch (const OverflowError&) {
    } catch (const DegeneratePoles&) {
    } catch (const SingularResidueSystem&) {
    } catch (const NegativeErrorSquare&) {
    } catch (const ConjugateClosureViolation&) {
    }
    return std::nullopt;
}

bool poles_collide(const Eigen::VectorXcd& poles) {
    const double tol = 1e-10 * pole_scale(poles);
    for (Eigen::Index i = 0; i < poles.size(); ++i)
        for (Eigen::Index j = i + 1; j < poles.size(); ++j)
            if (std::abs(poles(i) - poles(j)) < tol) return true;
    return false;
}

}  // namespace

ReductionResult fhirka_run(const PoleResidueModel& full, const Eigen::VectorXcd& init_poles,
                           Horizon horizon, const OptimizerConfig& config) {
    if (!full.is_siso()) throw DimensionMismatch("fhirka_run: full model must be SISO");
    if (init_poles.size() < 1 || init_poles.size() > full.size())
        throw InvalidArgument("fhirka_run: need 1 <= r <= n");

    VpEvaluator eval{full, horizon, norm_sq(full, horizon),
                     make_pole_parametrization(init_poles)};
    const int d = eval.param.dim();
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    Eigen::VectorXd x = eval.param.encode(init_poles);
    VpObjective current = eval.objective(x);  // init must evaluate cleanly
    Eigen::VectorXd g = eval.gradient(x, current.phi);

    ReductionResult result;
    result.init_J = current.J;
    result.J_trace.push_back(current.J);

    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(d, d);
    bool have_scaled = false;
    std::string termination = "max_iters";

    for (int iter = 0; iter < config.max_iters; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() <= config.grad_tol) {
            termination = "grad_tol";
            break;
        }

        Eigen::VectorXd dir = -(Hinv * g);
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {  // lost curvature; restart on steepest descent
            Hinv.setIdentity();
            have_scaled = false;
            dir = -g;
            slope = -g.squaredNorm();
        }

        double t = 1.0;
        std::optional<VpObjective> trial;
        Eigen::VectorXd x_new;
        bool accepted = false;
        while (t >= 1e-18) {
            x_new = x + t * dir;
            trial = try_objective(eval, x_new);
            if (trial && trial->J <= current.J + config.ls_slope * t * slope) {
                accepted = true;
                break;
            }
            t *= config.ls_shrink;
        }
        if (!accepted) {
            termination = "line_search";
            break;
        }

        if (poles_collide(eval.param.decode(x_new))) {
            // One jittered retry, still subject to the Armijo test.
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            Eigen::VectorXd x_jit = x_new;
            for (int i = 0; i < d; ++i) x_jit(i) += 1e-8 * (1.0 + std::abs(x_jit(i))) * u(rng);
            const auto retr = try_objective(eval, x_jit);
            if (retr && retr->J <= current.J + config.ls_slope * t * slope &&
                !poles_collide(eval.param.decode(x_jit))) {
                x_new = x_jit;
                trial = retr;
            } else {
                throw PoleCollision("fhirka_run: reduced poles merged during descent");
            }
        }

        const Eigen::VectorXd g_new = eval.gradient(x_new, trial->phi);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;

        x = x_new;
        current = *trial;
        g = g_new;
        result.J_trace.push_back(current.J);
        result.iterations = iter + 1;

        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!have_scaled) {
                Hinv = (sy / y.squaredNorm()) * Eigen::MatrixXd::Identity(d, d);
                have_scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd HyT = Hinv * y * s.transpose();
            Hinv = Hinv - rho * (HyT + HyT.transpose()) +
                   rho * (rho * y.dot(Hinv * y) + 1.0) * (s * s.transpose());
        }

        if (s.lpNorm<Eigen::Infinity>() <=
            config.step_tol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
            termination = "step_tol";
            break;
        }
    }

    const Eigen::VectorXcd poles = eval.param.decode(x);
    result.reduced = PoleResidueModel::siso(poles, current.phi);
    result.realization = realize_siso(result.reduced);
    result.residuals = optimality_residuals(full, result.reduced, horizon);
    result.final_J = current.J;
    result.cond_M = current.cond;
    result.termination = termination;
    result.converged = (termination == "grad_tol" || termination == "step_tol") &&
                       result.residuals.stationary();
    return result;
}

Eigen::VectorXcd random_initial_poles(int r, std::uint64_t seed) {
    if (r < 1) throw InvalidArgument("random_initial_poles: r must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int n_pairs = r / 2;
    const int n_real = r - 2 * n_pairs;
    const int slots = n_real + n_pairs;

    // Log-spaced magnitudes of the real parts over [0.1, 10].
    Eigen::VectorXd mag(slots);
    if (slots == 1) {
        mag(0) = 1.0;
    } else {
        for (int i = 0; i < slots; ++i)
            mag(i) = std::pow(10.0, -1.0 + 2.0 * i / (slots - 1.0));
    }

    Eigen::VectorXcd poles(r);
    int cursor = 0;
    for (int i = 0; i < n_real; ++i) poles(cursor++) = Complex(-mag(i), 0.0);
    for (int i = 0; i < n_pairs; ++i) {
        const double im = std::pow(10.0, -1.0 + 2.0 * unit(rng));  // log-uniform [0.1, 10]
        const double re = -mag(n_real + i);
        poles(cursor++) = Complex(re, im);
        poles(cursor++) = Complex(re, -im);
    }
    return poles;
}

namespace {

Eigen::VectorXcd poles_from_file(const std::string& path, int r) {
    std::ifstream in(path);
    if (!in) throw IoError("initial_poles: cannot open " + path);
    std::vector<Complex> listed;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double re, im = 0.0;
        if (!(ls >> re)) continue;
        ls >> im;
        listed.emplace_back(re, im);
    }
    // Complete missing conjugates so users may list only the +Im member.
    std::vector<Complex> poles = listed;
    for (const Complex& z : listed) {
        if (z.imag() == 0.0) continue;
        const bool has_conj = std::any_of(poles.begin(), poles.end(), [&](const Complex& w) {
            return std::abs(w - std::conj(z)) <= 1e-12 * (1.0 + std::abs(z));
        });
        if (!has_conj) poles.push_back(std::conj(z));
    }
    if (static_cast<int>(poles.size()) != r)
        throw InvalidArgument("initial_poles: file " + path + " yields " +
                              std::to_string(poles.size()) + " poles, expected " +
                              std::to_string(r));
    return Eigen::Map<Eigen::VectorXcd>(poles.data(), static_cast<Eigen::Index>(poles.size()));
}

}  // namespace

Eigen::VectorXcd initial_poles(const StateSpaceModel& full, int r, Horizon horizon,
                               const OptimizerConfig& config) {
    if (r < 1 || r > full.order())
        throw InvalidArgument("initial_poles: need 1 <= r <= n");

    auto from_pod = [&] {
        return modal_decompose_jittered(pod_reduce(full, horizon, r, config.pod_snapshots).model,
                                        config.seed)
            .poles;
    };
    auto from_tlbt = [&] {
        return modal_decompose_jittered(tlbt_reduce(full, horizon, r).model, config.seed).poles;
    };

    switch (config.init) {
        case InitSource::Pod:
            return from_pod();
        case InitSource::Tlbt:
            return from_tlbt();
        case InitSource::Random:
            return random_initial_poles(r, config.seed);
        case InitSource::File:
            return poles_from_file(config.init_file, r);
        case InitSource::Auto:
            break;
    }

    const bool stable = full.A.eigenvalues().real().maxCoeff() < 0.0;
    try {
        return stable ? from_tlbt() : from_pod();
    } catch (const Error&) {
    }
    try {
        return stable ? from_pod() : from_tlbt();
    } catch (const Error&) {
    }
    return random_initial_poles(r, config.seed);
}

ReductionResult fhirka_run(const StateSpaceModel& full, int r, Horizon horizon,
                           const OptimizerConfig& config) {
    if (full.inputs() != 1 || full.outputs() != 1)
        throw DimensionMismatch("fhirka_run: full model must be SISO");
    const PoleResidueModel full_pr = modal_decompose(full);
    return fhirka_run(full_pr, initial_poles(full, r, horizon, config), horizon, config);
}

}  // namespace fhmor
