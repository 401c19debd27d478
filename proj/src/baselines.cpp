#include "fhmor/baselines.hpp"

#include <Eigen/SVD>

#include "fhmor/linalg.hpp"

namespace fhmor {

SnapshotSet pod_snapshots(const StateSpaceModel& model, Horizon horizon, int per_input) {
    if (per_input < 2) throw InvalidArgument("pod_snapshots: need at least 2 points per input");
    const Eigen::Index n = model.order();
    const Eigen::Index m = model.inputs();

    SnapshotSet set;
    set.times.resize(per_input);
    const double dt = horizon.tf / (per_input - 1);
    for (int k = 0; k < per_input; ++k) set.times(k) = k * dt;

    const Eigen::MatrixXd E = expm(model.A * dt);
    set.X.resize(n, per_input * m);
    set.input_column.reserve(static_cast<std::size_t>(per_input * m));
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::VectorXd x = model.B.col(j);
        for (int k = 0; k < per_input; ++k) {
            set.X.col(j * per_input + k) = x;
            set.input_column.push_back(static_cast<int>(j));
            x = E * x;
        }
    }
    return set;
}

PodResult pod_reduce(const StateSpaceModel& model, Horizon horizon, int r,
                     int snapshots_per_input) {
    if (r < 1 || r > model.order()) throw InvalidArgument("pod_reduce: need 1 <= r <= n");
    const SnapshotSet set = pod_snapshots(model, horizon, snapshots_per_input);
    if (set.X.cols() < r)
        throw RankDeficientSnapshots("pod_reduce: fewer snapshots than requested order");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(set.X, Eigen::ComputeThinU);
    const Eigen::VectorXd& sigma = svd.singularValues();
    if (sigma(r - 1) <= 1e-14 * sigma(0))
        throw RankDeficientSnapshots("pod_reduce: snapshot matrix has rank below r");

    const Eigen::MatrixXd V = svd.matrixU().leftCols(r);
    PodResult result;
    result.singular_values = sigma;
    result.model = StateSpaceModel(V.transpose() * model.A * V, V.transpose() * model.B,
                                   model.C * V);
    return result;
}

TlbtResult tlbt_reduce(const StateSpaceModel& model, Horizon horizon, int r) {
    const Eigen::Index n = model.order();
    if (r < 1 || r > n) throw InvalidArgument("tlbt_reduce: need 1 <= r <= n");

    TimeLimitedGramian P, Q;
    try {
        P = time_limited_gramian(model, horizon, GramianSide::Reachability);
        Q = time_limited_gramian(model, horizon, GramianSide::Observability);
    } catch (const Error& e) {
        throw GramianFailure(std::string("tlbt_reduce: ") + e.what());
    }

    const Eigen::MatrixXd Lp = psd_sqrt_factor(P.P);
    const Eigen::MatrixXd Lq = psd_sqrt_factor(Q.P);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(Lq.transpose() * Lp,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();

    if (sigma(r - 1) <= 1e-14 * std::max(sigma(0), 1e-300))
        throw GramianFailure("tlbt_reduce: balanced rank below requested order");
    if (r < n && sigma(r - 1) - sigma(r) <= 1e-12 * sigma(0)) {
        int suggestion = r;
        while (suggestion > 1 && sigma(suggestion - 1) - sigma(suggestion) <= 1e-12 * sigma(0))
            --suggestion;
        throw TieAtTruncation("tlbt_reduce: sigma_r == sigma_{r+1}, cannot truncate at a tie",
                              suggestion);
    }

    const Eigen::VectorXd scale = sigma.head(r).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd T = Lp * svd.matrixV().leftCols(r) * scale.asDiagonal();
    const Eigen::MatrixXd W = Lq * svd.matrixU().leftCols(r) * scale.asDiagonal();

    TlbtResult result;
    result.data.hankel_values = sigma;
    result.data.quadrature_fallback = P.quadrature_fallback || Q.quadrature_fallback;
    result.data.best_effort_unstable = model.A.eigenvalues().real().maxCoeff() >= 0.0;
    result.model = StateSpaceModel(W.transpose() * model.A * T, W.transpose() * model.B,
                                   model.C * T);
    return result;
}

}  // namespace fhmor
