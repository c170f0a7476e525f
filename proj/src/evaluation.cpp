#include "tvart/evaluation.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "tvart/error.hpp"

namespace tvart {

std::string WindowedEstimate::label() const {
    switch (method) {
    case EstimateMethod::IndependentFull: return "indep-full";
    case EstimateMethod::IndependentTruncated: return fmt::format("indep-r{}", rank);
    case EstimateMethod::Tvart: return fmt::format("tvart-r{}", rank);
    }
    return "unknown";
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_tol) {
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    if (s.size() > 0 && s(0) > 0.0)
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) > rel_tol * s(0))
                inv(i) = 1.0 / s(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

WindowedEstimate independent_fit(const SnapshotPair& data, std::optional<int> rank) {
    const Eigen::Index n = data.state_dim;
    WindowedEstimate est;
    if (rank && *rank < 1)
        throw Error(ErrorKind::InvalidArgument, "truncation rank must be at least 1");
    const bool truncate = rank && *rank < n;
    if (truncate && (data.affine || data.lags != 1))
        throw Error(ErrorKind::InvalidArgument,
                    "rank-truncated independent fits need a plain first-order model");
    est.method = truncate ? EstimateMethod::IndependentTruncated : EstimateMethod::IndependentFull;
    est.rank = truncate ? *rank : 0;

    for (Eigen::Index k = 0; k < data.windows(); ++k) {
        const auto& x = data.X[k];
        const auto& y = data.Y[k];
        if (x.cwiseAbs().maxCoeff() == 0.0)
            throw Error(ErrorKind::DegenerateWindow, fmt::format("window {} has all-zero predictors", k));
        if (!truncate) {
            est.matrices.push_back(y * pseudo_inverse(x));
            continue;
        }
        // The window's trajectory x(t0), ..., x(t0 + M).
        Eigen::MatrixXd series(n, x.cols() + 1);
        series << x, y.rightCols(1);
        const Eigen::BDCSVD<Eigen::MatrixXd> svd(series, Eigen::ComputeThinU);
        const Eigen::MatrixXd modes = svd.matrixU().leftCols(*rank);
        const Eigen::MatrixXd cx = modes.transpose() * x;
        const Eigen::MatrixXd cy = modes.transpose() * y;
        const Eigen::MatrixXd reduced = cy * pseudo_inverse(cx);
        est.matrices.push_back(modes * reduced * modes.transpose());
    }
    return est;
}

double estimate_rmse(const WindowedEstimate& estimate, const SnapshotPair& data) {
    if (static_cast<Eigen::Index>(estimate.matrices.size()) != data.windows())
        throw Error(ErrorKind::ShapeMismatch, fmt::format("{} matrices for {} windows",
                                                          estimate.matrices.size(), data.windows()));
    double total = 0.0;
    for (Eigen::Index k = 0; k < data.windows(); ++k)
        total += (data.Y[k] - estimate.matrices[static_cast<std::size_t>(k)] * data.X[k]).squaredNorm();
    return std::sqrt(total / static_cast<double>(data.state_dim * data.window * data.windows()));
}

WindowedEstimate tvart_estimate(const CpFactors& model) {
    WindowedEstimate est;
    est.method = EstimateMethod::Tvart;
    est.rank = static_cast<int>(model.rank());
    for (Eigen::Index k = 0; k < model.windows(); ++k)
        est.matrices.push_back(slice(model, k));
    return est;
}

double operator_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0)
        return 0.0;
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

double operator_norm_error(const std::vector<Eigen::MatrixXd>& estimate,
                           const std::vector<Eigen::MatrixXd>& truth) {
    if (estimate.size() != truth.size() || estimate.empty())
        throw Error(ErrorKind::ShapeMismatch,
                    fmt::format("{} estimated windows vs {} true windows", estimate.size(), truth.size()));
    double total = 0.0;
    for (std::size_t k = 0; k < estimate.size(); ++k) {
        if (estimate[k].rows() != truth[k].rows() || estimate[k].cols() != truth[k].cols())
            throw Error(ErrorKind::ShapeMismatch,
                        fmt::format("window {}: {}x{} estimate vs {}x{} truth", k, estimate[k].rows(),
                                    estimate[k].cols(), truth[k].rows(), truth[k].cols()));
        total += operator_norm(estimate[k] - truth[k]);
    }
    return total / static_cast<double>(estimate.size());
}

double operator_norm_error(const WindowedEstimate& estimate, const std::vector<Eigen::MatrixXd>& truth) {
    return operator_norm_error(estimate.matrices, truth);
}

namespace {

void check_layout(const GroundTruth& truth, const SnapshotPair& layout) {
    const auto last = layout.predictor_time(layout.windows() - 1, layout.window - 1);
    if (layout.windows() < 1 || last > truth.steps())
        throw Error(ErrorKind::ShapeMismatch,
                    fmt::format("snapshot layout needs {} transitions, truth has {}", last, truth.steps()));
}

} // namespace

std::vector<Eigen::MatrixXd> window_truth(const GroundTruth& truth, const SnapshotPair& layout) {
    check_layout(truth, layout);
    std::vector<Eigen::MatrixXd> out;
    out.reserve(static_cast<std::size_t>(layout.windows()));
    for (Eigen::Index k = 0; k < layout.windows(); ++k) {
        // Average over distinct (basis, angle) pairs weighted by multiplicity.
        std::map<std::pair<int, double>, int> counts;
        for (Eigen::Index j = 0; j < layout.window; ++j) {
            const auto step = layout.predictor_time(k, j) - 1;
            ++counts[{truth.step_basis[static_cast<std::size_t>(step)], truth.step_theta(step)}];
        }
        Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(truth.bases.front().rows(), truth.bases.front().rows());
        for (const auto& [key, count] : counts)
            avg += static_cast<double>(count) *
                   Rank2Rotation{truth.bases[static_cast<std::size_t>(key.first)], key.second}.dense();
        out.push_back(avg / static_cast<double>(layout.window));
    }
    return out;
}

std::vector<int> window_majority_system(const GroundTruth& truth, const SnapshotPair& layout) {
    check_layout(truth, layout);
    // Number distinct (basis, angle) systems in order of first appearance.
    std::map<std::pair<int, double>, int> ids;
    for (Eigen::Index s = 0; s < truth.steps(); ++s)
        ids.try_emplace({truth.step_basis[static_cast<std::size_t>(s)], truth.step_theta(s)},
                        static_cast<int>(ids.size()));

    std::vector<int> out;
    for (Eigen::Index k = 0; k < layout.windows(); ++k) {
        std::map<int, int> votes;
        for (Eigen::Index j = 0; j < layout.window; ++j) {
            const auto step = layout.predictor_time(k, j) - 1;
            ++votes[ids.at({truth.step_basis[static_cast<std::size_t>(step)], truth.step_theta(step)})];
        }
        int best = -1, best_votes = -1;
        for (const auto& [id, v] : votes)
            if (v > best_votes) {
                best = id;
                best_votes = v;
            }
        out.push_back(best);
    }
    return out;
}

std::vector<int> canonicalize_labels(const std::vector<int>& labels) {
    std::map<int, int> remap;
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) {
        auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
        out.push_back(it->second);
    }
    return out;
}

KMeansRun kmeans_once(const Eigen::MatrixXd& points, int k, RandomEngine& engine, int max_iters) {
    const Eigen::Index n = points.rows();
    if (k < 1 || k > n)
        throw Error(ErrorKind::InvalidArgument, fmt::format("need 1 <= k <= {}, got {}", n, k));

    KMeansRun run;
    run.centers.resize(k, points.cols());

    // k-means++ seeding.
    std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    auto pick = [&](int c, Eigen::Index row) {
        run.centers.row(c) = points.row(row);
        for (Eigen::Index i = 0; i < n; ++i)
            nearest[static_cast<std::size_t>(i)] = std::min(
                nearest[static_cast<std::size_t>(i)], (points.row(i) - run.centers.row(c)).squaredNorm());
    };
    std::uniform_int_distribution<Eigen::Index> uniform(0, n - 1);
    pick(0, uniform(engine));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double d : nearest)
            total += d;
        if (total > 0.0) {
            std::discrete_distribution<Eigen::Index> weighted(nearest.begin(), nearest.end());
            pick(c, weighted(engine));
        } else {
            pick(c, uniform(engine));
        }
    }

    run.labels.assign(static_cast<std::size_t>(n), -1);
    for (int it = 0; it < max_iters; ++it) {
        bool changed = false;
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (points.row(i) - run.centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            inertia += best_d;
            if (run.labels[static_cast<std::size_t>(i)] != best) {
                run.labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        run.objective_trace.push_back(inertia);
        run.inertia = inertia;
        if (!changed)
            break;

        // Update step; an empty cluster keeps its previous center.
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        std::vector<int> sizes(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int c = run.labels[static_cast<std::size_t>(i)];
            sums.row(c) += points.row(i);
            ++sizes[static_cast<std::size_t>(c)];
        }
        for (int c = 0; c < k; ++c)
            if (sizes[static_cast<std::size_t>(c)] > 0)
                run.centers.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
    }
    return run;
}

std::vector<int> cluster_temporal_modes(const Eigen::MatrixXd& U3, int k, std::uint64_t seed,
                                        int restarts) {
    if (k < 1 || k > U3.rows())
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("need 1 <= k <= {}, got {}", U3.rows(), k));
    auto engine = make_engine(seed, Stream::KMeans);
    KMeansRun best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(restarts, 1); ++r) {
        auto run = kmeans_once(U3, k, engine);
        if (run.inertia < best.inertia)
            best = std::move(run);
    }
    return canonicalize_labels(best.labels);
}

} // namespace tvart
