#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tvart/cp_model.hpp"
#include "tvart/random.hpp"
#include "tvart/synthetic.hpp"
#include "tvart/windowing.hpp"

namespace tvart {

enum class EstimateMethod { IndependentFull, IndependentTruncated, Tvart };

/// One system matrix per window, tagged with how it was obtained.
struct WindowedEstimate {
    std::vector<Eigen::MatrixXd> matrices; // T matrices of N x N_in
    EstimateMethod method = EstimateMethod::IndependentFull;
    int rank = 0; // 0 for IndependentFull

    /// "indep-full", "indep-r4", "tvart-r4", ...
    std::string label() const;
};

/// Moore-Penrose pseudoinverse via SVD; singular values below
/// rel_tol * s_max are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_tol = 1e-12);

/// Per-window least squares A_k = Y_k X_k^+, or with `rank` set, a fit in the
/// span of the leading `rank` spatial modes of the window's own trajectory.
WindowedEstimate independent_fit(const SnapshotPair& data, std::optional<int> rank = std::nullopt);

/// One-step prediction RMSE of per-window matrices on `data`.
double estimate_rmse(const WindowedEstimate& estimate, const SnapshotPair& data);

/// Per-window slices of a fitted CP model.
WindowedEstimate tvart_estimate(const CpFactors& model);

/// Largest singular value.
double operator_norm(const Eigen::MatrixXd& m);

/// Mean over windows of ||estimate_k - truth_k||_2. Throws ShapeMismatch.
double operator_norm_error(const std::vector<Eigen::MatrixXd>& estimate,
                           const std::vector<Eigen::MatrixXd>& truth);
double operator_norm_error(const WindowedEstimate& estimate, const std::vector<Eigen::MatrixXd>& truth);

/// True system matrix for each window of `layout`: the average of the
/// per-transition matrices the window's columns were generated with (exact
/// when every column in a window shares one system, e.g. M = 1).
std::vector<Eigen::MatrixXd> window_truth(const GroundTruth& truth, const SnapshotPair& layout);

/// Index (into truth.bases / distinct angles) of the system that generated
/// the majority of each window's transitions; ties go to the earlier system.
std::vector<int> window_majority_system(const GroundTruth& truth, const SnapshotPair& layout);

struct KMeansRun {
    std::vector<int> labels;
    Eigen::MatrixXd centers;
    double inertia = 0.0;                // within-cluster sum of squares
    std::vector<double> objective_trace; // inertia after each assignment step
};

/// One k-means++ seeded Lloyd run on the rows of `points`.
KMeansRun kmeans_once(const Eigen::MatrixXd& points, int k, RandomEngine& engine,
                      int max_iters = 300);

/// Best of `restarts` k-means runs on the rows of U3; labels are renumbered
/// in order of first appearance.
std::vector<int> cluster_temporal_modes(const Eigen::MatrixXd& U3, int k, std::uint64_t seed,
                                        int restarts = 100);

/// Relabel so that labels appear as 0, 1, 2, ... in order of first occurrence.
std::vector<int> canonicalize_labels(const std::vector<int>& labels);

} // namespace tvart
