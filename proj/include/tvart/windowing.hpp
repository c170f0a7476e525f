#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tvart {

/// Multivariate trajectory, one row per channel and one column per sample.
struct TimeSeries {
    Eigen::MatrixXd values;                 // N x (tau + 1)
    std::vector<std::string> channel_names; // empty or N labels
    std::optional<double> dt;               // metadata only

    Eigen::Index channels() const { return values.rows(); }
    Eigen::Index samples() const { return values.cols(); }

    /// Throws NonFinite / InvalidArgument if the invariants do not hold.
    void validate() const;
};

/// Predictor/target snapshot tensors stored as frontal slices.
///
/// For window k (0-based) and column j, X[k] holds the predictor built from
/// x(t), ..., x(t - P + 1) (plus a trailing row of ones when affine) and
/// Y[k] holds x(t + 1), where t = P + k*M + j in 1-based sample time.
struct SnapshotPair {
    std::vector<Eigen::MatrixXd> X; // T slices of N_in x M
    std::vector<Eigen::MatrixXd> Y; // T slices of N x M
    Eigen::Index window = 0;        // M
    Eigen::Index lags = 1;          // P
    bool affine = false;
    Eigen::Index state_dim = 0;     // N
    Eigen::Index input_dim = 0;     // N_in = N*P (+1 if affine)
    Eigen::Index dropped_samples = 0;

    Eigen::Index windows() const { return static_cast<Eigen::Index>(X.size()); }

    /// 1-based sample time of the predictor x(t) in column j of window k (0-based).
    Eigen::Index predictor_time(Eigen::Index k, Eigen::Index j) const {
        return lags + k * window + j;
    }
};

SnapshotPair build_snapshots(const TimeSeries& series, Eigen::Index window, Eigen::Index lags = 1,
                             bool affine = false);

/// All windows concatenated column-wise into one N_in x (T*M) predictor and
/// one N x (T*M) target matrix.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> concatenate_windows(const SnapshotPair& data);

/// Per-channel affine transform produced by standardize().
struct Standardization {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd; // sample (n - 1) standard deviation
    static constexpr const char* convention = "sample-sd(n-1)";

    Eigen::MatrixXd apply(const Eigen::MatrixXd& values) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& standardized) const;
};

std::pair<TimeSeries, Standardization> standardize(const TimeSeries& series);

} // namespace tvart
