#include "tvart/windowing.hpp"

#include <cmath>

#include <fmt/format.h>

#include "tvart/error.hpp"

namespace tvart {

void TimeSeries::validate() const {
    if (values.rows() < 1)
        throw Error(ErrorKind::InvalidArgument, "time series needs at least one channel");
    if (values.cols() < 2)
        throw Error(ErrorKind::SeriesTooShort, "time series needs at least two samples");
    if (!values.allFinite())
        throw Error(ErrorKind::NonFinite, "time series contains non-finite values");
    if (!channel_names.empty() && static_cast<Eigen::Index>(channel_names.size()) != values.rows())
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("{} channel names for {} channels", channel_names.size(),
                                values.rows()));
}

SnapshotPair build_snapshots(const TimeSeries& series, Eigen::Index window, Eigen::Index lags,
                             bool affine) {
    if (window < 1 || lags < 1)
        throw Error(ErrorKind::InvalidArgument, "window length and lag order must be positive");
    series.validate();

    const Eigen::Index n = series.channels();
    const Eigen::Index tau = series.samples() - 1;
    // Targets x(P+1) ... x(tau+1): tau - P + 1 usable transitions.
    const Eigen::Index transitions = tau - lags + 1;
    const Eigen::Index windows = transitions > 0 ? transitions / window : 0;
    if (windows < 1)
        throw Error(ErrorKind::SeriesTooShort,
                    fmt::format("{} transitions cannot fill one window of length {} with {} lags",
                                std::max<Eigen::Index>(transitions, 0), window, lags));

    SnapshotPair out;
    out.window = window;
    out.lags = lags;
    out.affine = affine;
    out.state_dim = n;
    out.input_dim = n * lags + (affine ? 1 : 0);
    out.dropped_samples = transitions - windows * window;
    out.X.reserve(windows);
    out.Y.reserve(windows);

    const auto& x = series.values;
    for (Eigen::Index k = 0; k < windows; ++k) {
        Eigen::MatrixXd xk(out.input_dim, window);
        Eigen::MatrixXd yk(n, window);
        for (Eigen::Index j = 0; j < window; ++j) {
            // 0-based column of x(t) in the series.
            const Eigen::Index t = out.predictor_time(k, j) - 1;
            for (Eigen::Index p = 0; p < lags; ++p)
                xk.block(p * n, j, n, 1) = x.col(t - p);
            if (affine)
                xk(out.input_dim - 1, j) = 1.0;
            yk.col(j) = x.col(t + 1);
        }
        out.X.push_back(std::move(xk));
        out.Y.push_back(std::move(yk));
    }
    return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> concatenate_windows(const SnapshotPair& data) {
    const Eigen::Index m = data.window;
    const Eigen::Index t = data.windows();
    Eigen::MatrixXd x(data.input_dim, m * t);
    Eigen::MatrixXd y(data.state_dim, m * t);
    for (Eigen::Index k = 0; k < t; ++k) {
        x.middleCols(k * m, m) = data.X[k];
        y.middleCols(k * m, m) = data.Y[k];
    }
    return {std::move(x), std::move(y)};
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& values) const {
    return (values.colwise() - mean).array().colwise() / sd.array();
}

Eigen::MatrixXd Standardization::invert(const Eigen::MatrixXd& standardized) const {
    return (standardized.array().colwise() * sd.array()).matrix().colwise() + mean;
}

std::pair<TimeSeries, Standardization> standardize(const TimeSeries& series) {
    series.validate();
    const auto& v = series.values;
    const double n = static_cast<double>(v.cols());

    Standardization tf;
    tf.mean = v.rowwise().mean();
    tf.sd.resize(v.rows());
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        const double ss = (v.row(i).array() - tf.mean(i)).square().sum();
        const double sd = std::sqrt(ss / (n - 1.0));
        if (!(sd > 0.0)) {
            const std::string name = series.channel_names.empty()
                                         ? fmt::format("channel {}", i)
                                         : series.channel_names[static_cast<std::size_t>(i)];
            throw Error(ErrorKind::ZeroVariance, fmt::format("{} has zero variance", name));
        }
        tf.sd(i) = sd;
    }

    TimeSeries out = series;
    out.values = tf.apply(v);
    return {std::move(out), std::move(tf)};
}

} // namespace tvart
