#include "tvart/regularizers.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include <fmt/format.h>

#include "tvart/error.hpp"

namespace tvart {

std::string_view to_string(Regularizer kind) noexcept {
    switch (kind) {
    case Regularizer::None: return "none";
    case Regularizer::TV: return "tv";
    case Regularizer::Spline: return "spline";
    }
    return "none";
}

Regularizer parse_regularizer(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "none")
        return Regularizer::None;
    if (lower == "tv")
        return Regularizer::TV;
    if (lower == "spline")
        return Regularizer::Spline;
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("unknown regularizer '{}' (expected none, tv or spline)", name));
}

double tv_penalty(const Eigen::MatrixXd& U3) {
    if (U3.rows() < 2)
        return 0.0;
    const auto t = U3.rows();
    return (U3.topRows(t - 1) - U3.bottomRows(t - 1)).cwiseAbs().sum();
}

double spline_penalty(const Eigen::MatrixXd& U3) {
    if (U3.rows() < 2)
        return 0.0;
    const auto t = U3.rows();
    return 0.5 * (U3.topRows(t - 1) - U3.bottomRows(t - 1)).squaredNorm();
}

double smoothing_penalty(const RegularizerKind& reg, const Eigen::MatrixXd& U3) {
    switch (reg.kind) {
    case Regularizer::None: return 0.0;
    case Regularizer::TV: return reg.beta * tv_penalty(U3);
    case Regularizer::Spline: return reg.beta * spline_penalty(U3);
    }
    return 0.0;
}

Eigen::VectorXd apply_diff(const Eigen::VectorXd& v) {
    if (v.size() < 2)
        throw Error(ErrorKind::InvalidArgument, "first differences need at least two samples");
    const auto t = v.size();
    return v.head(t - 1) - v.tail(t - 1);
}

Eigen::VectorXd apply_diff_transpose(const Eigen::VectorXd& w) {
    const auto m = w.size();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m + 1);
    out.head(m) += w;
    out.tail(m) -= w;
    return out;
}

Eigen::MatrixXd apply_diff_gram(const Eigen::MatrixXd& U) {
    const auto t = U.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t, U.cols());
    if (t < 2)
        return out;
    const Eigen::MatrixXd d = U.topRows(t - 1) - U.bottomRows(t - 1);
    out.topRows(t - 1) += d;
    out.bottomRows(t - 1) -= d;
    return out;
}

// Direct taut-string style algorithm: sweep left to right maintaining the
// admissible range [vmin, vmax] of the current segment value together with
// the running dual residuals umin / umax; a segment is closed as soon as the
// dual leaves [-gamma, gamma], and the last segment is settled by the free
// right boundary.
Eigen::VectorXd tv_prox_1d(const Eigen::VectorXd& v, double gamma) {
    if (gamma < 0.0)
        throw Error(ErrorKind::InvalidArgument, "TV prox weight must be nonnegative");
    const Eigen::Index n = v.size();
    if (gamma == 0.0 || n < 2)
        return v;

    Eigen::VectorXd out(n);
    const double lambda = gamma;
    Eigen::Index k = 0, k0 = 0;
    Eigen::Index kplus = 0, kminus = 0;
    double umin = lambda, umax = -lambda;
    double vmin = v(0) - lambda, vmax = v(0) + lambda;

    for (;;) {
        while (k == n - 1) {
            if (umin < 0.0) {
                // vmin too high: close the segment with a downward jump.
                do
                    out(k0++) = vmin;
                while (k0 <= kminus);
                k = kminus = k0;
                vmin = v(k0);
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if (umax > 0.0) {
                // vmax too low: close the segment with an upward jump.
                do
                    out(k0++) = vmax;
                while (k0 <= kplus);
                k = kplus = k0;
                vmax = v(k0);
                umax = -lambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / static_cast<double>(k - k0 + 1);
                do
                    out(k0++) = vmin;
                while (k0 <= k);
                return out;
            }
        }

        umin += v(k + 1) - vmin;
        if (umin < -lambda) {
            do
                out(k0++) = vmin;
            while (k0 <= kminus);
            k = kminus = kplus = k0;
            vmin = v(k0);
            vmax = vmin + 2.0 * lambda;
            umin = lambda;
            umax = -lambda;
            continue;
        }
        umax += v(k + 1) - vmax;
        if (umax > lambda) {
            do
                out(k0++) = vmax;
            while (k0 <= kplus);
            k = kminus = kplus = k0;
            vmax = v(k0);
            vmin = vmax - 2.0 * lambda;
            umin = lambda;
            umax = -lambda;
            continue;
        }
        ++k;
        if (umin >= lambda) {
            kminus = k;
            vmin += (umin - lambda) / static_cast<double>(kminus - k0 + 1);
            umin = lambda;
        }
        if (umax <= -lambda) {
            kplus = k;
            vmax += (umax + lambda) / static_cast<double>(kplus - k0 + 1);
            umax = -lambda;
        }
    }
}

Eigen::MatrixXd tv_prox_columns(const Eigen::MatrixXd& V, double gamma) {
    Eigen::MatrixXd out(V.rows(), V.cols());
    for (Eigen::Index c = 0; c < V.cols(); ++c)
        out.col(c) = tv_prox_1d(V.col(c), gamma);
    return out;
}

double tikhonov_penalty(const Eigen::MatrixXd& U1, const Eigen::MatrixXd& U2,
                        const Eigen::MatrixXd& U3, double eta) {
    if (!(eta > 0.0))
        throw Error(ErrorKind::NonPositiveEta, fmt::format("eta must be positive, got {}", eta));
    return (U1.squaredNorm() + U2.squaredNorm() + U3.squaredNorm()) / (2.0 * eta);
}

} // namespace tvart
