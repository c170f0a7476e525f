#pragma once

#include <string_view>

#include <Eigen/Core>

namespace tvart {

enum class Regularizer { None, TV, Spline };

std::string_view to_string(Regularizer kind) noexcept;
/// Accepts "none", "tv", "spline" (case-insensitive); throws InvalidArgument otherwise.
Regularizer parse_regularizer(std::string_view name);

/// Temporal smoothing penalty and its strength beta.
struct RegularizerKind {
    Regularizer kind = Regularizer::None;
    double beta = 0.0;

    /// beta == 0 behaves exactly like no smoothing.
    bool active() const { return kind != Regularizer::None && beta > 0.0; }
};

/// Sum over columns of the l1 norm of first differences.
double tv_penalty(const Eigen::MatrixXd& U3);

/// 0.5 * ||D U3||_F^2 with D the free-boundary first-difference matrix.
double spline_penalty(const Eigen::MatrixXd& U3);

/// Value of beta * R(U3) for the configured regularizer.
double smoothing_penalty(const RegularizerKind& reg, const Eigen::MatrixXd& U3);

/// (D v)_k = v_k - v_{k+1}, length T - 1. Throws InvalidArgument for T < 2.
Eigen::VectorXd apply_diff(const Eigen::VectorXd& v);

/// Adjoint of apply_diff; returns a vector of length w.size() + 1.
Eigen::VectorXd apply_diff_transpose(const Eigen::VectorXd& w);

/// D^T D applied to every column of U (the free-boundary path Laplacian).
Eigen::MatrixXd apply_diff_gram(const Eigen::MatrixXd& U);

/// argmin_u 0.5 ||u - v||^2 + gamma ||D u||_1, computed exactly by a direct
/// (non-iterative) taut-string sweep in O(T) typical time.
Eigen::VectorXd tv_prox_1d(const Eigen::VectorXd& v, double gamma);

/// Column-wise tv_prox_1d.
Eigen::MatrixXd tv_prox_columns(const Eigen::MatrixXd& V, double gamma);

/// (1 / (2 eta)) (||U1||^2 + ||U2||^2 + ||U3||^2). Throws NonPositiveEta.
double tikhonov_penalty(const Eigen::MatrixXd& U1, const Eigen::MatrixXd& U2,
                        const Eigen::MatrixXd& U3, double eta);

} // namespace tvart
