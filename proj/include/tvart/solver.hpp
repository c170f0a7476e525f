#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tvart/cp_model.hpp"
#include "tvart/regularizers.hpp"
#include "tvart/windowing.hpp"

namespace tvart {

/// Re-seed the iteration after `at_iter` outer iterations, optionally
/// replacing the right spatial modes with the left ones (useful when the
/// solution is close to symmetric and the right-mode solve stagnates).
struct WarmRestart {
    int at_iter = 10;
    bool copy_U1_to_U2 = true;
};

struct Hyperparams {
    int rank = 1;
    double eta = 1.0;
    RegularizerKind reg{};
    int max_outer_iters = 1000;
    double rtol = 1e-4;
    double atol = 1e-6;
    int cg_max_iters = 24;
    int pg_max_iters = 40;
    double cg_tol = 1e-9;
    std::uint64_t seed = 0;
    /// Initialization noise; unset means 0.5/sqrt(N) (U1), 0.5/sqrt(N_in) (U2)
    /// and 0.5/sqrt(T) (U3).
    std::optional<double> init_noise_spatial;
    std::optional<double> init_noise_temporal;
    std::optional<WarmRestart> warm_restart;

    void validate() const;
};

enum class Termination { RelTol, AbsTol, MaxIters };
std::string_view to_string(Termination t) noexcept;

struct FitReport {
    double initial_cost = 0.0;
    std::vector<double> cost_trace; // cost after each outer iteration
    std::vector<double> rmse_trace;
    int iterations = 0;
    Termination termination = Termination::MaxIters;
    double wall_seconds = 0.0;
    std::vector<int> right_cg_iters;  // per outer iteration
    std::vector<int> temporal_iters;  // CG or proximal-gradient iterations
    std::optional<int> restart_iteration; // outer iteration that began after a warm restart
};

/// Result of an iterative block update.
struct BlockUpdate {
    Eigen::MatrixXd value;
    int iterations = 0;
};

/// 0.5 * sum_k ||Y_k - A_k X_k||_F^2.
double loss(const CpFactors& model, const SnapshotPair& data);

/// loss + Tikhonov + beta * R(U3).
double cost(const CpFactors& model, const SnapshotPair& data, const Hyperparams& params);

/// sqrt(sum_k ||Y_k - A_k X_k||_F^2 / (N M T)).
double rmse(const CpFactors& model, const SnapshotPair& data);

/// Gradients of the differentiable part of the cost (loss + Tikhonov, plus
/// the spline penalty when it is the active regularizer; TV is excluded).
struct BlockGradients {
    Eigen::MatrixXd U1, U2, U3;
};
BlockGradients smooth_gradients(const CpFactors& model, const SnapshotPair& data,
                                const Hyperparams& params);

/// Exact minimizer of the cost over U1 (one R x R solve).
Eigen::MatrixXd update_left(const CpFactors& model, const SnapshotPair& data, double eta);

/// Matrix-free conjugate gradients on sum_k X_k X_k^T U2 R_k + U2 / eta = B,
/// warm-started from the current U2. The N_in x N_in products are never formed.
BlockUpdate update_right(const CpFactors& model, const SnapshotPair& data, double eta,
                         int max_iters = 24, double rel_tol = 1e-9);

/// Minimizer over U3: per-window R x R solves without smoothing, CG with the
/// spline penalty, accelerated proximal gradient with the TV penalty.
BlockUpdate update_temporal(const CpFactors& model, const SnapshotPair& data,
                            const Hyperparams& params);

/// Single global linear fit, split by SVD into spatial modes; constant
/// temporal modes; seeded Gaussian perturbation.
CpFactors initialize(const SnapshotPair& data, const Hyperparams& params);

/// Called after every outer iteration with (iteration, cost, rmse).
using FitObserver = std::function<void(int, double, double)>;

/// Alternating minimization from initialize(data, params).
std::pair<CpFactors, FitReport> fit(const SnapshotPair& data, const Hyperparams& params,
                                    const FitObserver& observer = {});

/// Alternating minimization from a caller-supplied starting point.
std::pair<CpFactors, FitReport> fit_from(CpFactors start, const SnapshotPair& data,
                                         const Hyperparams& params,
                                         const FitObserver& observer = {});

} // namespace tvart
