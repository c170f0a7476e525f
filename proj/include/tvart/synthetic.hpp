#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tvart/random.hpp"
#include "tvart/windowing.hpp"

namespace tvart {

/// W Rot(theta) W^T for an N x 2 orthonormal basis W. Kept in factored form
/// so large-N trajectories never build the dense N x N matrix.
struct Rank2Rotation {
    Eigen::MatrixXd basis; // N x 2, orthonormal columns
    double theta = 0.0;

    Eigen::Index dim() const { return basis.rows(); }
    Eigen::MatrixXd dense() const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

/// 2 x 2 counter-clockwise rotation by theta.
Eigen::Matrix2d rotation2(double theta);

/// Left singular vectors of an N x 2 standard Gaussian draw.
Eigen::MatrixXd random_rank2_basis(Eigen::Index n, RandomEngine& engine);

/// Dense random rank-2 rotation; the basis comes from the first basis stream of `seed`.
Eigen::MatrixXd make_rank2_rotation(Eigen::Index n, double theta, std::uint64_t seed);

struct GeneratorInfo {
    std::string benchmark; // "switching" or "smooth"
    Eigen::Index n = 0;
    Eigen::Index tau = 0;
    double sigma = 0.0;
    double theta1 = 0.0; // switching only
    double theta2 = 0.0; // switching only
    double lengthscale = 0.0; // smooth only
    double jitter = 0.0;      // smooth only
    std::uint64_t seed = 0;
};

/// Observed trajectory plus the system that produced it. Transition t
/// (1-based, x(t) -> x(t+1)) is governed by
/// bases[step_basis[t-1]] rotated by step_theta[t-1].
struct GroundTruth {
    TimeSeries series;     // noisy observations, N x (tau + 1)
    Eigen::MatrixXd clean; // noiseless trajectory
    std::vector<Eigen::MatrixXd> bases;
    std::vector<int> step_basis;
    Eigen::VectorXd step_theta;
    double sigma = 0.0;
    GeneratorInfo info;

    Eigen::Index steps() const { return step_theta.size(); }
    Rank2Rotation step_system(Eigen::Index step) const; // 0-based transition index
    Eigen::MatrixXd step_matrix(Eigen::Index step) const { return step_system(step).dense(); }
};

inline constexpr int kBurnInSteps = 200;
inline constexpr double kDefaultTheta1 = 0.1 * 3.14159265358979323846;
inline constexpr double kDefaultTheta2 = 0.37 * 3.14159265358979323846;

/// Switching benchmark: A1 for t < tau/2, A2 afterwards, state renormalized
/// to sqrt(N) after burn-in and after the first A2 step.
GroundTruth simulate_switching(Eigen::Index n, Eigen::Index tau, double sigma,
                               double theta1 = kDefaultTheta1, double theta2 = kDefaultTheta2,
                               std::uint64_t seed = 0);

/// exp(-((t - t') / lengthscale)^2) + jitter * [t == t'].
double gp_kernel(double t, double t_other, double lengthscale = 30.0, double jitter = 0.001);

/// Draw theta(1..tau) from the centered squared-exponential Gaussian process.
Eigen::VectorXd sample_gp_angle(Eigen::Index tau, double lengthscale = 30.0,
                                double jitter = 0.001, std::uint64_t seed = 0);

/// Smoothly varying benchmark with a fixed basis and GP-driven angle.
GroundTruth simulate_smooth(Eigen::Index n, Eigen::Index tau, double sigma = 0.2,
                            std::uint64_t seed = 0, double lengthscale = 30.0,
                            double jitter = 0.001);

/// Smoothly varying benchmark driven by a caller-supplied angle sequence
/// (one angle per transition).
GroundTruth simulate_smooth_with_angles(Eigen::Index n, const Eigen::VectorXd& theta, double sigma,
                                        std::uint64_t seed = 0);

/// clean + i.i.d. N(0, sigma^2) noise drawn from the observation stream of `seed`.
Eigen::MatrixXd add_observation_noise(const Eigen::MatrixXd& clean, double sigma, std::uint64_t seed);

} // namespace tvart
