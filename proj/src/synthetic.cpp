#include "tvart/synthetic.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "tvart/error.hpp"

namespace tvart {
namespace {

// x(1) = 1, iterate `system` for the burn-in, renormalize to sqrt(N).
Eigen::VectorXd burned_in_state(const Rank2Rotation& system) {
    const Eigen::Index n = system.dim();
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < kBurnInSteps; ++i)
        x = system.apply(x);
    const double norm = x.norm();
    if (norm < 1e-12)
        throw Error(ErrorKind::DegenerateProjection,
                    "burn-in collapsed the state; retry with another seed");
    return x * (std::sqrt(static_cast<double>(n)) / norm);
}

void check_size(Eigen::Index n, Eigen::Index tau) {
    if (n < 2)
        throw Error(ErrorKind::InvalidArgument, fmt::format("need N >= 2, got {}", n));
    if (tau < 1)
        throw Error(ErrorKind::InvalidArgument, fmt::format("need tau >= 1, got {}", tau));
}

GroundTruth run_trajectory(GroundTruth truth, std::uint64_t seed, Eigen::Index renormalize_after) {
    const Eigen::Index n = truth.bases.front().rows();
    const Eigen::Index tau = truth.steps();
    const double target = std::sqrt(static_cast<double>(n));

    truth.clean.resize(n, tau + 1);
    truth.clean.col(0) = burned_in_state(truth.step_system(0));
    for (Eigen::Index s = 0; s < tau; ++s) {
        Eigen::VectorXd next = truth.step_system(s).apply(truth.clean.col(s));
        if (s == renormalize_after) {
            const double norm = next.norm();
            if (norm < 1e-12)
                throw Error(ErrorKind::DegenerateProjection,
                            "switch collapsed the state; retry with another seed");
            next *= target / norm;
        }
        truth.clean.col(s + 1) = next;
    }
    truth.series.values = add_observation_noise(truth.clean, truth.sigma, seed);
    return truth;
}

} // namespace

Eigen::Matrix2d rotation2(double theta) {
    Eigen::Matrix2d r;
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

Eigen::MatrixXd Rank2Rotation::dense() const {
    return basis * rotation2(theta) * basis.transpose();
}

Eigen::VectorXd Rank2Rotation::apply(const Eigen::VectorXd& x) const {
    const Eigen::Vector2d coords = basis.transpose() * x;
    return basis * (rotation2(theta) * coords);
}

Eigen::MatrixXd random_rank2_basis(Eigen::Index n, RandomEngine& engine) {
    const Eigen::MatrixXd z = gaussian_matrix(engine, n, 2);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinU);
    return svd.matrixU();
}

Eigen::MatrixXd make_rank2_rotation(Eigen::Index n, double theta, std::uint64_t seed) {
    if (n < 2)
        throw Error(ErrorKind::InvalidArgument, fmt::format("need N >= 2, got {}", n));
    auto engine = make_engine(seed, Stream::BasisFirst);
    return Rank2Rotation{random_rank2_basis(n, engine), theta}.dense();
}

Rank2Rotation GroundTruth::step_system(Eigen::Index step) const {
    if (step < 0 || step >= steps())
        throw Error(ErrorKind::IndexOutOfRange,
                    fmt::format("transition {} outside [0, {})", step, steps()));
    return {bases[static_cast<std::size_t>(step_basis[static_cast<std::size_t>(step)])],
            step_theta(step)};
}

Eigen::MatrixXd add_observation_noise(const Eigen::MatrixXd& clean, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "noise level must be nonnegative");
    auto engine = make_engine(seed, Stream::ObservationNoise);
    return clean + gaussian_matrix(engine, clean.rows(), clean.cols(), sigma);
}

GroundTruth simulate_switching(Eigen::Index n, Eigen::Index tau, double sigma, double theta1,
                               double theta2, std::uint64_t seed) {
    check_size(n, tau);
    if (tau % 2 != 0)
        throw Error(ErrorKind::InvalidArgument, fmt::format("tau must be even, got {}", tau));

    GroundTruth truth;
    auto first = make_engine(seed, Stream::BasisFirst);
    auto second = make_engine(seed, Stream::BasisSecond);
    truth.bases.push_back(random_rank2_basis(n, first));
    truth.bases.push_back(random_rank2_basis(n, second));
    truth.sigma = sigma;
    truth.step_basis.resize(static_cast<std::size_t>(tau));
    truth.step_theta.resize(tau);
    const Eigen::Index half = tau / 2;
    for (Eigen::Index t = 1; t <= tau; ++t) {
        const bool later = t >= half;
        truth.step_basis[static_cast<std::size_t>(t - 1)] = later ? 1 : 0;
        truth.step_theta(t - 1) = later ? theta2 : theta1;
    }
    truth.info = {"switching", n, tau, sigma, theta1, theta2, 0.0, 0.0, seed};
    // Transition t = tau/2 is the first A2 step (0-based index tau/2 - 1).
    return run_trajectory(std::move(truth), seed, half - 1);
}

double gp_kernel(double t, double t_other, double lengthscale, double jitter) {
    const double z = (t - t_other) / lengthscale;
    return std::exp(-z * z) + (t == t_other ? jitter : 0.0);
}

Eigen::VectorXd sample_gp_angle(Eigen::Index tau, double lengthscale, double jitter,
                                std::uint64_t seed) {
    if (tau < 1)
        throw Error(ErrorKind::InvalidArgument, fmt::format("need tau >= 1, got {}", tau));
    Eigen::MatrixXd k(tau, tau);
    for (Eigen::Index i = 0; i < tau; ++i)
        for (Eigen::Index j = 0; j < tau; ++j)
            k(i, j) = gp_kernel(static_cast<double>(i + 1), static_cast<double>(j + 1), lengthscale,
                                jitter);
    const Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorKind::CholeskyFailure, "GP covariance is not positive definite");
    auto engine = make_engine(seed, Stream::GaussianProcess);
    const Eigen::VectorXd z = gaussian_matrix(engine, tau, 1);
    return llt.matrixL() * z;
}

GroundTruth simulate_smooth_with_angles(Eigen::Index n, const Eigen::VectorXd& theta, double sigma,
                                        std::uint64_t seed) {
    check_size(n, theta.size());
    GroundTruth truth;
    auto first = make_engine(seed, Stream::BasisFirst);
    truth.bases.push_back(random_rank2_basis(n, first));
    truth.sigma = sigma;
    truth.step_basis.assign(static_cast<std::size_t>(theta.size()), 0);
    truth.step_theta = theta;
    truth.info = {"smooth", n, theta.size(), sigma, 0.0, 0.0, 0.0, 0.0, seed};
    return run_trajectory(std::move(truth), seed, -1);
}

GroundTruth simulate_smooth(Eigen::Index n, Eigen::Index tau, double sigma, std::uint64_t seed,
                            double lengthscale, double jitter) {
    check_size(n, tau);
    auto truth = simulate_smooth_with_angles(n, sample_gp_angle(tau, lengthscale, jitter, seed),
                                             sigma, seed);
    truth.info.lengthscale = lengthscale;
    truth.info.jitter = jitter;
    return truth;
}

} // namespace tvart
