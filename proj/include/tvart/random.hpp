#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace tvart {

/// Engine used for every random draw in the library.
using RandomEngine = std::mt19937_64;

/// Named sub-streams derived from one user seed. Each consumer of randomness
/// gets its own engine so that, e.g., changing the noise level never shifts
/// the draws used for the system bases.
enum class Stream : std::uint64_t {
    Init = 1,
    BasisFirst = 2,
    BasisSecond = 3,
    ObservationNoise = 4,
    GaussianProcess = 5,
    KMeans = 6,
};

/// Engine for (seed, stream, index). The triple is mixed through
/// std::seed_seq, so neighbouring seeds give unrelated sequences.
RandomEngine make_engine(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

/// rows x cols matrix of i.i.d. N(0, sd^2) draws, filled column-major.
Eigen::MatrixXd gaussian_matrix(RandomEngine& engine, Eigen::Index rows, Eigen::Index cols,
                                double sd = 1.0);

} // namespace tvart
