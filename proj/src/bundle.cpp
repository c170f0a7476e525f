#include "tvart/bundle.hpp"

#include <cmath>

#include <fmt/format.h>

#include "tvart/csv.hpp"
#include "tvart/error.hpp"

namespace tvart {

std::string truth_basis_file(std::size_t basis) { return fmt::format("truth_basis_{}.csv", basis); }

void write_truth_bundle(const std::filesystem::path& dir, const GroundTruth& truth,
                        const std::string& manifest) {
    std::filesystem::create_directories(dir);
    Eigen::MatrixXd index(truth.steps(), 3);
    for (Eigen::Index s = 0; s < truth.steps(); ++s) {
        index(s, 0) = static_cast<double>(s + 1);
        index(s, 1) = truth.step_basis[static_cast<std::size_t>(s)];
        index(s, 2) = truth.step_theta(s);
    }
    csv::write(dir / kTruthIndexFile, index, {"step", "basis", "theta"}, manifest);
    for (std::size_t b = 0; b < truth.bases.size(); ++b)
        csv::write(dir / truth_basis_file(b), truth.bases[b], {"w1", "w2"}, manifest);
}

GroundTruth read_truth_bundle(const std::filesystem::path& dir) {
    const auto index = csv::read(dir / kTruthIndexFile);
    if (index.values.cols() != 3 || index.values.rows() < 1)
        throw Error(ErrorKind::Parse, fmt::format("{} must have columns step,basis,theta",
                                                  (dir / kTruthIndexFile).string()));
    GroundTruth truth;
    const Eigen::Index steps = index.values.rows();
    truth.step_theta = index.values.col(2);
    int max_basis = -1;
    for (Eigen::Index s = 0; s < steps; ++s) {
        const double b = index.values(s, 1);
        if (b < 0 || b != std::floor(b) || index.values(s, 0) != static_cast<double>(s + 1))
            throw Error(ErrorKind::Parse, fmt::format("{}: malformed row {}",
                                                      (dir / kTruthIndexFile).string(), s + 1));
        truth.step_basis.push_back(static_cast<int>(b));
        max_basis = std::max(max_basis, static_cast<int>(b));
    }
    for (int b = 0; b <= max_basis; ++b) {
        auto basis = csv::read(dir / truth_basis_file(static_cast<std::size_t>(b)));
        if (basis.values.cols() != 2)
            throw Error(ErrorKind::Parse, fmt::format("{} must have two columns",
                                                      truth_basis_file(static_cast<std::size_t>(b))));
        if (!truth.bases.empty() && basis.values.rows() != truth.bases.front().rows())
            throw Error(ErrorKind::ShapeMismatch, "truth bases have different dimensions");
        truth.bases.push_back(std::move(basis.values));
    }
    truth.info.n = truth.bases.front().rows();
    truth.info.tau = steps;
    return truth;
}

} // namespace tvart
