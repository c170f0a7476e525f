#include "tvart/random.hpp"

namespace tvart {

RandomEngine make_engine(std::uint64_t seed, Stream stream, std::uint64_t index) {
    const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    const auto tag = static_cast<std::uint64_t>(stream);
    std::seed_seq seq{lo(seed), hi(seed), lo(tag), hi(tag), lo(index), hi(index)};
    return RandomEngine(seq);
}

Eigen::MatrixXd gaussian_matrix(RandomEngine& engine, Eigen::Index rows, Eigen::Index cols,
                                double sd) {
    // std::normal_distribution requires a strictly positive deviation.
    if (sd == 0.0)
        return Eigen::MatrixXd::Zero(rows, cols);
    std::normal_distribution<double> dist(0.0, sd);
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            out(i, j) = dist(engine);
    return out;
}

} // namespace tvart
