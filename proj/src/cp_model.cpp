#include "tvart/cp_model.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "tvart/error.hpp"

namespace tvart {

void CpFactors::validate() const {
    const auto r = U1.cols();
    if (r < 1)
        throw Error(ErrorKind::InvalidArgument, "CP rank must be at least 1");
    if (U2.cols() != r || U3.cols() != r)
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("factor ranks disagree: {}, {}, {}", r, U2.cols(), U3.cols()));
    if (!U1.allFinite() || !U2.allFinite() || !U3.allFinite())
        throw Error(ErrorKind::NonFinite, "CP factors contain non-finite entries");
}

CpFactors NormalizedCp::scaled() const {
    CpFactors out = factors;
    out.U1 = factors.U1 * lambda.asDiagonal();
    return out;
}

Eigen::MatrixXd slice(const CpFactors& model, Eigen::Index k) {
    if (k < 0 || k >= model.windows())
        throw Error(ErrorKind::IndexOutOfRange,
                    fmt::format("window {} outside [0, {})", k, model.windows()));
    return model.U1 * model.U3.row(k).asDiagonal() * model.U2.transpose();
}

Eigen::VectorXd offset(const CpFactors& model, Eigen::Index k) {
    if (!model.affine)
        throw Error(ErrorKind::InvalidArgument, "offset requested from a non-affine model");
    if (k < 0 || k >= model.windows())
        throw Error(ErrorKind::IndexOutOfRange,
                    fmt::format("window {} outside [0, {})", k, model.windows()));
    const Eigen::VectorXd c = model.U2.row(model.input_dim() - 1).transpose();
    return model.U1 * (model.U3.row(k).transpose().cwiseProduct(c));
}

NormalizedCp normalize(const CpFactors& model) {
    const Eigen::Index r = model.rank();
    CpFactors unit = model;
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(r);

    for (Eigen::Index c = 0; c < r; ++c) {
        const double n1 = model.U1.col(c).norm();
        const double n2 = model.U2.col(c).norm();
        const double n3 = model.U3.col(c).norm();
        if (n1 == 0.0 || n2 == 0.0 || n3 == 0.0) {
            // A zero factor kills the whole component.
            if (n1 > 0.0)
                unit.U1.col(c) /= n1;
            if (n2 > 0.0)
                unit.U2.col(c) /= n2;
            if (n3 > 0.0)
                unit.U3.col(c) /= n3;
            continue;
        }
        unit.U1.col(c) /= n1;
        unit.U2.col(c) /= n2;
        unit.U3.col(c) /= n3;
        lambda(c) = n1 * n2 * n3;

        // Sign convention: largest-magnitude entry of the temporal mode is
        // positive; the flip is absorbed by the left spatial mode.
        Eigen::Index at = 0;
        unit.U3.col(c).cwiseAbs().maxCoeff(&at);
        if (unit.U3(at, c) < 0.0) {
            unit.U3.col(c) *= -1.0;
            unit.U1.col(c) *= -1.0;
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(r));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return lambda(a) > lambda(b); });

    NormalizedCp out;
    out.factors.affine = model.affine;
    out.factors.U1.resize(unit.U1.rows(), r);
    out.factors.U2.resize(unit.U2.rows(), r);
    out.factors.U3.resize(unit.U3.rows(), r);
    out.lambda.resize(r);
    for (Eigen::Index c = 0; c < r; ++c) {
        const auto src = order[static_cast<std::size_t>(c)];
        out.factors.U1.col(c) = unit.U1.col(src);
        out.factors.U2.col(c) = unit.U2.col(src);
        out.factors.U3.col(c) = unit.U3.col(src);
        out.lambda(c) = lambda(src);
    }
    return out;
}

Eigen::Tensor<double, 3> reconstruct_tensor(const CpFactors& model, std::int64_t max_entries) {
    const Eigen::Index n = model.state_dim();
    const Eigen::Index n_in = model.input_dim();
    const Eigen::Index t = model.windows();
    const auto entries = static_cast<std::int64_t>(n) * n_in * t;
    if (entries > max_entries)
        throw Error(ErrorKind::TooLarge,
                    fmt::format("dense tensor would have {} entries (cap {})", entries, max_entries));

    Eigen::Tensor<double, 3> out(n, n_in, t);
    out.setZero();
    for (Eigen::Index r = 0; r < model.rank(); ++r)
        for (Eigen::Index k = 0; k < t; ++k) {
            const double w = model.U3(k, r);
            for (Eigen::Index j = 0; j < n_in; ++j) {
                const double wj = w * model.U2(j, r);
                for (Eigen::Index i = 0; i < n; ++i)
                    out(i, j, k) += model.U1(i, r) * wj;
            }
        }
    return out;
}

int effective_rank(const CpFactors& model, double threshold_fraction) {
    const auto normalized = normalize(model);
    if (normalized.lambda.size() == 0)
        return 0;
    const double top = normalized.lambda.maxCoeff();
    if (top <= 0.0)
        return 0;
    return static_cast<int>((normalized.lambda.array() >= threshold_fraction * top).count());
}

} // namespace tvart
