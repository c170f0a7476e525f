#include "tvart/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "tvart/error.hpp"
#include "tvart/random.hpp"

namespace tvart {
namespace {

void check_dims(const CpFactors& model, const SnapshotPair& data) {
    model.validate();
    if (model.state_dim() != data.state_dim || model.input_dim() != data.input_dim ||
        model.windows() != data.windows())
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("model is {}x{}x{} but data is {}x{}x{}", model.state_dim(),
                                model.input_dim(), model.windows(), data.state_dim,
                                data.input_dim, data.windows()));
}

void check_eta(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw Error(ErrorKind::NonPositiveEta,
                    fmt::format("eta must be positive and finite, got {}", eta));
}

double sum_squared_residual(const CpFactors& model, const SnapshotPair& data) {
    check_dims(model, data);
    const Eigen::MatrixXd U2t = model.U2.transpose();
    double total = 0.0;
    for (Eigen::Index k = 0; k < data.windows(); ++k) {
        const Eigen::MatrixXd c = model.U3.row(k).transpose().asDiagonal() * (U2t * data.X[k]);
        total += (data.Y[k] - model.U1 * c).squaredNorm();
    }
    return total;
}

// Quadratic model of the cost restricted to U3:
//   f(U3) = sum_k 0.5 u_k^T H_k u_k - b_k^T u_k (+ const),
// with H_k = (U2^T X_k X_k^T U2) o (U1^T U1) + I / eta and
// b_k = vecdiag(U2^T X_k Y_k^T U1), u_k the k-th row of U3.
struct TemporalQuadratic {
    std::vector<Eigen::MatrixXd> H;
    Eigen::MatrixXd b; // T x R, row k is b_k

    Eigen::MatrixXd apply(const Eigen::MatrixXd& U3) const {
        Eigen::MatrixXd out(U3.rows(), U3.cols());
        for (Eigen::Index k = 0; k < U3.rows(); ++k)
            out.row(k).noalias() = (H[static_cast<std::size_t>(k)] * U3.row(k).transpose()).transpose();
        return out;
    }

    double value(const Eigen::MatrixXd& U3) const {
        return 0.5 * U3.cwiseProduct(apply(U3)).sum() - b.cwiseProduct(U3).sum();
    }

    Eigen::MatrixXd gradient(const Eigen::MatrixXd& U3) const { return apply(U3) - b; }
};

TemporalQuadratic temporal_quadratic(const CpFactors& model, const SnapshotPair& data, double eta) {
    const Eigen::Index r = model.rank();
    const Eigen::MatrixXd gram1 = model.U1.transpose() * model.U1;
    const Eigen::MatrixXd U2t = model.U2.transpose();
    const Eigen::MatrixXd U1t = model.U1.transpose();

    TemporalQuadratic q;
    q.H.reserve(static_cast<std::size_t>(data.windows()));
    q.b.resize(data.windows(), r);
    for (Eigen::Index k = 0; k < data.windows(); ++k) {
        const Eigen::MatrixXd p = U2t * data.X[k];  // R x M
        const Eigen::MatrixXd py = U1t * data.Y[k]; // R x M
        Eigen::MatrixXd h = (p * p.transpose()).cwiseProduct(gram1);
        h.diagonal().array() += 1.0 / eta;
        q.H.push_back(std::move(h));
        q.b.row(k) = p.cwiseProduct(py).rowwise().sum().transpose();
    }
    return q;
}

// Plain conjugate gradients for a symmetric positive definite operator on
// matrices, warm-started from x. Stops on ||r|| <= rel_tol * ||rhs||.
template <typename Op>
int conjugate_gradient(const Op& apply, const Eigen::MatrixXd& rhs, Eigen::MatrixXd& x,
                       int max_iters, double rel_tol) {
    const double target = rel_tol * std::max(rhs.norm(), std::numeric_limits<double>::min());
    Eigen::MatrixXd r = rhs - apply(x);
    double rs = r.squaredNorm();
    if (std::sqrt(rs) <= target)
        return 0;
    Eigen::MatrixXd p = r;
    int it = 0;
    while (it < max_iters) {
        const Eigen::MatrixXd ap = apply(p);
        const double curvature = p.cwiseProduct(ap).sum();
        if (!(curvature > 0.0))
            break;
        const double alpha = rs / curvature;
        x.noalias() += alpha * p;
        r.noalias() -= alpha * ap;
        ++it;
        const double rs_next = r.squaredNorm();
        if (std::sqrt(rs_next) <= target)
            break;
        p = r + (rs_next / rs) * p;
        rs = rs_next;
    }
    return it;
}

// Accelerated proximal gradient on f(U) + beta * TV(U) with f the temporal
// quadratic. Backtracking halves the step from the last accepted value;
// momentum is reset whenever the composite objective would increase, so the
// returned iterate never has a larger objective than `x`.
int temporal_tv_fista(const TemporalQuadratic& q, double beta, int max_iters, Eigen::MatrixXd& x) {
    auto objective = [&](const Eigen::MatrixXd& u) { return q.value(u) + beta * tv_penalty(u); };

    double step = 1.0;
    double momentum = 1.0;
    double fx = objective(x);
    Eigen::MatrixXd y = x;
    int it = 0;
    while (it < max_iters) {
        ++it;
        const double fy = q.value(y);
        const Eigen::MatrixXd grad = q.gradient(y);
        Eigen::MatrixXd z;
        for (;;) {
            z = tv_prox_columns(y - step * grad, beta * step);
            const Eigen::MatrixXd d = z - y;
            const double model_value = fy + grad.cwiseProduct(d).sum() + d.squaredNorm() / (2.0 * step);
            if (q.value(z) <= model_value + 1e-14 * (1.0 + std::abs(fy)) || step < 1e-300)
                break;
            step *= 0.5;
        }

        const double fz = objective(z);
        if (fz > fx) {
            // Restart: the next pass is a plain proximal gradient step from x.
            if (y == x)
                break;
            y = x;
            momentum = 1.0;
            continue;
        }

        const double moved = (z - x).norm();
        const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        y = z + ((momentum - 1.0) / next_momentum) * (z - x);
        x = std::move(z);
        fx = fz;
        momentum = next_momentum;
        if (moved <= 1e-13 * (1.0 + x.norm()))
            break;
    }
    return it;
}

} // namespace

void Hyperparams::validate() const {
    if (rank < 1)
        throw Error(ErrorKind::InvalidArgument, "rank must be at least 1");
    check_eta(eta);
    if (!(reg.beta >= 0.0) || !std::isfinite(reg.beta))
        throw Error(ErrorKind::InvalidArgument, "beta must be nonnegative and finite");
    if (max_outer_iters < 1 || cg_max_iters < 0 || pg_max_iters < 0)
        throw Error(ErrorKind::InvalidArgument, "iteration caps must be nonnegative (outer >= 1)");
    if (!(rtol >= 0.0) || !(atol >= 0.0) || !(cg_tol >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "tolerances must be nonnegative");
    if ((init_noise_spatial && !(*init_noise_spatial >= 0.0)) ||
        (init_noise_temporal && !(*init_noise_temporal >= 0.0)))
        throw Error(ErrorKind::InvalidArgument, "initialization noise must be nonnegative");
    if (warm_restart && warm_restart->at_iter < 1)
        throw Error(ErrorKind::InvalidArgument, "warm restart iteration must be at least 1");
}

std::string_view to_string(Termination t) noexcept {
    switch (t) {
    case Termination::RelTol: return "rtol";
    case Termination::AbsTol: return "atol";
    case Termination::MaxIters: return "max_iters";
    }
    return "max_iters";
}

double loss(const CpFactors& model, const SnapshotPair& data) {
    return 0.5 * sum_squared_residual(model, data);
}

double cost(const CpFactors& model, const SnapshotPair& data, const Hyperparams& params) {
    return loss(model, data) + tikhonov_penalty(model.U1, model.U2, model.U3, params.eta) +
           smoothing_penalty(params.reg, model.U3);
}

double rmse(const CpFactors& model, const SnapshotPair& data) {
    const double count =
        static_cast<double>(data.state_dim) * static_cast<double>(data.window * data.windows());
    return std::sqrt(sum_squared_residual(model, data) / count);
}

BlockGradients smooth_gradients(const CpFactors& model, const SnapshotPair& data,
                                const Hyperparams& params) {
    check_dims(model, data);
    check_eta(params.eta);
    const Eigen::Index r = model.rank();
    const Eigen::MatrixXd U2t = model.U2.transpose();
    const Eigen::MatrixXd gram1 = model.U1.transpose() * model.U1;

    BlockGradients g;
    Eigen::MatrixXd gram_c = Eigen::MatrixXd::Zero(r, r);
    Eigen::MatrixXd cross1 = Eigen::MatrixXd::Zero(model.state_dim(), r);
    g.U2 = model.U2 / params.eta;
    for (Eigen::Index k = 0; k < data.windows(); ++k) {
        const auto d = model.U3.row(k).transpose().asDiagonal();
        const Eigen::MatrixXd c = d * (U2t * data.X[k]);
        gram_c.noalias() += c * c.transpose();
        cross1.noalias() += data.Y[k] * c.transpose();
        const Eigen::MatrixXd rk = d * gram1 * d;
        g.U2.noalias() += data.X[k] * ((data.X[k].transpose() * model.U2) * rk);
        g.U2.noalias() -= data.X[k] * (data.Y[k].transpose() * model.U1 * d);
    }
    g.U1 = model.U1 * gram_c - cross1 + model.U1 / params.eta;

    const auto q = temporal_quadratic(model, data, params.eta);
    g.U3 = q.gradient(model.U3);
    if (params.reg.kind == Regularizer::Spline)
        g.U3 += params.reg.beta * apply_diff_gram(model.U3);
    return g;
}

Eigen::MatrixXd update_left(const CpFactors& model, const SnapshotPair& data, double eta) {
    check_dims(model, data);
    check_eta(eta);
    const Eigen::Index r = model.rank();
    const Eigen::MatrixXd U2t = model.U2.transpose();

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(r, r);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(model.state_dim(), r);
    for (Eigen::Index k = 0; k < data.windows(); ++k) {
        const Eigen::MatrixXd c = model.U3.row(k).transpose().asDiagonal() * (U2t * data.X[k]);
        gram.noalias() += c * c.transpose();
        rhs.noalias() += data.Y[k] * c.transpose();
    }
    gram.diagonal().array() += 1.0 / eta;

    // U1 * gram = rhs with gram symmetric positive definite.
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorKind::SingularSystem, "left-mode normal equations are not positive definite");
    return llt.solve(rhs.transpose()).transpose();
}

BlockUpdate update_right(const CpFactors& model, const SnapshotPair& data, double eta,
                         int max_iters, double rel_tol) {
    check_dims(model, data);
    check_eta(eta);
    const Eigen::MatrixXd gram1 = model.U1.transpose() * model.U1;
    const Eigen::Index t = data.windows();

    std::vector<Eigen::MatrixXd> right(static_cast<std::size_t>(t));
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(model.input_dim(), model.rank());
    for (Eigen::Index k = 0; k < t; ++k) {
        const auto d = model.U3.row(k).transpose().asDiagonal();
        right[static_cast<std::size_t>(k)] = d * gram1 * d;
        rhs.noalias() += data.X[k] * (data.Y[k].transpose() * model.U1 * d);
    }

    const double damping = 1.0 / eta;
    auto apply = [&](const Eigen::MatrixXd& u) {
        Eigen::MatrixXd out = damping * u;
        for (Eigen::Index k = 0; k < t; ++k)
            out.noalias() += data.X[k] * ((data.X[k].transpose() * u) * right[static_cast<std::size_t>(k)]);
        return out;
    };

    BlockUpdate result{model.U2, 0};
    result.iterations = conjugate_gradient(apply, rhs, result.value, max_iters, rel_tol);
    return result;
}

BlockUpdate update_temporal(const CpFactors& model, const SnapshotPair& data,
                            const Hyperparams& params) {
    check_dims(model, data);
    check_eta(params.eta);
    const auto q = temporal_quadratic(model, data, params.eta);

    if (!params.reg.active()) {
        BlockUpdate result{Eigen::MatrixXd(model.U3.rows(), model.U3.cols()), 0};
        for (Eigen::Index k = 0; k < data.windows(); ++k) {
            const Eigen::LLT<Eigen::MatrixXd> llt(q.H[static_cast<std::size_t>(k)]);
            result.value.row(k) = llt.solve(q.b.row(k).transpose()).transpose();
        }
        return result;
    }

    BlockUpdate result{model.U3, 0};
    if (params.reg.kind == Regularizer::Spline) {
        const double beta = params.reg.beta;
        auto apply = [&](const Eigen::MatrixXd& u) {
            Eigen::MatrixXd out = q.apply(u);
            out.noalias() += beta * apply_diff_gram(u);
            return out;
        };
        result.iterations =
            conjugate_gradient(apply, q.b, result.value, params.cg_max_iters, params.cg_tol);
    } else {
        result.iterations = temporal_tv_fista(q, params.reg.beta, params.pg_max_iters, result.value);
    }
    return result;
}

CpFactors initialize(const SnapshotPair& data, const Hyperparams& params) {
    params.validate();
    const Eigen::Index n = data.state_dim;
    const Eigen::Index n_in = data.input_dim;
    const Eigen::Index t = data.windows();
    const Eigen::Index m = data.window;
    const Eigen::Index r = params.rank;

    Eigen::MatrixXd x(n_in, m * t);
    for (Eigen::Index k = 0; k < t; ++k)
        x.middleCols(k * m, m) = data.X[static_cast<std::size_t>(k)];
    if (x.norm() == 0.0)
        throw Error(ErrorKind::DegenerateData, "predictor snapshots are identically zero");

    // A = Y X^+ is reached only through thin factors; no N x N_in matrix and
    // no second copy of the data is formed. X = Q1 R1 in place and
    // R1 = Ur Sx Vx^T give A = (Y Vx Sx^-1) (Q1 Ur)^T. The N x rank(X) left
    // factor F = Q2 R2 in place with R2 = U' S' V'^T then has left singular
    // vectors Q2 U' and A's right singular vectors are Q1 Ur V'.
    Eigen::HouseholderQR<Eigen::Ref<Eigen::MatrixXd>> qr_x(x);
    const Eigen::Index k1 = std::min(n_in, m * t);
    const Eigen::MatrixXd r1 = x.topRows(k1).triangularView<Eigen::Upper>();
    const Eigen::BDCSVD<Eigen::MatrixXd> svd_x(r1, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sx = svd_x.singularValues();
    const double cutoff = 1e-12 * sx(0);
    Eigen::Index rank_x = 0;
    while (rank_x < sx.size() && sx(rank_x) > cutoff)
        ++rank_x;

    const Eigen::MatrixXd vx = svd_x.matrixV().leftCols(rank_x) * sx.head(rank_x).cwiseInverse().asDiagonal();
    Eigen::MatrixXd left_factor = Eigen::MatrixXd::Zero(n, rank_x);
    for (Eigen::Index k = 0; k < t; ++k)
        left_factor.noalias() += data.Y[static_cast<std::size_t>(k)] * vx.middleRows(k * m, m);
    Eigen::HouseholderQR<Eigen::Ref<Eigen::MatrixXd>> qr_f(left_factor);
    const Eigen::Index k2 = std::min(n, rank_x);
    const Eigen::MatrixXd r2 = left_factor.topRows(k2).triangularView<Eigen::Upper>();
    const Eigen::BDCSVD<Eigen::MatrixXd> svd_a(r2, Eigen::ComputeThinU | Eigen::ComputeThinV);

    const Eigen::Index available = std::min(k2, rank_x);
    const Eigen::Index from_svd = std::min<Eigen::Index>(r, available);
    Eigen::MatrixXd left_modes = Eigen::MatrixXd::Zero(n, from_svd);
    left_modes.topRows(k2) = svd_a.matrixU().leftCols(from_svd);
    qr_f.householderQ().applyThisOnTheLeft(left_modes);
    Eigen::MatrixXd right_modes = Eigen::MatrixXd::Zero(n_in, from_svd);
    right_modes.topRows(k1) = svd_x.matrixU().leftCols(rank_x) * svd_a.matrixV().leftCols(from_svd);
    qr_x.householderQ().applyThisOnTheLeft(right_modes);

    CpFactors init;
    init.affine = data.affine;
    init.U1 = Eigen::MatrixXd::Constant(n, r, 1.0 / std::sqrt(static_cast<double>(n)));
    init.U2 = Eigen::MatrixXd::Constant(n_in, r, 1.0 / std::sqrt(static_cast<double>(n_in)));
    init.U3 = Eigen::MatrixXd::Constant(t, r, 1.0 / std::sqrt(static_cast<double>(t)));
    init.U1.leftCols(from_svd) = left_modes.leftCols(from_svd);
    init.U2.leftCols(from_svd) = right_modes.leftCols(from_svd);

    const double sd1 = params.init_noise_spatial.value_or(0.5 / std::sqrt(static_cast<double>(n)));
    const double sd2 = params.init_noise_spatial.value_or(0.5 / std::sqrt(static_cast<double>(n_in)));
    const double sd3 = params.init_noise_temporal.value_or(0.5 / std::sqrt(static_cast<double>(t)));
    auto engine = make_engine(params.seed, Stream::Init);
    init.U1 += gaussian_matrix(engine, n, r, sd1);
    init.U2 += gaussian_matrix(engine, n_in, r, sd2);
    init.U3 += gaussian_matrix(engine, t, r, sd3);
    return init;
}

std::pair<CpFactors, FitReport> fit(const SnapshotPair& data, const Hyperparams& params,
                                    const FitObserver& observer) {
    return fit_from(initialize(data, params), data, params, observer);
}

std::pair<CpFactors, FitReport> fit_from(CpFactors model, const SnapshotPair& data,
                                         const Hyperparams& params, const FitObserver& observer) {
    params.validate();
    check_dims(model, data);
    const auto started = std::chrono::steady_clock::now();

    FitReport report;
    report.initial_cost = cost(model, data, params);
    double previous = report.initial_cost;

    for (int it = 1; it <= params.max_outer_iters; ++it) {
        if (params.warm_restart && it == params.warm_restart->at_iter + 1) {
            if (params.warm_restart->copy_U1_to_U2)
                model.U2.topRows(std::min(model.state_dim(), model.input_dim())) =
                    model.U1.topRows(std::min(model.state_dim(), model.input_dim()));
            previous = cost(model, data, params);
            report.restart_iteration = it;
        }

        model.U1 = update_left(model, data, params.eta);
        auto right = update_right(model, data, params.eta, params.cg_max_iters, params.cg_tol);
        model.U2 = std::move(right.value);
        auto temporal = update_temporal(model, data, params);
        model.U3 = std::move(temporal.value);

        const double current = cost(model, data, params);
        report.cost_trace.push_back(current);
        report.rmse_trace.push_back(rmse(model, data));
        report.right_cg_iters.push_back(right.iterations);
        report.temporal_iters.push_back(temporal.iterations);
        report.iterations = it;
        if (observer)
            observer(it, current, report.rmse_trace.back());

        const double change = std::abs(current - previous);
        if (previous > 0.0 && change / previous < params.rtol) {
            report.termination = Termination::RelTol;
            break;
        }
        if (change < params.atol) {
            report.termination = Termination::AbsTol;
            break;
        }
        previous = current;
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(model), std::move(report)};
}

} // namespace tvart
