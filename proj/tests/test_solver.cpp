#include "doctest.h"

#include "oracles.hpp"
#include "tvart/error.hpp"
#include "tvart/solver.hpp"

using namespace tvart;

namespace {

Hyperparams params_with(double eta, Regularizer kind = Regularizer::None, double beta = 0.0) {
    Hyperparams p;
    p.eta = eta;
    p.reg = {kind, beta};
    return p;
}

// Y_k = A_k X_k exactly for the model `truth`.
SnapshotPair exact_data(std::mt19937_64& g, const CpFactors& truth, Eigen::Index m) {
    SnapshotPair d;
    d.window = m;
    d.state_dim = truth.state_dim();
    d.input_dim = truth.input_dim();
    for (Eigen::Index k = 0; k < truth.windows(); ++k) {
        d.X.push_back(oracle::gaussian(g, truth.input_dim(), m));
        d.Y.push_back(slice(truth, k) * d.X.back());
    }
    return d;
}

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

// Differentiable part of the cost as a function of one block.
double smooth_cost(const CpFactors& m, const SnapshotPair& d, const Hyperparams& p) {
    double c = loss(m, d) + tikhonov_penalty(m.U1, m.U2, m.U3, p.eta);
    if (p.reg.kind == Regularizer::Spline)
        c += p.reg.beta * spline_penalty(m.U3);
    return c;
}

} // namespace

TEST_SUITE("solver") {

TEST_CASE("loss of zero data and zero model") {
    auto g = oracle::rng(30);
    auto d = oracle::random_snapshots(g, 3, 3, 4, 2);
    for (auto& y : d.Y)
        y.setZero();
    auto m = oracle::random_factors(g, 3, 3, 2, 2);
    m.U1.setZero();
    CHECK(loss(m, d) == 0.0);
    CHECK(rmse(m, d) == 0.0);
}

TEST_CASE("loss of an exact model") {
    auto g = oracle::rng(31);
    const auto truth = oracle::random_factors(g, 4, 4, 3, 2);
    const auto d = exact_data(g, truth, 5);
    CHECK(loss(truth, d) < 1e-18 * (1.0 + d.Y[0].squaredNorm()));
}

TEST_CASE("loss matches the entrywise oracle and rmse identity") {
    auto g = oracle::rng(32);
    for (int trial = 0; trial < 5; ++trial) {
        const auto d = oracle::random_snapshots(g, 3, 4, 5, 3);
        const auto m = oracle::random_factors(g, 3, 4, 3, 2);
        CHECK(loss(m, d) == doctest::Approx(oracle::entrywise_loss(m, d)).epsilon(1e-12));
        const double r = rmse(m, d);
        CHECK(r * r * 3 * 5 * 3 == doctest::Approx(2.0 * loss(m, d)).epsilon(1e-12));
    }
}

TEST_CASE("dimension mismatch") {
    auto g = oracle::rng(33);
    const auto d = oracle::random_snapshots(g, 3, 3, 4, 2);
    const auto m = oracle::random_factors(g, 3, 4, 2, 2);
    try {
        loss(m, d);
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DimensionMismatch);
    }
}

TEST_CASE("cost decomposition") {
    auto g = oracle::rng(34);
    const auto d = oracle::random_snapshots(g, 3, 3, 4, 5);
    const auto m = oracle::random_factors(g, 3, 3, 5, 2);
    for (auto kind : {Regularizer::None, Regularizer::TV, Regularizer::Spline}) {
        const auto p = params_with(0.7, kind, 2.0);
        const double parts = loss(m, d) + tikhonov_penalty(m.U1, m.U2, m.U3, 0.7) + smoothing_penalty(p.reg, m.U3);
        CHECK(cost(m, d, p) == doctest::Approx(parts).epsilon(1e-12));
        const auto doubled = params_with(0.7, kind, 4.0);
        const double base = loss(m, d) + tikhonov_penalty(m.U1, m.U2, m.U3, 0.7);
        CHECK(cost(m, d, doubled) - base == doctest::Approx(2.0 * (cost(m, d, p) - base)).epsilon(1e-10));
    }
    auto zero = m;
    zero.U1.setZero();
    zero.U2.setZero();
    zero.U3.setZero();
    auto quiet = d;
    for (auto& y : quiet.Y)
        y.setZero();
    CHECK(cost(zero, quiet, params_with(1e12)) == 0.0);
}

TEST_CASE("block gradients match central differences") {
    auto g = oracle::rng(35);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = oracle::uniform_int(g, 2, 6), t = oracle::uniform_int(g, 2, 5),
                           r = oracle::uniform_int(g, 1, 3), m = oracle::uniform_int(g, 1, 4);
        const auto d = oracle::random_snapshots(g, n, n, m, t);
        const auto model = oracle::random_factors(g, n, n, t, r);
        const auto p = params_with(0.5 + trial * 0.1, trial % 2 ? Regularizer::Spline : Regularizer::None, 1.3);
        const auto grad = smooth_gradients(model, d, p);

        auto with = [&](int block) {
            return [&, block](const Eigen::MatrixXd& u) {
                auto copy = model;
                (block == 1 ? copy.U1 : block == 2 ? copy.U2 : copy.U3) = u;
                return smooth_cost(copy, d, p);
            };
        };
        CHECK(relative_error(grad.U1, oracle::numeric_gradient(with(1), model.U1)) < 1e-5);
        CHECK(relative_error(grad.U2, oracle::numeric_gradient(with(2), model.U2)) < 1e-5);
        CHECK(relative_error(grad.U3, oracle::numeric_gradient(with(3), model.U3)) < 1e-5);
    }
}

TEST_CASE("left update is the exact block minimizer") {
    auto g = oracle::rng(36);
    for (int trial = 0; trial < 10; ++trial) {
        const auto d = oracle::random_snapshots(g, 4, 4, 3, 4);
        auto m = oracle::random_factors(g, 4, 4, 4, 2);
        const auto p = params_with(0.8);
        const double before = cost(m, d, p);
        m.U1 = update_left(m, d, p.eta);
        CHECK(cost(m, d, p) <= before);
        CHECK(smooth_gradients(m, d, p).U1.norm() <= 1e-8 * (1.0 + before));
        auto f = [&](const Eigen::MatrixXd& u) {
            auto copy = m;
            copy.U1 = u;
            return smooth_cost(copy, d, p);
        };
        CHECK(oracle::numeric_gradient(f, m.U1).norm() < 1e-6 * (1.0 + before));
    }
}

TEST_CASE("left update recovers planted modes") {
    auto g = oracle::rng(37);
    const auto truth = oracle::random_factors(g, 5, 5, 4, 2);
    const auto d = exact_data(g, truth, 10);
    auto m = truth;
    m.U1 = oracle::gaussian(g, 5, 2);
    CHECK((update_left(m, d, 1e12) - truth.U1).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("right update agrees with the Kronecker system") {
    auto g = oracle::rng(38);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = oracle::uniform_int(g, 2, 8), r = oracle::uniform_int(g, 1, 3),
                           t = oracle::uniform_int(g, 1, 5), m = oracle::uniform_int(g, 1, 6);
        const auto d = oracle::random_snapshots(g, n, n, m, t);
        const auto model = oracle::random_factors(g, n, n, t, r);
        const double eta = 0.3 + 0.2 * trial;
        const auto update = update_right(model, d, eta);
        const auto exact = oracle::kronecker_right_solve(model, d, eta);
        CHECK((update.value - exact).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(update.iterations <= 24);
    }
}

TEST_CASE("right update descends and recovers planted modes") {
    auto g = oracle::rng(39);
    for (int trial = 0; trial < 10; ++trial) {
        const auto d = oracle::random_snapshots(g, 5, 5, 3, 4);
        auto m = oracle::random_factors(g, 5, 5, 4, 3);
        const auto p = params_with(1.5);
        const double before = cost(m, d, p);
        m.U2 = update_right(m, d, p.eta, 3).value; // deliberately truncated
        CHECK(cost(m, d, p) <= before + 1e-8 * (1.0 + before));
    }
    const auto truth = oracle::random_factors(g, 5, 5, 4, 2);
    const auto d = exact_data(g, truth, 10);
    auto m = truth;
    m.U2 = oracle::gaussian(g, 5, 2);
    CHECK((update_right(m, d, 1e12).value - truth.U2).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("temporal update without smoothing matches the Hadamard oracle") {
    auto g = oracle::rng(40);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = oracle::uniform_int(g, 2, 6), r = oracle::uniform_int(g, 1, 3),
                           t = oracle::uniform_int(g, 1, 6);
        const auto d = oracle::random_snapshots(g, n, n, 3, t);
        const auto model = oracle::random_factors(g, n, n, t, r);
        for (auto p : {params_with(0.9), params_with(0.9, Regularizer::TV, 0.0)}) {
            const auto u = update_temporal(model, d, p).value;
            CHECK((u - oracle::hadamard_temporal_solve(model, d, 0.9)).cwiseAbs().maxCoeff() < 1e-10);
            auto after = model;
            after.U3 = u;
            CHECK(smooth_gradients(after, d, p).U3.norm() < 1e-8);
        }
    }
}

TEST_CASE("temporal update with a degenerate window shrinks to zero") {
    auto g = oracle::rng(41);
    auto d = oracle::random_snapshots(g, 3, 3, 4, 3);
    d.X[1].setZero();
    const auto model = oracle::random_factors(g, 3, 3, 3, 2);
    const auto u = update_temporal(model, d, params_with(1.0)).value;
    CHECK(u.row(1).isZero(0.0));
}

TEST_CASE("spline temporal update is the regularized minimizer") {
    auto g = oracle::rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        const auto d = oracle::random_snapshots(g, 3, 3, 4, 6);
        auto m = oracle::random_factors(g, 3, 3, 6, 2);
        auto p = params_with(1.0, Regularizer::Spline, 2.5);
        p.cg_max_iters = 200;
        const double before = cost(m, d, p);
        m.U3 = update_temporal(m, d, p).value;
        CHECK(cost(m, d, p) <= before);
        CHECK(smooth_gradients(m, d, p).U3.norm() < 1e-7 * (1.0 + before));
    }
}

TEST_CASE("TV temporal update descends and saturates") {
    auto g = oracle::rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const auto d = oracle::random_snapshots(g, 3, 3, 4, 7);
        auto m = oracle::random_factors(g, 3, 3, 7, 2);
        const auto p = params_with(1.0, Regularizer::TV, 0.7);
        const double before = cost(m, d, p);
        m.U3 = update_temporal(m, d, p).value;
        CHECK(cost(m, d, p) <= before + 1e-8 * (1.0 + before));
    }
    const auto d = oracle::random_snapshots(g, 3, 3, 4, 6);
    const auto m = oracle::random_factors(g, 3, 3, 6, 2);
    auto p = params_with(1.0, Regularizer::TV, 1e6);
    p.pg_max_iters = 400;
    const auto u = update_temporal(m, d, p).value;
    for (Eigen::Index r = 0; r < 2; ++r)
        CHECK(u.col(r).maxCoeff() - u.col(r).minCoeff() < 1e-6);
    // Constant columns c minimize sum_k 0.5 c^T H_k c - b_k^T c.
    auto constant = m;
    constant.U3 = u;
    const auto grad = smooth_gradients(constant, d, params_with(1.0)).U3;
    CHECK(grad.colwise().sum().norm() < 1e-5 * (1.0 + grad.norm()));
}

TEST_CASE("initialization") {
    auto g = oracle::rng(44);
    const auto d = oracle::random_snapshots(g, 4, 4, 5, 3);
    auto p = params_with(1.0);
    p.rank = 4;
    p.init_noise_spatial = 0.0;
    p.init_noise_temporal = 0.0;
    const auto m = initialize(d, p);
    CHECK((m.U1.transpose() * m.U1 - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((m.U2.transpose() * m.U2 - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((m.U3.array() == 1.0 / std::sqrt(3.0)).all());
    for (Eigen::Index r = 0; r < 4; ++r)
        CHECK(m.U3.col(r).norm() == doctest::Approx(1.0));

    // The leading components reproduce the global least-squares fit.
    const auto [x, y] = concatenate_windows(d);
    const Eigen::MatrixXd a = y * x.transpose() * (x * x.transpose()).inverse();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    Eigen::MatrixXd recon = Eigen::MatrixXd::Zero(4, 4);
    for (Eigen::Index r = 0; r < 4; ++r)
        recon += svd.singularValues()(r) * m.U1.col(r) * m.U2.col(r).transpose();
    CHECK((recon - a).norm() < 1e-10 * a.norm());

    SUBCASE("padding beyond the data rank") {
        p.rank = 6;
        const auto wide = initialize(d, p);
        CHECK((wide.U1.col(5).array() == 0.5).all());
        CHECK((wide.U2.col(4).array() == 0.5).all());
    }
    SUBCASE("seeded noise is reproducible") {
        auto q = params_with(1.0);
        q.rank = 2;
        q.seed = 99;
        const auto a1 = initialize(d, q);
        const auto a2 = initialize(d, q);
        CHECK(a1.U1 == a2.U1);
        CHECK(a1.U2 == a2.U2);
        CHECK(a1.U3 == a2.U3);
        q.seed = 100;
        CHECK(initialize(d, q).U1 != a1.U1);
    }
    SUBCASE("zero predictors") {
        auto zero = d;
        for (auto& xk : zero.X)
            xk.setZero();
        try {
            initialize(zero, p);
            FAIL("expected DegenerateData");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::DegenerateData);
        }
    }
}

TEST_CASE("initialization noise levels") {
    auto g = oracle::rng(45);
    const auto d = oracle::random_snapshots(g, 40, 40, 30, 50);
    auto p = params_with(1.0);
    p.rank = 30;
    auto quiet = p;
    quiet.init_noise_spatial = 0.0;
    quiet.init_noise_temporal = 0.0;
    const auto noisy = initialize(d, p);
    const auto clean = initialize(d, quiet);
    const auto sd = [](const Eigen::MatrixXd& m) { return std::sqrt(m.squaredNorm() / static_cast<double>(m.size())); };
    CHECK(sd(noisy.U1 - clean.U1) == doctest::Approx(0.5 / std::sqrt(40.0)).epsilon(0.05));
    CHECK(sd(noisy.U3 - clean.U3) == doctest::Approx(0.5 / std::sqrt(50.0)).epsilon(0.05));
}

TEST_CASE("hyperparameter validation") {
    Hyperparams p;
    CHECK_NOTHROW(p.validate());
    p.rank = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.eta = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.reg = {Regularizer::TV, -1.0};
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.warm_restart = WarmRestart{0, true};
    CHECK_THROWS_AS(p.validate(), Error);
    CHECK(Hyperparams{}.rtol == 1e-4);
    CHECK(Hyperparams{}.atol == 1e-6);
    CHECK(Hyperparams{}.cg_max_iters == 24);
    CHECK(Hyperparams{}.pg_max_iters == 40);
}

TEST_CASE("planted stationary rank-one model is recovered") {
    auto g = oracle::rng(46);
    CpFactors truth;
    truth.U1 = oracle::gaussian(g, 4, 1);
    truth.U2 = oracle::gaussian(g, 4, 1);
    truth.U3 = Eigen::MatrixXd::Ones(5, 1);
    const auto d = exact_data(g, truth, 6);
    auto p = params_with(1e6);
    p.rank = 1;
    const auto [model, report] = fit(d, p);
    CHECK(rmse(model, d) <= 1e-3);
    CHECK(report.iterations >= 1);
}

TEST_CASE("fit descends, stops on tolerance and is deterministic") {
    auto g = oracle::rng(47);
    for (int trial = 0; trial < 6; ++trial) {
        const auto d = oracle::random_snapshots(g, 5, 5, 4, 6);
        auto p = params_with(1.0, trial % 3 == 0 ? Regularizer::None : trial % 3 == 1 ? Regularizer::TV : Regularizer::Spline,
                             0.5);
        p.rank = 2;
        p.seed = static_cast<std::uint64_t>(trial);
        const auto [model, report] = fit(d, p);
        double previous = report.initial_cost;
        for (double c : report.cost_trace) {
            CHECK(c <= previous + 1e-8 * (1.0 + std::abs(previous)));
            previous = c;
        }
        CHECK(report.cost_trace.size() == static_cast<std::size_t>(report.iterations));
        CHECK(report.rmse_trace.size() == static_cast<std::size_t>(report.iterations));
        CHECK(report.cost_trace.back() == doctest::Approx(cost(model, d, p)).epsilon(1e-12));
        if (report.termination != Termination::MaxIters) {
            const double last = report.cost_trace.back();
            const double before = report.iterations > 1 ? report.cost_trace[report.cost_trace.size() - 2]
                                                        : report.initial_cost;
            CHECK((std::abs(last - before) < p.rtol * before || std::abs(last - before) < p.atol));
        }
        const auto [again, again_report] = fit(d, p);
        CHECK(again_report.cost_trace == report.cost_trace);
        CHECK(again.U3 == model.U3);
    }
}

TEST_CASE("iteration cap and observer") {
    auto g = oracle::rng(48);
    const auto d = oracle::random_snapshots(g, 4, 4, 3, 4);
    auto p = params_with(1.0);
    p.rank = 2;
    p.max_outer_iters = 3;
    p.rtol = 0.0;
    p.atol = 0.0;
    std::vector<int> seen;
    const auto [model, report] = fit(d, p, [&](int it, double c, double r) {
        seen.push_back(it);
        CHECK(c > 0.0);
        CHECK(r > 0.0);
    });
    CHECK(report.iterations == 3);
    CHECK(report.termination == Termination::MaxIters);
    CHECK(seen == std::vector<int>{1, 2, 3});
    CHECK(to_string(Termination::RelTol) == "rtol");
}

TEST_CASE("warm restart copies the left modes") {
    auto g = oracle::rng(49);
    const auto d = oracle::random_snapshots(g, 4, 4, 3, 4);
    auto p = params_with(1.0);
    p.rank = 2;
    p.rtol = 0.0;
    p.atol = 0.0;
    p.max_outer_iters = 2;
    const auto [two, r2] = fit(d, p);
    p.max_outer_iters = 4;
    p.warm_restart = WarmRestart{2, true};
    const auto [four, r4] = fit(d, p);
    REQUIRE(r4.restart_iteration.has_value());
    CHECK(*r4.restart_iteration == 3);
    CHECK(r4.cost_trace[0] == r2.cost_trace[0]);
    CHECK(r4.cost_trace[1] == r2.cost_trace[1]);
    auto restarted = two;
    restarted.U2 = two.U1;
    CHECK(fit_from(restarted, d, [&] { auto q = p; q.warm_restart.reset(); q.max_outer_iters = 2; return q; }())
              .second.cost_trace == std::vector<double>(r4.cost_trace.begin() + 2, r4.cost_trace.end()));
}

TEST_CASE("scaling the data scales the unregularized loss quadratically") {
    auto g = oracle::rng(50);
    auto d = oracle::random_snapshots(g, 3, 3, 4, 3);
    const auto m = oracle::random_factors(g, 3, 3, 3, 2);
    const double base = loss(m, d);
    for (auto& y : d.Y)
        y *= 3.0;
    auto scaled = m;
    scaled.U1 *= 3.0;
    CHECK(loss(scaled, d) == doctest::Approx(9.0 * base).epsilon(1e-12));
}

TEST_CASE("affine and lagged fits run end to end") {
    auto g = oracle::rng(51);
    TimeSeries s;
    s.values = oracle::gaussian(g, 3, 41);
    const auto d = build_snapshots(s, 5, 2, true);
    auto p = params_with(1.0, Regularizer::TV, 0.2);
    p.rank = 2;
    const auto [model, report] = fit(d, p);
    CHECK(model.input_dim() == 7);
    CHECK(model.affine);
    CHECK(report.iterations >= 1);
}

} // TEST_SUITE
