#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "liquar/analytic.hpp"
#include "liquar/config.hpp"
#include "liquar/engine.hpp"
#include "liquar/harness.hpp"

using namespace liquar;

namespace {

EngineConfig small_config(int L = 40, double cT = 20.0) {
    ExperimentConfig cfg = preset("base-6.1-desk")[0];
    cfg.schedule.L = L;
    cfg.schedule.c_T = cT;
    return cfg.engine();
}

}  // namespace

TEST_CASE("direction draws: seeded determinism, frequencies, mean") {
    RngStream a(5, 1), b(5, 1);
    for (int i = 0; i < 50; ++i) {
        Eigen::Vector2d za = draw_direction(a), zb = draw_direction(b);
        CHECK(za == zb);
    }
    RngStream rng(77, 2);
    int mu_side = 0;
    const int n = 100000;
    Eigen::Vector2d mean(0, 0);
    for (int i = 0; i < n; ++i) {
        Eigen::Vector2d z = draw_direction(rng);
        mu_side += z[0] != 0.0;
        mean += z / n;
    }
    CHECK(std::abs(mu_side / double(n) - 0.5) < 0.01);
    CHECK(std::abs(mean[0] - 1.0) < 0.01);
    CHECK(std::abs(mean[1] - 1.0) < 0.01);
}

TEST_CASE("performance estimator on scripted traces") {
    // empty cycle: fhat = c(mu)
    CycleTrace empty = build_trace(0.0, {2.0, 1.5}, 5.0, {});
    StaffingCost cost{1.0};
    CHECK(estimate_performance(empty, 0.1, 1.0, cost) == doctest::Approx(2.0));

    // two-segment example, alpha=0, h0=1, c0=0, p=1: -1/2 + 0.5/2 = -0.25
    CycleTrace t = build_trace(1.0, {2.0, 1.0}, 2.0, {{1.0, 1.0}});
    StaffingCost zero{0.0};
    CHECK(estimate_performance(t, 0.0, 1.0, zero) == doctest::Approx(-0.25));

    CHECK_THROWS_AS(estimate_performance(t, 0.5, 1.0, zero), std::invalid_argument);
}

TEST_CASE("long-cycle estimator is consistent with the analytic objective") {
    // m/m/1 at a fixed stable policy, T = 1e5, alpha = 0.1
    const Policy x{1.0, 2.0};
    const double lambda = 0.7;
    RngStream rng(55);
    ArrivalProcess ap = ArrivalProcess::poisson(lambda);
    CycleTrace t = simulate_cycle(0.0, x, 1e6, ap, UnitDist::exponential(), rng);
    StaffingCost cost{1.0};
    double fhat = estimate_performance(t, 0.1, 1.0, cost);
    double f = 1.0 * pk_mean_workload(lambda, x.mu, 1.0) + cost(x.mu) - x.p * lambda;
    CHECK(std::abs(fhat - f) / std::abs(f) < 0.02);
}

TEST_CASE("fd gradient hand values") {
    CHECK(fd_gradient(1.0, 1.0, {2, 0}, 0.1) == Eigen::Vector2d(0, 0));
    // quadratic f = mu^2 + p^2 at (1,1), delta 0.1, Z=(2,0):
    // f(1.1,1)-f(0.9,1) = 0.4 -> H = (8, 0)
    double fm = 0.9 * 0.9 + 1.0, fp = 1.1 * 1.1 + 1.0;
    Eigen::Vector2d H = fd_gradient(fm, fp, {2, 0}, 0.1);
    CHECK(H[0] == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(H[1] == 0.0);
    CHECK_THROWS_AS(fd_gradient(0, 1, {2, 0}, 0.0), std::invalid_argument);
}

TEST_CASE("enumerated-z mean of fd gradient is exactly 2*grad on quadratics") {
    auto f = [](Policy x) { return x.mu * x.mu + x.p * x.p; };
    Policy xbar{1.0, 1.0};
    double delta = 0.1;
    Eigen::Vector2d sum(0, 0);
    for (auto z : {Eigen::Vector2d(2, 0), Eigen::Vector2d(0, 2)}) {
        Policy lo{xbar.mu - delta * z[0] / 2, xbar.p - delta * z[1] / 2};
        Policy hi{xbar.mu + delta * z[0] / 2, xbar.p + delta * z[1] / 2};
        sum += fd_gradient(f(lo), f(hi), z, delta);
    }
    Eigen::Vector2d mean = sum / 2;
    CHECK(std::abs(mean[0] - 4.0) < 1e-10);  // 2 * df/dmu = 4
    CHECK(std::abs(mean[1] - 4.0) < 1e-10);
}

TEST_CASE("fd error on the analytic objective decays at second order in delta") {
    const DemandModel demand = DemandModel::logit(10, 4.1, 1);
    const StaffingCost cost{};
    Policy xbar{8.0, 4.5};
    Eigen::Vector2d g = grad_f(xbar, demand, cost, 1.0, 1.0);
    auto f = [&](Policy x) { return objective_f(x, demand, cost, 1.0, 1.0); };

    std::vector<double> deltas, errs;
    double delta = 0.4;
    for (int i = 0; i < 5; ++i) {
        Eigen::Vector2d sum(0, 0);
        for (auto z : {Eigen::Vector2d(2, 0), Eigen::Vector2d(0, 2)}) {
            Policy lo{xbar.mu - delta * z[0] / 2, xbar.p - delta * z[1] / 2};
            Policy hi{xbar.mu + delta * z[0] / 2, xbar.p + delta * z[1] / 2};
            sum += fd_gradient(f(lo), f(hi), z, delta);
        }
        Eigen::Vector2d err = sum / 2 / 2 - g;  // mean over Z is 2 grad + O(delta^2)
        deltas.push_back(std::log(delta));
        errs.push_back(std::log(err.norm()));
        delta /= 2;
    }
    // least squares slope of log err against log delta
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = static_cast<int>(deltas.size());
    for (int i = 0; i < n; ++i) {
        sx += deltas[i];
        sy += errs[i];
        sxx += deltas[i] * deltas[i];
        sxy += deltas[i] * errs[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.15));  // 2.0 +- 0.3
}

TEST_CASE("sgd update clamps componentwise") {
    FeasibleBox box{6.5, 10, 3.5, 7};
    Policy x{8, 5};
    CHECK(sgd_update(x, {0, 0}, 1.0, box).mu == doctest::Approx(8.0));
    Policy out = sgd_update(x, {100, -100}, 1.0, box);
    CHECK(out.mu == doctest::Approx(6.5));
    CHECK(out.p == doctest::Approx(7.0));
    Policy in = sgd_update(x, {1.0, -0.5}, 0.1, box);
    CHECK(in.mu == doctest::Approx(7.9));
    CHECK(in.p == doctest::Approx(5.05));
}

TEST_CASE("degenerate schedule eta=0 freezes the decision") {
    EngineConfig cfg = small_config(15, 10.0);
    cfg.schedule.c_eta = 0.0;
    RunResult r = run_liquar(cfg, 9);
    for (const auto& rec : r.iterations) {
        CHECK(rec.xbar.mu == cfg.x1.mu);
        CHECK(rec.xbar.p == cfg.x1.p);
    }
}

TEST_CASE("cycle chaining is exact and perturbed policies stay feasible") {
    EngineConfig cfg = small_config(30, 15.0);
    RunResult r = run_liquar(cfg, 12);
    REQUIRE(r.cycles.size() == 60);
    for (std::size_t i = 1; i < r.cycles.size(); ++i)
        CHECK(r.cycles[i].w0 == r.cycles[i - 1].w_end);
    for (const auto& rec : r.iterations) {
        CHECK(cfg.box.contains(rec.x_minus));
        CHECK(cfg.box.contains(rec.x_plus));
        CHECK(cfg.box.contains(rec.xnext));
    }
}

TEST_CASE("same seed gives byte-identical serialized runs") {
    EngineConfig cfg = small_config(20, 10.0);
    RunResult a = run_liquar(cfg, 4242);
    RunResult b = run_liquar(cfg, 4242);
    std::ostringstream ca, cb, ia, ib;
    a.write_cycles_csv(ca);
    b.write_cycles_csv(cb);
    a.write_iterations_csv(ia);
    b.write_iterations_csv(ib);
    CHECK(ca.str() == cb.str());
    CHECK(ia.str() == ib.str());
    CHECK(ca.str().find("k,l,mu,p,T") == 0);

    RunResult c = run_liquar(cfg, 4243);
    std::ostringstream cc;
    c.write_cycles_csv(cc);
    CHECK(ca.str() != cc.str());
}

TEST_CASE("median distance to the optimum shrinks from k=20 to k=200") {
    ExperimentConfig cfg = preset("base-6.1-desk")[0];
    cfg.schedule.L = 200;
    Optimum star = solve_optimal(cfg.demand, cfg.cost, cfg.h0, cfg.service.scv(),
                                 Rect::of(cfg.box));
    std::vector<double> d20, d200;
    for (int rep = 0; rep < 20; ++rep) {
        RunResult r = run_liquar(cfg.engine(), 100 + rep);
        auto dist = [&](const Policy& x) {
            return std::hypot(x.mu - star.x.mu, x.p - star.x.p);
        };
        d20.push_back(dist(r.iterations[19].xnext));
        d200.push_back(dist(r.iterations[199].xnext));
    }
    std::sort(d20.begin(), d20.end());
    std::sort(d200.begin(), d200.end());
    CHECK(d200[10] < d20[10]);
}
