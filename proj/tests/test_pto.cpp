#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "liquar/pto.hpp"

using namespace liquar;

namespace {

ExperimentConfig light_config() {
    ExperimentConfig cfg = preset("pto-6.3-light")[0];
    return cfg;
}

}  // namespace

TEST_CASE("noise-free counts recover the true optimum") {
    ExperimentConfig cfg = light_config();
    PtoRun run;
    run.theta = 0.15;
    run.m = 4;
    run.total_time = 40000;
    run.noise_free_counts = true;
    run.chunk_length = 5000;
    PtoResult res = run_ppto(cfg, run, 3);
    CHECK(res.fit.converged);
    CHECK(res.fit.model.M0 == doctest::Approx(10.0).epsilon(1e-5));
    CHECK(res.fit.model.a == doctest::Approx(4.1).epsilon(1e-5));
    CHECK(res.fit.model.b == doctest::Approx(1.0).epsilon(1e-5));
    Optimum truth = solve_optimal(cfg.demand, cfg.cost, cfg.h0, 1.0, Rect::of(cfg.box));
    CHECK(res.x_hat.x.mu == doctest::Approx(truth.x.mu).epsilon(1e-4));
    CHECK(res.x_hat.x.p == doctest::Approx(truth.x.p).epsilon(1e-4));
}

TEST_CASE("cost accounting identity and ledger structure") {
    ExperimentConfig cfg = light_config();
    PtoRun run;
    run.theta = 0.1;
    run.m = 3;
    run.total_time = 20000;
    run.chunk_length = 1500;
    PtoResult res = run_ppto(cfg, run, 17);

    double ledger_total = 0;
    for (const auto& row : res.ledger) ledger_total += row.cost;
    CHECK(ledger_total ==
          doctest::Approx(res.prediction_cost + res.optimization_cost).epsilon(1e-12));

    double ledger_time = 0;
    for (const auto& row : res.ledger) ledger_time += row.duration;
    CHECK(ledger_time == doctest::Approx(run.total_time).epsilon(1e-12));

    REQUIRE(res.phases.size() == 4);  // 3 prediction sub-phases + 1 optimization
    CHECK(res.phases.back().phase == "optimization");
    CHECK(res.probe_prices.front() == doctest::Approx(cfg.box.p_lo));
    CHECK(res.probe_prices.back() == doctest::Approx(cfg.box.p_hi));
}

TEST_CASE("abundant exploration lands near the true optimum") {
    ExperimentConfig cfg = light_config();
    PtoRun run;
    run.theta = 0.15;
    run.m = 4;
    run.total_time = 400000;
    run.chunk_length = 20000;
    PtoResult res = run_ppto(cfg, run, 5);
    CHECK(std::abs(res.x_hat.x.mu - 8.18) < 0.35);
    CHECK(std::abs(res.x_hat.x.p - 3.79) < 0.25);
}

TEST_CASE("prediction per-time regret exceeds optimization per-time regret") {
    ExperimentConfig cfg = light_config();
    Optimum star = solve_optimal(cfg.demand, cfg.cost, cfg.h0, 1.0, Rect::of(cfg.box));
    for (double theta : {0.05, 0.15}) {
        PtoRun run;
        run.theta = theta;
        run.m = 3;
        run.total_time = 200000;
        PtoResult res = run_ppto(cfg, run, 23);
        double pred_time = theta * run.total_time;
        double opt_time = run.total_time - pred_time;
        double pred_rate = res.prediction_cost / pred_time - star.f;
        double opt_rate = res.optimization_cost / opt_time - star.f;
        CHECK(pred_rate > opt_rate);
    }
}

TEST_CASE("matched seeds: larger theta weakly improves the fitted curve") {
    ExperimentConfig cfg = light_config();
    const double thetas[] = {0.003, 0.06, 0.15};
    double mean_sup[3] = {0, 0, 0};
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        for (int i = 0; i < 3; ++i) {
            PtoRun run;
            run.theta = thetas[i];
            run.m = 3;
            run.total_time = 150000;
            run.chunk_length = 10000;
            PtoResult res = run_ppto(cfg, run, 1000 + s);
            double sup = 0;
            for (double p = cfg.box.p_lo; p <= cfg.box.p_hi; p += 0.05)
                sup = std::max(sup,
                               std::abs(eval(res.fit.model, p) - eval(cfg.demand, p)));
            mean_sup[i] += sup / seeds;
        }
    }
    CHECK(mean_sup[2] < mean_sup[1]);
    CHECK(mean_sup[1] < mean_sup[0]);
}

TEST_CASE("pto input validation") {
    ExperimentConfig cfg = light_config();
    PtoRun run;
    run.total_time = 1000;
    run.theta = 0.0;
    CHECK_THROWS_AS(run_ppto(cfg, run, 1), std::invalid_argument);
    run.theta = 0.1;
    run.m = 2;  // logit needs three parameters
    CHECK_THROWS_AS(run_ppto(cfg, run, 1), std::invalid_argument);
}

TEST_CASE("misspecification: zero epsilon edge and monotone blow-up") {
    DemandModel demand = DemandModel::logit(10, 4.1, 1);
    StaffingCost cost{};
    Rect wide{0.5, 25.0, 0.5, 10.0};
    std::vector<double> h0s{1.0, 0.1, 0.05, 0.03, 0.022, 7.1e-4};

    auto rows = sensitivity_misspecification(demand, cost, 1.0, 1e-9, h0s, wide);
    for (const auto& r : rows) CHECK(std::abs(r.loss) < 1e-6);

    rows = sensitivity_misspecification(demand, cost, 1.0, 0.05, h0s, wide);
    REQUIRE(rows.size() == h0s.size());
    CHECK(rows.front().rho_star == doctest::Approx(0.706).epsilon(2e-3));
    CHECK(rows.front().loss < 0.02);  // light traffic: below 2%
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].rho_star > rows[i - 1].rho_star);
        CHECK(rows[i].loss > rows[i - 1].loss);
        CHECK(rows[i].workload_err >= rows[i - 1].workload_err - 1e-9);
    }
    // at rho* near 1 a 5% underestimate destabilizes the true queue
    CHECK_FALSE(rows.back().believed_stable);
    CHECK(std::isinf(rows.back().loss));
    CHECK(rows.back().rho_star > 0.98);
}
