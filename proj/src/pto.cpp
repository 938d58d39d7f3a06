#include "liquar/pto.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace liquar {

namespace {

constexpr std::uint64_t kPredictionTag = 1ULL << 50;
constexpr std::uint64_t kOptimizationTag = 2ULL << 50;

}  // namespace

PtoResult run_ppto(const ExperimentConfig& cfg, const PtoRun& run, std::uint64_t seed) {
    if (!(run.theta > 0.0 && run.theta < 1.0))
        throw std::invalid_argument("run_ppto: theta must lie in (0,1)");
    if (run.total_time <= 0.0) throw std::invalid_argument("run_ppto: total_time must be positive");
    int n_params = cfg.demand.family == DemandModel::Family::Logit ? 3 : 2;
    if (run.m < n_params)
        throw std::invalid_argument("run_ppto: price grid smaller than the parameter count");
    cfg.validate();

    PtoResult out;
    out.total_time = run.total_time;
    out.exploration_mu = run.mu_explore > 0.0 ? run.mu_explore : cfg.box.midpoint().mu;

    RngStream base(seed, 0);
    const double theta_T = run.theta * run.total_time;
    const double sub = theta_T / run.m;
    double w = cfg.w1;
    double t = 0;

    // prediction: uniform inclusive price grid, capacity fixed, workload carried
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i < run.m; ++i) {
        double p = run.m == 1 ? cfg.box.p_lo
                              : cfg.box.p_lo + (cfg.box.p_hi - cfg.box.p_lo) * i / (run.m - 1);
        Policy pol{out.exploration_mu, p};
        ArrivalProcess ap{cfg.arrival_kind, cfg.interarrival, eval(cfg.demand, p)};
        RngStream prng = base.fork(kPredictionTag + static_cast<std::uint64_t>(i));
        SpanResult span = simulate_span(w, pol, sub, ap, cfg.service, cfg.h0, cfg.cost, prng,
                                        run.chunk_length, 0);
        double cost_sum = 0;
        for (const auto& row : span.ledger) {
            out.ledger.push_back(row);
            cost_sum += row.cost;
        }
        out.phases.push_back({"prediction", t, t + sub, pol.mu, pol.p, cost_sum});
        out.prediction_cost += cost_sum;
        out.probe_prices.push_back(p);
        out.counts.push_back(span.arrivals);
        double n_obs = run.noise_free_counts ? eval(cfg.demand, p) * sub
                                             : static_cast<double>(span.arrivals);
        samples.emplace_back(p, n_obs * run.m / theta_T);
        w = span.w_end;
        t += sub;
    }

    out.fit = fit_least_squares(cfg.demand.family, samples);
    Rect opt_region = Rect::of(cfg.box);
    if (!run.clamp_mu_to_box) {
        opt_region.mu_lo = 0.1;
        opt_region.mu_hi = 3.0 * cfg.box.mu_hi;
    }
    out.x_hat = solve_optimal(out.fit.model, cfg.cost, cfg.h0, cfg.service.scv(), opt_region);

    // optimization: run the remaining horizon at the fitted-model optimum
    const double rest = run.total_time - theta_T;
    ArrivalProcess ap{cfg.arrival_kind, cfg.interarrival, eval(cfg.demand, out.x_hat.x.p)};
    RngStream orng = base.fork(kOptimizationTag);
    SpanResult span = simulate_span(w, out.x_hat.x, rest, ap, cfg.service, cfg.h0, cfg.cost,
                                    orng, run.chunk_length, 0);
    double cost_sum = 0;
    for (const auto& row : span.ledger) {
        out.ledger.push_back(row);
        cost_sum += row.cost;
    }
    out.phases.push_back({"optimization", t, t + rest, out.x_hat.x.mu, out.x_hat.x.p, cost_sum});
    out.optimization_cost = cost_sum;
    return out;
}

std::vector<MisspecRow> sensitivity_misspecification(const DemandModel& demand,
                                                     const StaffingCost& cost, double scv,
                                                     double epsilon,
                                                     const std::vector<double>& h0_list,
                                                     const Rect& search) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("sensitivity: epsilon must lie in (0,1)");
    DemandModel believed = demand.scaled(1.0 - epsilon);

    std::vector<MisspecRow> rows;
    rows.reserve(h0_list.size());
    for (double h0 : h0_list) {
        MisspecRow row;
        row.h0 = h0;
        Optimum star = solve_optimal(demand, cost, h0, scv, search);
        Optimum hat = solve_optimal(believed, cost, h0, scv, search);
        row.x_star = star.x;
        row.x_hat = hat.x;
        row.rho_star = star.rho;

        double lam_true = eval(demand, hat.x.p);
        double lam_bel = eval(believed, hat.x.p);
        row.believed_stable = lam_true < hat.x.mu;
        if (row.believed_stable) {
            double profit_hat = hat.x.p * lam_true -
                                h0 * pk_mean_workload(lam_true, hat.x.mu, scv) -
                                cost(hat.x.mu);
            row.loss = (star.profit - profit_hat) / star.profit;
            double w_true = pk_mean_workload(lam_true, hat.x.mu, scv);
            double w_bel = pk_mean_workload(lam_bel, hat.x.mu, scv);
            row.workload_err = std::abs(w_bel - w_true) / w_true;
        } else {
            // true workload diverges at the believed solution
            row.loss = std::numeric_limits<double>::infinity();
            row.workload_err = 1.0;
        }
        rows.push_back(row);
    }
    return rows;
}

void PtoResult::write_ledger_csv(std::ostream& os) const {
    std::string buf = "phase,t0,t1,mu,p,cost\n";
    char line[192];
    for (const auto& ph : phases) {
        std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      ph.phase.c_str(), ph.t0, ph.t1, ph.mu, ph.p, ph.cost);
        buf += line;
    }
    os << buf;
}

std::string PtoResult::summary_json() const {
    char buf[512];
    const DemandModel& m = fit.model;
    std::snprintf(buf, sizeof(buf),
                  "{\"family\":\"%s\",\"converged\":%s,\"residual\":%.17g,"
                  "\"params\":{\"a\":%.17g,\"b\":%.17g,\"c\":%.17g,\"M0\":%.17g},"
                  "\"x_hat\":{\"mu\":%.17g,\"p\":%.17g},"
                  "\"prediction_cost\":%.17g,\"optimization_cost\":%.17g}",
                  family_name(m.family).c_str(), fit.converged ? "true" : "false",
                  fit.residual, m.a, m.b, m.c, m.M0, x_hat.x.mu, x_hat.x.p,
                  prediction_cost, optimization_cost);
    return buf;
}

}  // namespace liquar
