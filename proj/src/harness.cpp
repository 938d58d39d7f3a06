#include "liquar/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <ostream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "liquar/analytic.hpp"
#include "liquar/config.hpp"

namespace liquar {

double cycle_cost(const CycleTrace& trace, double h0, const StaffingCost& cost) {
    return h0 * workload_integral(trace, 0.0, trace.duration) +
           cost(trace.policy.mu) * trace.duration -
           trace.policy.p * static_cast<double>(trace.n_arrivals());
}

std::vector<LedgerRow> ledger_of(const RunResult& run) {
    std::vector<LedgerRow> rows;
    rows.reserve(run.cycles.size());
    for (const auto& c : run.cycles) rows.push_back({c.T, c.cost});
    return rows;
}

RegretReport regret_curve(const std::vector<LedgerRow>& ledger, double f_star) {
    RegretReport rep;
    rep.f_star = f_star;
    rep.profit_star = -f_star;
    rep.t.reserve(ledger.size());
    rep.R.reserve(ledger.size());
    double t = 0, R = 0;
    for (const auto& row : ledger) {
        t += row.duration;
        R += row.cost - row.duration * f_star;
        rep.t.push_back(t);
        rep.R.push_back(R);
        rep.R_rel.push_back(R / (rep.profit_star * t));
    }
    if (rep.t.size() >= 2) {
        try {
            auto [s, b] = loglog_slope(rep);
            rep.slope = s;
            rep.intercept = b;
        } catch (const std::invalid_argument&) {
            rep.slope = std::numeric_limits<double>::quiet_NaN();
            rep.intercept = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return rep;
}

std::pair<double, double> loglog_slope(RegretReport& report, double fit_fraction) {
    if (report.t.size() < 2) throw std::invalid_argument("loglog_slope: need at least two points");
    double lt0 = std::log(report.t.front());
    double lt1 = std::log(report.t.back());
    double cut = lt1 - fit_fraction * (lt1 - lt0);

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0, excluded = 0;
    for (std::size_t i = 0; i < report.t.size(); ++i) {
        double lt = std::log(report.t[i]);
        if (lt < cut) continue;
        if (report.R[i] <= 0.0) {
            ++excluded;
            continue;
        }
        double ly = std::log(report.R[i]);
        sx += lt;
        sy += ly;
        sxx += lt * lt;
        sxy += lt * ly;
        ++n;
    }
    report.excluded_points = excluded;
    if (n < 2) throw std::invalid_argument("loglog_slope: fewer than two positive points in range");
    double denom = n * sxx - sx * sx;
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    return {slope, intercept};
}

SpanResult simulate_span(double w0, Policy policy, double duration, const ArrivalProcess& ap,
                         const UnitDist& service, double h0, const StaffingCost& cost,
                         RngStream& rng, double chunk_length, std::uint64_t cycle_tag_base) {
    SpanResult out;
    double w = w0;
    double done = 0;
    std::uint64_t chunk = 0;
    while (done < duration) {
        double len = std::min(chunk_length, duration - done);
        RngStream crng = rng.fork(cycle_tag_base + chunk);
        CycleTrace trace = simulate_cycle(w, policy, len, ap, service, crng);
        out.ledger.push_back({len, cycle_cost(trace, h0, cost)});
        out.arrivals += trace.n_arrivals();
        w = trace.w_end;
        done += len;
        ++chunk;
    }
    out.w_end = w;
    return out;
}

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front() * (x / xs.front());  // curves start at (0,0)
    if (x >= xs.back()) return ys.back();
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    std::size_t lo = hi - 1;
    double f = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + f * (ys[hi] - ys[lo]);
}

template <class Fn>
void parallel_for(int n, int jobs, Fn&& body) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += jobs) body(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

RegretReport replicate(const ExperimentConfig& cfg, int n_runs, std::uint64_t seed0, int jobs) {
    if (n_runs < 1) throw std::invalid_argument("replicate: need at least one run");
    cfg.validate();
    Optimum star;
    if (cfg.arrival_kind == ArrivalProcess::Kind::Poisson) {
        star = solve_optimal(cfg.demand, cfg.cost, cfg.h0, cfg.service.scv(),
                             Rect::of(cfg.box));
    } else {
        star = solve_optimal_gim1(cfg.demand, cfg.cost, cfg.h0, cfg.interarrival,
                                  Rect::of(cfg.box));
    }

    std::vector<RegretReport> runs(n_runs);
    std::mutex err_mu;
    std::string failure;
    parallel_for(n_runs, jobs, [&](int i) {
        try {
            RunResult r = run_liquar(cfg.engine(), seed0 + static_cast<std::uint64_t>(i));
            runs[i] = regret_curve(ledger_of(r), star.f);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (failure.empty())
                failure = "replicate: run with seed " +
                          std::to_string(seed0 + static_cast<std::uint64_t>(i)) +
                          " failed: " + e.what();
        }
    });
    if (!failure.empty()) throw std::runtime_error(failure);

    // common grid = first run's cycle boundaries (equal schedules across runs)
    RegretReport out;
    out.f_star = star.f;
    out.profit_star = star.profit;
    out.n_runs = n_runs;
    out.seed0 = seed0;
    out.t = runs[0].t;
    out.R.resize(out.t.size());
    out.R_rel.resize(out.t.size());
    out.band_lo.resize(out.t.size());
    out.band_hi.resize(out.t.size());
    std::vector<double> vals(n_runs);
    for (std::size_t j = 0; j < out.t.size(); ++j) {
        for (int i = 0; i < n_runs; ++i) vals[i] = interp(runs[i].t, runs[i].R, out.t[j]);
        std::sort(vals.begin(), vals.end());
        double mean = 0;
        for (double v : vals) mean += v;
        mean /= n_runs;
        out.R[j] = mean;
        out.R_rel[j] = mean / (out.profit_star * out.t[j]);
        // central 80%: 10th/90th percentile, linear interpolation on order stats
        auto quantile = [&](double q) {
            double pos = q * (n_runs - 1);
            std::size_t lo = static_cast<std::size_t>(pos);
            std::size_t hi = std::min(lo + 1, static_cast<std::size_t>(n_runs - 1));
            double f = pos - static_cast<double>(lo);
            return vals[lo] + f * (vals[hi] - vals[lo]);
        };
        out.band_lo[j] = quantile(0.1);
        out.band_hi[j] = quantile(0.9);
    }
    try {
        auto [s, b] = loglog_slope(out);
        out.slope = s;
        out.intercept = b;
    } catch (const std::invalid_argument&) {
        out.slope = std::numeric_limits<double>::quiet_NaN();
        out.intercept = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

std::vector<double> final_distances(const ExperimentConfig& cfg, int n_runs,
                                    std::uint64_t seed0, int jobs, Policy x_star) {
    std::vector<double> out(n_runs);
    parallel_for(n_runs, jobs, [&](int i) {
        RunResult r = run_liquar(cfg.engine(), seed0 + static_cast<std::uint64_t>(i));
        out[i] = std::hypot(r.final_policy.mu - x_star.mu, r.final_policy.p - x_star.p);
    });
    return out;
}

void RegretReport::write_csv(std::ostream& os) const {
    std::string buf;
    buf.reserve(t.size() * 64 + 64);
    bool banded = band_lo.size() == t.size();
    buf += banded ? "time,mean_regret,band_lo,band_hi\n" : "time,regret,relative_regret\n";
    char line[160];
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (banded)
            std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", t[i], R[i],
                          band_lo[i], band_hi[i]);
        else
            std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", t[i], R[i], R_rel[i]);
        buf += line;
    }
    os << buf;
}

}  // namespace liquar
