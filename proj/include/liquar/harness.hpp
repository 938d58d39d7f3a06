#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "liquar/engine.hpp"

namespace liquar {

// Realized cost of one cycle: h0 * full workload integral + c(mu) T - p N.
// Untrimmed: regret accounts for real cost, unlike the trimmed estimator.
double cycle_cost(const CycleTrace& trace, double h0, const StaffingCost& cost);

// (duration, realized cost) pairs in operating order; the common currency
// between learning runs and baselines.
struct LedgerRow {
    double duration = 0;
    double cost = 0;
};

struct RegretReport {
    std::vector<double> t;      // cumulative time at block boundaries
    std::vector<double> R;      // cumulative regret
    std::vector<double> R_rel;  // R(t) / (profit* . t)
    std::vector<double> band_lo, band_hi;  // central 80% band (replicate only)
    double f_star = 0;
    double profit_star = 0;
    double slope = 0, intercept = 0;  // log-log fit over the tail
    int excluded_points = 0;          // nonpositive R values dropped from the fit
    int n_runs = 1;
    std::uint64_t seed0 = 0;

    double final_relative_regret() const { return R_rel.empty() ? 0.0 : R_rel.back(); }
    void write_csv(std::ostream& os) const;
};

RegretReport regret_curve(const std::vector<LedgerRow>& ledger, double f_star);

// OLS of log R against log t over the last `fit_fraction` of the log-time
// range; nonpositive regret values are excluded and counted on the report.
std::pair<double, double> loglog_slope(RegretReport& report, double fit_fraction = 0.8);

std::vector<LedgerRow> ledger_of(const RunResult& run);

// Simulate a fixed policy for a long span as chained chunks, returning the
// ledger rows and final workload. Exact for Poisson arrivals; renewal
// arrivals redraw the residual gap at chunk boundaries.
struct SpanResult {
    std::vector<LedgerRow> ledger;
    double w_end = 0;
    std::uint64_t arrivals = 0;
};

SpanResult simulate_span(double w0, Policy policy, double duration, const ArrivalProcess& ap,
                         const UnitDist& service, double h0, const StaffingCost& cost,
                         RngStream& rng, double chunk_length, std::uint64_t cycle_tag_base);

struct ExperimentConfig;  // config.hpp

// n seeded runs (seed0, seed0+1, ...), averaged on the common cycle-boundary
// grid with a pointwise central 80% band. Aggregation is a deterministic
// index-ordered reduction, independent of thread completion order.
RegretReport replicate(const ExperimentConfig& cfg, int n_runs, std::uint64_t seed0, int jobs);

// Per-run distances to a reference optimum, one entry per replication.
std::vector<double> final_distances(const ExperimentConfig& cfg, int n_runs,
                                    std::uint64_t seed0, int jobs, Policy x_star);

}  // namespace liquar
