#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "liquar/analytic.hpp"
#include "liquar/config.hpp"
#include "liquar/harness.hpp"

namespace liquar {

struct PhaseEntry {
    std::string phase;  // "prediction" | "optimization"
    double t0 = 0, t1 = 0;
    double mu = 0, p = 0;
    double cost = 0;
};

struct PtoResult {
    FitResult fit;
    Optimum x_hat;                    // optimum of the fitted model on the box
    std::vector<double> probe_prices;
    std::vector<std::uint64_t> counts;  // arrivals per exploration sub-phase
    std::vector<PhaseEntry> phases;
    std::vector<LedgerRow> ledger;    // (duration, cost) in operating order
    double exploration_mu = 0;
    double prediction_cost = 0;
    double optimization_cost = 0;
    double total_time = 0;

    void write_ledger_csv(std::ostream& os) const;
    std::string summary_json() const;
};

struct PtoRun {
    double theta = 0.15;      // exploration ratio in (0,1)
    int m = 3;                // uniform price grid size, >= #parameters
    double total_time = 0;
    double mu_explore = 0;    // 0 = box midpoint
    double chunk_length = 20000;
    bool noise_free_counts = false;  // replace N_k by exact lambda(p_k) theta T / m
    // The optimization step solves the deterministic PK problem of the
    // fitted model: price on the explored interval, capacity free above
    // stability. A fitted model that underestimates demand can therefore
    // prescribe a capacity the true queue overruns; the realized ledger
    // carries that cost.
    bool clamp_mu_to_box = false;
};

// Prediction phase (uniform price grid at fixed exploration capacity,
// workload carried across sub-phases), least-squares fit of the demand
// parameters from the observed rates, then operation at the fitted-model
// optimum for the remaining time.
PtoResult run_ppto(const ExperimentConfig& cfg, const PtoRun& run, std::uint64_t seed);

// Analytic misspecification study: for each h0, the true optimum and the
// optimum under the deflated demand (1-epsilon) lambda are solved without a
// stability floor, both evaluated under the true model. A believed solution
// that destabilizes the true queue has unbounded loss (reported as inf).
struct MisspecRow {
    double h0 = 0;
    double rho_star = 0;
    double loss = 0;            // (P* - P(x_hat)) / P*
    double workload_err = 0;    // |W_believed - W_true| / W_true at x_hat
    bool believed_stable = true;
    Policy x_star{}, x_hat{};
};

std::vector<MisspecRow> sensitivity_misspecification(const DemandModel& demand,
                                                     const StaffingCost& cost, double scv,
                                                     double epsilon,
                                                     const std::vector<double>& h0_list,
                                                     const Rect& search);

}  // namespace liquar
