#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "liquar/demand.hpp"
#include "liquar/queue.hpp"
#include "liquar/random.hpp"

namespace liquar {

// Hyperparameter schedules: eta_k = c_eta k^-a, T_k = c_T k^b,
// delta_k = min(delta_cap, c_delta k^-c). The (a,b,c) = (1, 1/3, 1/3)
// defaults match the regret-optimal choice; the remaining constants default
// to the base experiment values.
struct HyperSchedule {
    double c_eta = 4.0, a = 1.0;
    double c_T = 200.0, b = 1.0 / 3.0;
    double c_delta = 0.5, c = 1.0 / 3.0;
    double delta_cap = 0.1;
    double alpha = 0.1;  // warm-up / overtime trim fraction, in (0, 1/2)
    int L = 1000;

    double eta(int k) const { return c_eta * std::pow(k, -a); }
    double T(int k) const { return c_T * std::pow(k, b); }
    double delta(int k) const { return std::min(delta_cap, c_delta * std::pow(k, -c)); }
};

struct IterationRecord {
    int k = 0;
    Policy xbar{};            // decision at the start of iteration k
    Eigen::Vector2d Z{0, 0};  // perturbation direction, (0,2) or (2,0)
    Policy x_minus{}, x_plus{};  // applied (clamped) cycle policies
    double delta_nominal = 0;
    double delta_eff = 0;  // applied half-difference in the active coordinate
    double fhat_minus = 0, fhat_plus = 0;
    Eigen::Vector2d H{0, 0};
    Policy xnext{};
    double w_handoff = 0;  // workload at the end of the iteration
    bool clamped = false;
    bool degenerate = false;  // both perturbed policies collapsed; H forced to 0
};

struct CycleSummary {
    int k = 0, l = 0;
    Policy policy{};
    double T = 0;
    double w0 = 0, w_end = 0;
    std::uint64_t n_arrivals = 0;
    double workload_int = 0;          // full untrimmed integral
    double observed_trimmed_int = 0;  // censored integral over the trim window
    double fhat = 0;
    double cost = 0;  // realized cycle cost h0 int W + c(mu) T - p N
};

struct RunResult {
    std::vector<IterationRecord> iterations;
    std::vector<CycleSummary> cycles;
    Policy final_policy{};
    std::uint64_t seed = 0;

    // one row per cycle / per iteration; fixed formatting so equal seeds give
    // byte-identical files
    void write_cycles_csv(std::ostream& os) const;
    void write_iterations_csv(std::ostream& os) const;
};

struct EngineConfig {
    DemandModel demand;
    StaffingCost cost;
    double h0 = 1.0;
    UnitDist service = UnitDist::exponential();
    ArrivalProcess::Kind arrival_kind = ArrivalProcess::Kind::Poisson;
    UnitDist interarrival = UnitDist::exponential();
    FeasibleBox box{};
    HyperSchedule schedule{};
    Policy x1{};     // initial decision
    double w1 = 0;   // initial workload, system starts empty by default
};

Eigen::Vector2d draw_direction(RngStream& rng);

// f^G estimate from one cycle: -p N/T + h0/((1-2a)T) int_{aT}^{(1-a)T} W^ dt
// + c(mu). The revenue term divides by the full T.
double estimate_performance(const CycleTrace& trace, double alpha, double h0,
                            const StaffingCost& cost);

Eigen::Vector2d fd_gradient(double fhat_minus, double fhat_plus, const Eigen::Vector2d& Z,
                            double delta);

Policy sgd_update(Policy xbar, const Eigen::Vector2d& H, double eta, const FeasibleBox& box);

RunResult run_liquar(const EngineConfig& cfg, std::uint64_t seed);

}  // namespace liquar
