#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "liquar/demand.hpp"
#include "liquar/random.hpp"

namespace liquar {

struct Arrival {
    double t = 0;     // arrival epoch within the cycle
    double work = 0;  // individual workload V (unit mean)
};

// One linear piece of the workload path: w(t) = w0 + slope*(t - t0) on
// [t0, t1]. Pieces are pure: slope == -mu with w > 0 on the interior
// (draining) or slope == 0 with w == 0 (idle). Arrival jumps sit exactly at
// piece boundaries.
struct Segment {
    double t0 = 0, t1 = 0;
    double w0 = 0;
    double slope = 0;

    double at(double t) const { return w0 + slope * (t - t0); }
};

// Complete event record of one operating cycle under a constant policy.
struct CycleTrace {
    Policy policy{};
    double duration = 0;
    double w0 = 0;
    double w_end = 0;
    std::vector<Arrival> arrivals;
    std::vector<Segment> segments;  // contiguous cover of [0, duration]

    std::size_t n_arrivals() const { return arrivals.size(); }
    double workload_at(double t) const;  // right-continuous at jumps
    double busy_time() const;            // total time with slope < 0

    // debugging dump, columns (t, W, event); not part of the measurement path
    void write_csv(std::ostream& os) const;
};

struct ArrivalProcess {
    enum class Kind { Poisson, Renewal };
    Kind kind = Kind::Poisson;
    UnitDist interarrival = UnitDist::exponential();  // gaps are U/rate
    double rate = 1.0;

    static ArrivalProcess poisson(double rate) { return {Kind::Poisson, UnitDist::exponential(), rate}; }
    static ArrivalProcess renewal(UnitDist u, double rate) { return {Kind::Renewal, u, rate}; }
};

// Residual time to the next arrival. At a cycle boundary the residual gap is
// discarded and redrawn at the new rate; for Poisson arrivals this is
// distributionally a no-op (memorylessness).
struct ArrivalState {
    double residual = 0;
};

ArrivalState renewal_boundary_reset(const ArrivalProcess& proc, RngStream& rng);

// Exact deterministic path construction from scripted arrivals (the test
// hook behind simulate_cycle). Arrivals must be sorted, within [0, duration].
CycleTrace build_trace(double w0, Policy policy, double duration,
                       std::vector<Arrival> arrivals);

// Event-driven exact simulation: arrival epochs from the renewal/Poisson
// process, workloads V from `service`, no time discretization. Draws come
// from two forked sub-streams so arrival and service randomness stay
// decoupled.
CycleTrace simulate_cycle(double w0, Policy policy, double duration,
                          const ArrivalProcess& arrivals, const UnitDist& service,
                          RngStream& rng);

// Exact integral of the piecewise-linear path over [t0, t1].
double workload_integral(const CycleTrace& trace, double t0, double t1);

// Censored workload: W(t) when every arrival by t clears before the cycle
// ends, i.e. W(t) <= mu (T - t); zero otherwise.
double observed_workload(const CycleTrace& trace, double t);

// Exact integral of the censored path. On a draining piece W - mu(T-t) is
// constant, so each piece is censored entirely or not at all.
double observed_workload_integral(const CycleTrace& trace, double t0, double t1);

}  // namespace liquar
