#include "liquar/queue.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace liquar {

namespace {

constexpr std::uint64_t kArrivalPurpose = 0xA11;
constexpr std::uint64_t kServicePurpose = 0x5E1;

void check_range(const CycleTrace& trace, double t0, double t1) {
    if (t0 < 0.0 || t1 > trace.duration || t0 > t1)
        throw std::domain_error("workload_integral: interval outside [0, duration]");
}

}  // namespace

double CycleTrace::workload_at(double t) const {
    if (t < 0.0 || t > duration) throw std::domain_error("workload_at: t outside [0, duration]");
    // binary search for the segment containing t; prefer the later segment at
    // a boundary so values are right-continuous across arrival jumps
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double v, const Segment& s) { return v < s.t1; });
    if (it == segments.end()) return w_end;
    return it->at(t);
}

double CycleTrace::busy_time() const {
    double b = 0;
    for (const auto& s : segments)
        if (s.slope < 0.0) b += s.t1 - s.t0;
    return b;
}

void CycleTrace::write_csv(std::ostream& os) const {
    std::string buf = "t,W,event\n";
    char line[96];
    std::size_t ai = 0;
    for (const auto& s : segments) {
        const char* event = "segment";
        if (ai < arrivals.size() && arrivals[ai].t == s.t0) {
            event = "arrival";
            ++ai;
        } else if (s.w0 == 0.0 && s.slope == 0.0) {
            event = "idle";
        }
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%s\n", s.t0, s.w0, event);
        buf += line;
    }
    std::snprintf(line, sizeof(line), "%.17g,%.17g,end\n", duration, w_end);
    buf += line;
    os << buf;
}

ArrivalState renewal_boundary_reset(const ArrivalProcess& proc, RngStream& rng) {
    return {sample(proc.interarrival, rng) / proc.rate};
}

CycleTrace build_trace(double w0, Policy policy, double duration, std::vector<Arrival> arrivals) {
    if (duration <= 0.0) throw std::invalid_argument("build_trace: duration must be positive");
    if (policy.mu <= 0.0) throw std::invalid_argument("build_trace: mu must be positive");
    if (w0 < 0.0) throw std::invalid_argument("build_trace: negative initial workload");

    CycleTrace trace;
    trace.policy = policy;
    trace.duration = duration;
    trace.w0 = w0;
    trace.arrivals = std::move(arrivals);

    const double mu = policy.mu;
    double t = 0.0;
    double w = w0;
    trace.segments.reserve(2 * trace.arrivals.size() + 2);

    auto advance_to = [&](double te) {
        // drain from (t, w) to time te, splitting at the hit-zero epoch
        if (te < t) throw std::invalid_argument("build_trace: arrivals not sorted");
        if (te == t) return;
        double hit = w / mu;
        double dt = te - t;
        if (w > 0.0 && hit < dt) {
            trace.segments.push_back({t, t + hit, w, -mu});
            trace.segments.push_back({t + hit, te, 0.0, 0.0});
            w = 0.0;
        } else if (w > 0.0) {
            trace.segments.push_back({t, te, w, -mu});
            w = std::max(0.0, w - mu * dt);  // rounding guard at exact hits
        } else {
            trace.segments.push_back({t, te, 0.0, 0.0});
        }
        t = te;
    };

    for (const auto& a : trace.arrivals) {
        if (a.t < 0.0 || a.t > duration)
            throw std::invalid_argument("build_trace: arrival epoch outside cycle");
        if (a.work < 0.0) throw std::invalid_argument("build_trace: negative workload");
        advance_to(a.t);
        w += a.work;
    }
    advance_to(duration);
    trace.w_end = w;
    return trace;
}

CycleTrace simulate_cycle(double w0, Policy policy, double duration,
                          const ArrivalProcess& arrivals, const UnitDist& service,
                          RngStream& rng) {
    if (arrivals.rate <= 0.0) throw std::invalid_argument("simulate_cycle: rate must be positive");
    RngStream arr_rng = rng.fork(kArrivalPurpose);
    RngStream svc_rng = rng.fork(kServicePurpose);

    std::vector<Arrival> events;
    events.reserve(static_cast<std::size_t>(arrivals.rate * duration * 1.2) + 16);
    double t = renewal_boundary_reset(arrivals, arr_rng).residual;
    while (t <= duration) {
        events.push_back({t, sample(service, svc_rng)});
        t += sample(arrivals.interarrival, arr_rng) / arrivals.rate;
    }
    return build_trace(w0, policy, duration, std::move(events));
}

double workload_integral(const CycleTrace& trace, double t0, double t1) {
    check_range(trace, t0, t1);
    double total = 0;
    for (const auto& s : trace.segments) {
        double lo = std::max(t0, s.t0);
        double hi = std::min(t1, s.t1);
        if (lo >= hi) continue;
        total += 0.5 * (s.at(lo) + s.at(hi)) * (hi - lo);
    }
    return total;
}

double observed_workload(const CycleTrace& trace, double t) {
    double w = trace.workload_at(t);
    return w <= trace.policy.mu * (trace.duration - t) ? w : 0.0;
}

double observed_workload_integral(const CycleTrace& trace, double t0, double t1) {
    check_range(trace, t0, t1);
    const double mu = trace.policy.mu;
    const double T = trace.duration;
    double total = 0;
    for (const auto& s : trace.segments) {
        double lo = std::max(t0, s.t0);
        double hi = std::min(t1, s.t1);
        if (lo >= hi) continue;
        if (s.slope == 0.0) continue;  // idle piece, w == 0
        // margin w - mu (T - t) is constant on a draining piece
        if (s.at(lo) <= mu * (T - lo)) total += 0.5 * (s.at(lo) + s.at(hi)) * (hi - lo);
    }
    return total;
}

}  // namespace liquar
