#include "liquar/engine.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "liquar/harness.hpp"

namespace liquar {

namespace {

// stream-id layout: purpose tag in the high bits, cycle/iteration index low
constexpr std::uint64_t kDirectionTag = 1;
constexpr std::uint64_t kCycleTag = 2;

std::uint64_t stream_id(std::uint64_t tag, std::uint64_t index) {
    return (tag << 40) | index;
}

void append_row(std::string& buf, const char* fmt, ...) {
    char line[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(line, sizeof(line), fmt, args);
    va_end(args);
    buf += line;
}

}  // namespace

Eigen::Vector2d draw_direction(RngStream& rng) {
    return rng.uniform() < 0.5 ? Eigen::Vector2d(2.0, 0.0) : Eigen::Vector2d(0.0, 2.0);
}

double estimate_performance(const CycleTrace& trace, double alpha, double h0,
                            const StaffingCost& cost) {
    if (!(alpha >= 0.0 && alpha < 0.5))
        throw std::invalid_argument("estimate_performance: alpha must lie in [0, 1/2)");
    const double T = trace.duration;
    double revenue = trace.policy.p * static_cast<double>(trace.n_arrivals()) / T;
    double trimmed =
        observed_workload_integral(trace, alpha * T, (1.0 - alpha) * T);
    return -revenue + h0 * trimmed / ((1.0 - 2.0 * alpha) * T) + cost(trace.policy.mu);
}

Eigen::Vector2d fd_gradient(double fhat_minus, double fhat_plus, const Eigen::Vector2d& Z,
                            double delta) {
    if (delta <= 0.0) throw std::invalid_argument("fd_gradient: delta must be positive");
    return Z * (fhat_plus - fhat_minus) / delta;
}

Policy sgd_update(Policy xbar, const Eigen::Vector2d& H, double eta, const FeasibleBox& box) {
    return box.clamp({xbar.mu - eta * H[0], xbar.p - eta * H[1]});
}

RunResult run_liquar(const EngineConfig& cfg, std::uint64_t seed) {
    cfg.box.validate(cfg.demand);
    if (!cfg.box.contains(cfg.x1))
        throw std::invalid_argument("run_liquar: initial policy outside the feasible box");
    if (cfg.w1 < 0.0) throw std::invalid_argument("run_liquar: negative initial workload");

    RunResult out;
    out.seed = seed;
    out.iterations.reserve(cfg.schedule.L);
    out.cycles.reserve(2 * cfg.schedule.L);

    RngStream base(seed, 0);
    Policy xbar = cfg.x1;
    double w = cfg.w1;

    for (int k = 1; k <= cfg.schedule.L; ++k) {
        const double Tk = cfg.schedule.T(k);
        const double dk = cfg.schedule.delta(k);
        const double ek = cfg.schedule.eta(k);

        RngStream dir = base.fork(stream_id(kDirectionTag, static_cast<std::uint64_t>(k)));
        Eigen::Vector2d Z = draw_direction(dir);

        IterationRecord rec;
        rec.k = k;
        rec.xbar = xbar;
        rec.Z = Z;
        rec.delta_nominal = dk;
        rec.x_minus = cfg.box.clamp({xbar.mu - dk * Z[0] / 2.0, xbar.p - dk * Z[1] / 2.0});
        rec.x_plus = cfg.box.clamp({xbar.mu + dk * Z[0] / 2.0, xbar.p + dk * Z[1] / 2.0});

        int active = Z[0] != 0.0 ? 0 : 1;
        double applied = active == 0 ? rec.x_plus.mu - rec.x_minus.mu
                                     : rec.x_plus.p - rec.x_minus.p;
        rec.delta_eff = applied / Z[active];
        rec.clamped = std::abs(rec.delta_eff - dk) > 1e-15;

        const Policy pols[2] = {rec.x_minus, rec.x_plus};
        double fhat[2] = {0, 0};
        for (int side = 0; side < 2; ++side) {
            int l = 2 * k - 1 + side;
            RngStream crng = base.fork(stream_id(kCycleTag, static_cast<std::uint64_t>(l)));
            ArrivalProcess ap{cfg.arrival_kind, cfg.interarrival, eval(cfg.demand, pols[side].p)};
            CycleTrace trace = simulate_cycle(w, pols[side], Tk, ap, cfg.service, crng);
            fhat[side] = estimate_performance(trace, cfg.schedule.alpha, cfg.h0, cfg.cost);

            CycleSummary cs;
            cs.k = k;
            cs.l = l;
            cs.policy = pols[side];
            cs.T = Tk;
            cs.w0 = w;
            cs.w_end = trace.w_end;
            cs.n_arrivals = trace.n_arrivals();
            cs.workload_int = workload_integral(trace, 0.0, Tk);
            cs.observed_trimmed_int = observed_workload_integral(
                trace, cfg.schedule.alpha * Tk, (1.0 - cfg.schedule.alpha) * Tk);
            cs.fhat = fhat[side];
            cs.cost = cycle_cost(trace, cfg.h0, cfg.cost);
            out.cycles.push_back(cs);
            w = trace.w_end;
        }
        rec.fhat_minus = fhat[0];
        rec.fhat_plus = fhat[1];

        if (rec.delta_eff > 0.0) {
            rec.H = fd_gradient(fhat[0], fhat[1], Z, rec.delta_eff);
        } else {
            rec.H.setZero();
            rec.degenerate = true;
        }
        xbar = sgd_update(xbar, rec.H, ek, cfg.box);
        rec.xnext = xbar;
        rec.w_handoff = w;
        out.iterations.push_back(rec);
    }
    out.final_policy = xbar;
    return out;
}

void RunResult::write_cycles_csv(std::ostream& os) const {
    std::string buf;
    buf.reserve(cycles.size() * 96 + 64);
    buf += "k,l,mu,p,T,w0,w_end,n_arrivals,workload_int,observed_trimmed_int,fhat,cost\n";
    for (const auto& c : cycles)
        append_row(buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%llu,%.17g,%.17g,%.17g,%.17g\n",
                   c.k, c.l, c.policy.mu, c.policy.p, c.T, c.w0, c.w_end,
                   static_cast<unsigned long long>(c.n_arrivals), c.workload_int,
                   c.observed_trimmed_int, c.fhat, c.cost);
    os << buf;
}

void RunResult::write_iterations_csv(std::ostream& os) const {
    std::string buf;
    buf.reserve(iterations.size() * 128 + 64);
    buf += "k,xbar_mu,xbar_p,Z_mu,Z_p,delta,delta_eff,fhat_minus,fhat_plus,H_mu,H_p,"
           "xnext_mu,xnext_p,w_handoff,clamped,degenerate\n";
    for (const auto& r : iterations)
        append_row(buf,
                   "%d,%.17g,%.17g,%g,%g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                   "%d,%d\n",
                   r.k, r.xbar.mu, r.xbar.p, r.Z[0], r.Z[1], r.delta_nominal, r.delta_eff,
                   r.fhat_minus, r.fhat_plus, r.H[0], r.H[1], r.xnext.mu, r.xnext.p,
                   r.w_handoff, r.clamped ? 1 : 0, r.degenerate ? 1 : 0);
    os << buf;
}

}  // namespace liquar
