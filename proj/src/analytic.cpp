#include "liquar/analytic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace liquar {

double pk_mean_workload(double lambda, double mu, double scv) {
    if (lambda < 0.0) throw std::invalid_argument("pk: lambda must be nonnegative");
    if (mu <= 0.0) throw std::invalid_argument("pk: mu must be positive");
    if (lambda >= mu)
        throw std::invalid_argument("pk: unstable, lambda >= mu");
    double rho = lambda / mu;
    return rho / (1.0 - rho) * 0.5 * (1.0 + scv);
}

double objective_f(Policy x, const DemandModel& demand, const StaffingCost& cost, double h0,
                   double scv) {
    double lam = eval(demand, x.p);
    return h0 * pk_mean_workload(lam, x.mu, scv) + cost(x.mu) - x.p * lam;
}

Eigen::Vector2d grad_f(Policy x, const DemandModel& demand, const StaffingCost& cost, double h0,
                       double scv) {
    double lam = eval(demand, x.p);
    if (lam >= x.mu) throw std::invalid_argument("grad_f: unstable policy");
    double d1 = eval_d1(demand, x.p);
    double C = 0.5 * (1.0 + scv);
    double gap = x.mu - lam;
    double dmu = -h0 * C * lam / (gap * gap) + cost.d1(x.mu);
    double dp = h0 * C * x.mu * d1 / (gap * gap) - lam - x.p * d1;
    return {dmu, dp};
}

Eigen::Matrix2d hessian_f(Policy x, const DemandModel& demand, const StaffingCost& cost,
                          double h0, double scv) {
    double lam = eval(demand, x.p);
    if (lam >= x.mu) throw std::invalid_argument("hessian_f: unstable policy");
    double d1 = eval_d1(demand, x.p);
    double d2 = eval_d2(demand, x.p);
    double C = 0.5 * (1.0 + scv);
    double gap = x.mu - lam;
    double gap3 = gap * gap * gap;

    double fmm = 2.0 * h0 * C * lam / gap3 + cost.d2(x.mu);
    double fpp = h0 * C * x.mu * (2.0 * d1 * d1 + gap * d2) / gap3 - x.p * d2 - 2.0 * d1;
    double fmp = d1 * workload_cross_derivative(lam, x.mu, h0 * C);
    Eigen::Matrix2d H;
    H << fmm, fmp, fmp, fpp;
    return H;
}

double workload_cross_derivative(double lambda, double mu, double h0C) {
    double gap = mu - lambda;
    return -h0C * (mu + lambda) / (gap * gap * gap);
}

namespace {

using Objective = std::function<double(Policy)>;

double safe_eval(const Objective& f, Policy x) {
    double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

Policy clamp_rect(const Rect& r, Policy x) {
    x.mu = std::clamp(x.mu, r.mu_lo, r.mu_hi);
    x.p = std::clamp(x.p, r.p_lo, r.p_hi);
    return x;
}

// Nelder-Mead on the rectangle; out-of-rect points are clamped before
// evaluation, which keeps the simplex feasible and lets boundary optima be
// reached exactly.
Policy nelder_mead(const Objective& f, const Rect& r, Policy start, int max_iter = 4000) {
    struct Vertex {
        Policy x;
        double v;
    };
    double hmu = 0.05 * (r.mu_hi - r.mu_lo);
    double hp = 0.05 * (r.p_hi - r.p_lo);
    std::array<Vertex, 3> s;
    s[0] = {clamp_rect(r, start), 0};
    s[1] = {clamp_rect(r, {start.mu + hmu, start.p}), 0};
    s[2] = {clamp_rect(r, {start.mu, start.p + hp}), 0};
    for (auto& v : s) v.v = safe_eval(f, v.x);

    auto order = [&] {
        std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.v < b.v; });
    };
    order();
    for (int it = 0; it < max_iter; ++it) {
        double spread = std::max(std::abs(s[2].v - s[0].v),
                                 std::hypot(s[2].x.mu - s[0].x.mu, s[2].x.p - s[0].x.p));
        if (spread < 1e-13) break;
        Policy cen{0.5 * (s[0].x.mu + s[1].x.mu), 0.5 * (s[0].x.p + s[1].x.p)};
        auto probe = [&](double coef) {
            Policy x{cen.mu + coef * (cen.mu - s[2].x.mu), cen.p + coef * (cen.p - s[2].x.p)};
            x = clamp_rect(r, x);
            return Vertex{x, safe_eval(f, x)};
        };
        Vertex refl = probe(1.0);
        if (refl.v < s[0].v) {
            Vertex exp_ = probe(2.0);
            s[2] = exp_.v < refl.v ? exp_ : refl;
        } else if (refl.v < s[1].v) {
            s[2] = refl;
        } else {
            Vertex con = probe(refl.v < s[2].v ? 0.5 : -0.5);
            if (con.v < std::min(refl.v, s[2].v)) {
                s[2] = con;
            } else {
                for (int i = 1; i < 3; ++i) {
                    s[i].x = clamp_rect(r, {0.5 * (s[i].x.mu + s[0].x.mu),
                                            0.5 * (s[i].x.p + s[0].x.p)});
                    s[i].v = safe_eval(f, s[i].x);
                }
            }
        }
        order();
    }
    return s[0].x;
}

double projected_grad_norm(const Rect& r, Policy x, const Eigen::Vector2d& g) {
    Policy step = clamp_rect(r, {x.mu - g[0], x.p - g[1]});
    return std::hypot(x.mu - step.mu, x.p - step.p);
}

Optimum solve_generic(const Objective& f, const std::function<Eigen::Vector2d(Policy)>& grad,
                      const std::function<Eigen::Matrix2d(Policy)>& hess, const Rect& rect,
                      int grid) {
    Policy best{};
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        for (int j = 0; j <= grid; ++j) {
            Policy x{rect.mu_lo + (rect.mu_hi - rect.mu_lo) * i / grid,
                     rect.p_lo + (rect.p_hi - rect.p_lo) * j / grid};
            double v = safe_eval(f, x);
            if (v < best_v) {
                best_v = v;
                best = x;
            }
        }
    }
    if (!std::isfinite(best_v))
        throw std::invalid_argument("solve_optimal: no stable point in the search rectangle");

    Policy x = nelder_mead(f, rect, best);

    // projected Newton polish down to the gradient tolerance
    for (int it = 0; it < 60; ++it) {
        Eigen::Vector2d g = grad(x);
        if (projected_grad_norm(rect, x, g) <= 1e-9) break;
        Eigen::Matrix2d H = hess(x);
        Eigen::Vector2d step = H.ldlt().solve(-g);
        if (!step.allFinite() || step.dot(-g) <= 0.0) step = -g;
        double t = 1.0;
        double fx = safe_eval(f, x);
        Policy trial = x;
        double ft = fx;
        for (int h = 0; h < 40; ++h) {
            trial = clamp_rect(rect, {x.mu + t * step[0], x.p + t * step[1]});
            ft = safe_eval(f, trial);
            if (ft <= fx) break;
            t *= 0.5;
        }
        // near the optimum f-differences underflow before the gradient
        // does; accept tiny full steps on gradient evidence alone
        if (ft > fx && step.norm() > 1e-9) break;
        x = trial;
    }

    Optimum out;
    out.x = x;
    out.f = f(x);
    out.profit = -out.f;
    out.grad_norm = projected_grad_norm(rect, x, grad(x));
    return out;
}

}  // namespace

Optimum solve_optimal(const DemandModel& demand, const StaffingCost& cost, double h0, double scv,
                      const Rect& rect, int grid) {
    auto f = [&](Policy x) -> double {
        double lam = eval(demand, x.p);
        if (lam >= x.mu) return std::numeric_limits<double>::infinity();
        return h0 * pk_mean_workload(lam, x.mu, scv) + cost(x.mu) - x.p * lam;
    };
    auto g = [&](Policy x) { return grad_f(x, demand, cost, h0, scv); };
    auto h = [&](Policy x) { return hessian_f(x, demand, cost, h0, scv); };
    Optimum out = solve_generic(f, g, h, rect, grid);
    out.rho = eval(demand, out.x.p) / out.x.mu;
    return out;
}

ConvexityReport convexity_report(const DemandModel& demand, const StaffingCost& cost, double h0,
                                 double scv, const Rect& rect, int grid) {
    ConvexityReport rep;
    rep.grid = grid;
    rep.x_star = solve_optimal(demand, cost, h0, scv, rect);
    rep.min_det = std::numeric_limits<double>::infinity();
    rep.min_fpp = std::numeric_limits<double>::infinity();

    auto grad = [&](Policy x) -> Eigen::Vector2d {
        if (eval(demand, x.p) >= x.mu)
            return Eigen::Vector2d::Constant(std::numeric_limits<double>::quiet_NaN());
        return grad_f(x, demand, cost, h0, scv);
    };
    rep.k0 = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        for (int j = 0; j <= grid; ++j) {
            Policy x{rect.mu_lo + (rect.mu_hi - rect.mu_lo) * i / grid,
                     rect.p_lo + (rect.p_hi - rect.p_lo) * j / grid};
            if (eval(demand, x.p) >= x.mu) continue;
            Eigen::Matrix2d H = hessian_f(x, demand, cost, h0, scv);
            double det = H.determinant();
            if (det < rep.min_det) {
                rep.min_det = det;
                rep.argmin_det = x;
            }
            if (H(1, 1) < rep.min_fpp) {
                rep.min_fpp = H(1, 1);
                rep.argmin_fpp = x;
            }
            Eigen::Vector2d d(x.mu - rep.x_star.x.mu, x.p - rep.x_star.x.p);
            double n2 = d.squaredNorm();
            if (n2 >= 1e-16) {
                double v = d.dot(grad(x)) / n2;
                if (v < rep.k0) {
                    rep.k0 = v;
                    rep.argmin_k0 = x;
                }
            }
        }
    }
    rep.convex = rep.min_det > 0.0 && rep.min_fpp > 0.0;
    return rep;
}

Gim1Result gim1_steady_state(const UnitDist& interarrival, double lambda, double mu) {
    if (lambda <= 0.0 || mu <= 0.0)
        throw std::invalid_argument("gim1: rates must be positive");
    if (lambda >= mu) throw std::invalid_argument("gim1: unstable, lambda >= mu");

    // sigma = A~(mu(1-sigma)) with A~(s) = laplace of U/lambda = U.laplace(s/lambda);
    // fp(0) = A~(mu/lambda) > 0 and fp crosses zero exactly once on (0,1)
    // for stable input. Near sigma = 1 the difference is below double
    // resolution, so the bracket stops at 1 - 1e-9.
    auto fp = [&](double s) { return interarrival.laplace(mu * (1.0 - s) / lambda) - s; };
    double lo = 0.0, hi = 1.0 - 1e-9;
    if (fp(hi) > 0.0) {
        lo = hi;  // extreme heavy traffic; sigma = hi within bracket tolerance
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (fp(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15) break;
    }
    Gim1Result out;
    out.sigma = 0.5 * (lo + hi);
    out.mean_wait = out.sigma / (mu * (1.0 - out.sigma));
    out.workload_arrival_avg = out.sigma / (1.0 - out.sigma);
    out.workload_time_avg = (lambda / mu) / (1.0 - out.sigma);
    return out;
}

Optimum solve_optimal_gim1(const DemandModel& demand, const StaffingCost& cost, double h0,
                           const UnitDist& interarrival, const Rect& rect, int grid,
                           bool time_average) {
    auto workload = [&](Policy x) -> double {
        double lam = eval(demand, x.p);
        if (lam >= x.mu) return std::numeric_limits<double>::infinity();
        Gim1Result g = gim1_steady_state(interarrival, lam, x.mu);
        return time_average ? g.workload_time_avg : g.workload_arrival_avg;
    };
    auto f = [&](Policy x) -> double {
        double w = workload(x);
        if (!std::isfinite(w)) return w;
        return h0 * w + cost(x.mu) - x.p * eval(demand, x.p);
    };
    auto g = [&](Policy x) -> Eigen::Vector2d {
        // central differences; the root has no convenient closed-form gradient
        double hmu = 1e-6 * std::max(1.0, std::abs(x.mu));
        double hp = 1e-6 * std::max(1.0, std::abs(x.p));
        return {(f({x.mu + hmu, x.p}) - f({x.mu - hmu, x.p})) / (2 * hmu),
                (f({x.mu, x.p + hp}) - f({x.mu, x.p - hp})) / (2 * hp)};
    };
    auto h = [&](Policy x) -> Eigen::Matrix2d {
        double hmu = 1e-4 * std::max(1.0, std::abs(x.mu));
        double hp = 1e-4 * std::max(1.0, std::abs(x.p));
        Eigen::Vector2d gp = g({x.mu + hmu, x.p}), gm = g({x.mu - hmu, x.p});
        Eigen::Vector2d gq = g({x.mu, x.p + hp}), gr = g({x.mu, x.p - hp});
        Eigen::Matrix2d H;
        H << (gp[0] - gm[0]) / (2 * hmu), (gq[0] - gr[0]) / (2 * hp),
            (gp[1] - gm[1]) / (2 * hmu), (gq[1] - gr[1]) / (2 * hp);
        return 0.5 * (H + H.transpose());
    };
    Optimum out = solve_generic(f, g, h, rect, grid);
    out.rho = eval(demand, out.x.p) / out.x.mu;
    return out;
}

}  // namespace liquar
