#pragma once

#include <Eigen/Dense>

#include "liquar/demand.hpp"
#include "liquar/random.hpp"

namespace liquar {

// Stationary mean workload of the M/G/1 queue: rho/(1-rho) * (1+scv)/2.
// Rejects unstable (lambda >= mu) input.
double pk_mean_workload(double lambda, double mu, double scv);

// Steady-state cost f(mu,p) = h0 E[W] + c(mu) - p lambda(p); profit is -f.
double objective_f(Policy x, const DemandModel& demand, const StaffingCost& cost, double h0,
                   double scv);

Eigen::Vector2d grad_f(Policy x, const DemandModel& demand, const StaffingCost& cost, double h0,
                       double scv);
Eigen::Matrix2d hessian_f(Policy x, const DemandModel& demand, const StaffingCost& cost,
                          double h0, double scv);

// d^2/(d lambda d mu) of h0 C lambda/(mu - lambda): -h0C (mu+lambda)/(mu-lambda)^3.
// The (mu,p) mixed partial of f is this times lambda'(p).
double workload_cross_derivative(double lambda, double mu, double h0C);

// Plain search rectangle; unlike FeasibleBox it carries no uniform-stability
// invariant, only per-point stability checks during evaluation.
struct Rect {
    double mu_lo = 0, mu_hi = 0, p_lo = 0, p_hi = 0;
    static Rect of(const FeasibleBox& b) { return {b.mu_lo, b.mu_hi, b.p_lo, b.p_hi}; }
};

struct Optimum {
    Policy x{};
    double f = 0;
    double profit = 0;  // -f
    double rho = 0;     // lambda(p*)/mu*
    double grad_norm = 0;  // projected gradient norm at x
};

// Coarse grid scan followed by Nelder-Mead refinement and a projected
// Newton polish. Unstable points evaluate to +inf; boundary optima are
// measured by the projected gradient norm.
Optimum solve_optimal(const DemandModel& demand, const StaffingCost& cost, double h0, double scv,
                      const Rect& rect, int grid = 400);

// Grid diagnostics of the convexity structure: minimum Hessian determinant,
// minimum d2f/dp2, and the empirical strong-convexity constant
// K0 = min (x-x*)'grad f(x) / |x-x*|^2 over the grid.
struct ConvexityReport {
    double min_det = 0;
    Policy argmin_det{};
    double min_fpp = 0;
    Policy argmin_fpp{};
    double k0 = 0;
    Policy argmin_k0{};
    Optimum x_star{};
    bool convex = false;  // min_det > 0 and min_fpp > 0 on the grid
    int grid = 0;
};

ConvexityReport convexity_report(const DemandModel& demand, const StaffingCost& cost, double h0,
                                 double scv, const Rect& rect, int grid = 120);

// Empirical K0 for an arbitrary gradient oracle (test hook).
template <class GradFn>
double empirical_k0(GradFn&& grad, Policy x_star, const Rect& rect, int grid) {
    double k0 = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        for (int j = 0; j <= grid; ++j) {
            Policy x{rect.mu_lo + (rect.mu_hi - rect.mu_lo) * i / grid,
                     rect.p_lo + (rect.p_hi - rect.p_lo) * j / grid};
            Eigen::Vector2d d(x.mu - x_star.mu, x.p - x_star.p);
            double n2 = d.squaredNorm();
            if (n2 < 1e-16) continue;
            Eigen::Vector2d g = grad(x);
            if (!g.allFinite()) continue;
            k0 = std::min(k0, d.dot(g) / n2);
        }
    }
    return k0;
}

// GI/M/1 steady state through the root sigma of sigma = A~(mu (1 - sigma)),
// A~ the inter-arrival Laplace transform. mean_wait is the queueing delay of
// an arriving customer, sigma/(mu(1-sigma)). Two workload readings are
// carried: the workload seen by arrivals sigma/(1-sigma) and the
// time-average workload rho/(1-sigma); they coincide only under Poisson
// arrivals.
struct Gim1Result {
    double sigma = 0;
    double mean_wait = 0;
    double workload_arrival_avg = 0;
    double workload_time_avg = 0;
};

Gim1Result gim1_steady_state(const UnitDist& interarrival, double lambda, double mu);

// Ground-truth optimum for renewal-arrival experiments. `time_average`
// selects which workload reading enters the holding cost (the simulator's
// realized cost integrates workload over time).
Optimum solve_optimal_gim1(const DemandModel& demand, const StaffingCost& cost, double h0,
                           const UnitDist& interarrival, const Rect& rect, int grid = 400,
                           bool time_average = true);

}  // namespace liquar
