#pragma once

#include <limits>
#include <string>
#include <vector>

namespace liquar {

// Parametric demand curve lambda(p). All families are non-increasing in p
// and positive on their validated price interval. `scale` is a
// multiplicative deflation hook used by misspecification studies.
struct DemandModel {
    enum class Family { Linear, Quadratic, Exponential, Logit };

    Family family = Family::Logit;
    double a = 0, b = 0, c = 0, M0 = 0;
    double scale = 1.0;
    // Validated price interval; eval rejects prices outside it.
    double p_lo = -std::numeric_limits<double>::infinity();
    double p_hi = std::numeric_limits<double>::infinity();

    static DemandModel linear(double a, double b);        // a - b p
    static DemandModel quadratic(double c, double a);     // c - a p^2
    static DemandModel exponential(double a, double b);   // exp(a - b p)
    static DemandModel logit(double M0, double a, double b);

    // Copy restricted to [lo, hi]; verifies lambda > 0 and lambda' <= 0 there.
    DemandModel restricted(double lo, double hi) const;
    DemandModel scaled(double factor) const;
};

double eval(const DemandModel& m, double p);
double eval_d1(const DemandModel& m, double p);
double eval_d2(const DemandModel& m, double p);

struct Policy {
    double mu = 0;
    double p = 0;
};

// Decision rectangle B = [mu_lo, mu_hi] x [p_lo, p_hi]. Uniform stability
// (lambda(p_lo) < mu_lo) is validated where a demand model is known.
struct FeasibleBox {
    double mu_lo = 0, mu_hi = 0, p_lo = 0, p_hi = 0;

    void validate(const DemandModel& m) const;
    bool contains(const Policy& x) const;
    Policy clamp(Policy x) const;
    Policy midpoint() const { return {0.5 * (mu_lo + mu_hi), 0.5 * (p_lo + p_hi)}; }
};

// Staffing cost c(mu); linear c0*mu, kept behind value/d1/d2 so convex
// differentiable forms can slot in.
struct StaffingCost {
    double c0 = 1.0;

    double operator()(double mu) const { return c0 * mu; }
    double d1(double) const { return c0; }
    double d2(double) const { return 0.0; }
};

// Numerical verification of the demand-curve slope conditions that make the
// steady-state objective convex on the box. Both inequalities are evaluated
// on a dense (mu, p) grid; `holds` requires strictly positive slack
// everywhere. Failure is a report outcome, not an error.
struct AssumptionReport {
    bool holds = false;
    // -lambda' > max(sqrt(max(0,-lambda''(mu_hi - lambda))/2), p lambda''/2)
    double min_slack_slope = 0;
    double worst_slope_p = 0;
    // lambda' > max_mu(2 g(mu) lambda'' lambda / lambda' - 4 lambda (mu - lambda)/(h0 C))
    double min_slack_hessian = 0;
    Policy worst_hessian{};
    int grid = 0;
};

AssumptionReport check_assumption1a(const DemandModel& m, const FeasibleBox& box, double h0,
                                    double scv, int grid = 200);

// Least-squares demand fit from (price, observed rate) samples.
// Linear/Quadratic/Exponential have closed-form (log-)linear solutions;
// Logit runs Gauss-Newton from a log-odds initialization.
struct FitResult {
    DemandModel model;
    bool converged = false;
    int iterations = 0;
    double residual = 0;  // sum of squared residuals at the returned iterate
};

FitResult fit_least_squares(DemandModel::Family family,
                            const std::vector<std::pair<double, double>>& samples,
                            const DemandModel* init = nullptr);

std::string family_name(DemandModel::Family f);

}  // namespace liquar
