#include "liquar/demand.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace liquar {

DemandModel DemandModel::linear(double a, double b) {
    DemandModel m;
    m.family = Family::Linear;
    m.a = a;
    m.b = b;
    return m;
}

DemandModel DemandModel::quadratic(double c, double a) {
    DemandModel m;
    m.family = Family::Quadratic;
    m.c = c;
    m.a = a;
    return m;
}

DemandModel DemandModel::exponential(double a, double b) {
    DemandModel m;
    m.family = Family::Exponential;
    m.a = a;
    m.b = b;
    return m;
}

DemandModel DemandModel::logit(double M0, double a, double b) {
    DemandModel m;
    m.family = Family::Logit;
    m.M0 = M0;
    m.a = a;
    m.b = b;
    return m;
}

DemandModel DemandModel::restricted(double lo, double hi) const {
    if (!(lo < hi)) throw std::invalid_argument("demand: price interval requires lo < hi");
    DemandModel m = *this;
    m.p_lo = -std::numeric_limits<double>::infinity();
    m.p_hi = std::numeric_limits<double>::infinity();
    const int n = 64;
    for (int i = 0; i <= n; ++i) {
        double p = lo + (hi - lo) * i / n;
        if (eval(m, p) <= 0.0)
            throw std::invalid_argument("demand: lambda(p) must be positive on the price interval");
        if (eval_d1(m, p) > 0.0)
            throw std::invalid_argument("demand: lambda must be non-increasing on the price interval");
    }
    m.p_lo = lo;
    m.p_hi = hi;
    return m;
}

DemandModel DemandModel::scaled(double factor) const {
    if (factor <= 0.0) throw std::invalid_argument("demand: scale factor must be positive");
    DemandModel m = *this;
    m.scale *= factor;
    return m;
}

namespace {

void check_price(const DemandModel& m, double p) {
    if (p < m.p_lo || p > m.p_hi)
        throw std::domain_error("demand: price " + std::to_string(p) +
                                " outside validated interval");
}

}  // namespace

double eval(const DemandModel& m, double p) {
    check_price(m, p);
    switch (m.family) {
        case DemandModel::Family::Linear: return m.scale * (m.a - m.b * p);
        case DemandModel::Family::Quadratic: return m.scale * (m.c - m.a * p * p);
        case DemandModel::Family::Exponential: return m.scale * std::exp(m.a - m.b * p);
        case DemandModel::Family::Logit: {
            double e = std::exp(m.a - m.b * p);
            return m.scale * m.M0 * e / (1.0 + e);
        }
    }
    return 0.0;
}

double eval_d1(const DemandModel& m, double p) {
    check_price(m, p);
    switch (m.family) {
        case DemandModel::Family::Linear: return -m.scale * m.b;
        case DemandModel::Family::Quadratic: return -2.0 * m.scale * m.a * p;
        case DemandModel::Family::Exponential: return -m.b * eval(m, p);
        case DemandModel::Family::Logit: {
            double e = std::exp(m.a - m.b * p);
            return -m.b / (1.0 + e) * eval(m, p);
        }
    }
    return 0.0;
}

double eval_d2(const DemandModel& m, double p) {
    check_price(m, p);
    switch (m.family) {
        case DemandModel::Family::Linear: return 0.0;
        case DemandModel::Family::Quadratic: return -2.0 * m.scale * m.a;
        case DemandModel::Family::Exponential: return m.b * m.b * eval(m, p);
        case DemandModel::Family::Logit: {
            double e = std::exp(m.a - m.b * p);
            return m.b * m.b * (1.0 - e) / ((1.0 + e) * (1.0 + e)) * eval(m, p);
        }
    }
    return 0.0;
}

void FeasibleBox::validate(const DemandModel& m) const {
    if (!(mu_lo < mu_hi) || !(p_lo < p_hi))
        throw std::invalid_argument("box: requires mu_lo < mu_hi and p_lo < p_hi");
    if (!(eval(m, p_lo) < mu_lo))
        throw std::invalid_argument(
            "box: uniform stability violated, lambda(p_lo) >= mu_lo");
}

bool FeasibleBox::contains(const Policy& x) const {
    return x.mu >= mu_lo && x.mu <= mu_hi && x.p >= p_lo && x.p <= p_hi;
}

Policy FeasibleBox::clamp(Policy x) const {
    x.mu = std::min(std::max(x.mu, mu_lo), mu_hi);
    x.p = std::min(std::max(x.p, p_lo), p_hi);
    return x;
}

AssumptionReport check_assumption1a(const DemandModel& m, const FeasibleBox& box, double h0,
                                    double scv, int grid) {
    if (grid < 2) throw std::invalid_argument("check_assumption1a: grid must be >= 2");
    const double C = 0.5 * (1.0 + scv);
    AssumptionReport rep;
    rep.grid = grid;
    rep.min_slack_slope = std::numeric_limits<double>::infinity();
    rep.min_slack_hessian = std::numeric_limits<double>::infinity();

    for (int i = 0; i <= grid; ++i) {
        double p = box.p_lo + (box.p_hi - box.p_lo) * i / grid;
        double lam = eval(m, p);
        double d1 = eval_d1(m, p);
        double d2 = eval_d2(m, p);

        // slope condition depends on p only
        double rhs = std::max(std::sqrt(std::max(0.0, -d2 * (box.mu_hi - lam)) / 2.0),
                              p * d2 / 2.0);
        double slack = -d1 - rhs;
        if (slack < rep.min_slack_slope) {
            rep.min_slack_slope = slack;
            rep.worst_slope_p = p;
        }

        for (int j = 0; j <= grid; ++j) {
            double mu = box.mu_lo + (box.mu_hi - box.mu_lo) * j / grid;
            double g = mu / (mu - lam) - p * (mu - lam) / (h0 * C);
            double bound = 2.0 * g * d2 * lam / d1 - 4.0 * lam * (mu - lam) / (h0 * C);
            double s2 = d1 - bound;
            if (s2 < rep.min_slack_hessian) {
                rep.min_slack_hessian = s2;
                rep.worst_hessian = {mu, p};
            }
        }
    }
    rep.holds = rep.min_slack_slope > 0.0 && rep.min_slack_hessian > 0.0;
    return rep;
}

namespace {

// ordinary least squares y ~ x against a single regressor plus intercept
std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-14) throw std::invalid_argument("fit: degenerate price design");
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    return {intercept, slope};
}

double sum_sq_residual(const DemandModel& m, const std::vector<std::pair<double, double>>& s) {
    double r = 0;
    for (auto& [p, y] : s) {
        double d = eval(m, p) - y;
        r += d * d;
    }
    return r;
}

FitResult fit_logit(const std::vector<std::pair<double, double>>& samples,
                    const DemandModel* init) {
    Eigen::Vector3d beta;  // (M0, a, b)
    if (init != nullptr && init->family == DemandModel::Family::Logit) {
        beta << init->M0, init->a, init->b;
    } else {
        // log-odds linearization: with M0 slightly above max(y),
        // log(y/(M0-y)) = a - b p is linear in p
        double ymax = 0;
        for (auto& [p, y] : samples) ymax = std::max(ymax, y);
        double M0 = 1.25 * ymax;
        std::vector<double> xs, zs;
        for (auto& [p, y] : samples) {
            if (y <= 0 || y >= M0) continue;
            xs.push_back(p);
            zs.push_back(std::log(y / (M0 - y)));
        }
        if (xs.size() < 2) throw std::invalid_argument("fit: not enough usable logit samples");
        auto [a0, slope] = ols(xs, zs);
        beta << M0, a0, -slope;
    }

    FitResult out;
    double best_res = std::numeric_limits<double>::infinity();
    Eigen::Vector3d best = beta;
    for (int it = 0; it < 200; ++it) {
        Eigen::Matrix3d JtJ = Eigen::Matrix3d::Zero();
        Eigen::Vector3d Jtr = Eigen::Vector3d::Zero();
        double res = 0;
        for (auto& [p, y] : samples) {
            double e = std::exp(beta[1] - beta[2] * p);
            double sig = e / (1.0 + e);
            double lam = beta[0] * sig;
            double r = lam - y;
            Eigen::Vector3d J(sig, beta[0] * sig * (1.0 - sig), -p * beta[0] * sig * (1.0 - sig));
            JtJ += J * J.transpose();
            Jtr += J * r;
            res += r * r;
        }
        if (res < best_res) {
            best_res = res;
            best = beta;
        }
        Eigen::Vector3d step = JtJ.ldlt().solve(-Jtr);
        if (!step.allFinite()) break;
        // halve the step while it does not improve the residual
        double trial_res = res;
        Eigen::Vector3d trial = beta;
        double scale = 1.0;
        for (int h = 0; h < 30; ++h) {
            trial = beta + scale * step;
            DemandModel cand = DemandModel::logit(trial[0], trial[1], trial[2]);
            trial_res = sum_sq_residual(cand, samples);
            if (trial_res <= res || scale < 1e-12) break;
            scale *= 0.5;
        }
        beta = trial;
        out.iterations = it + 1;
        if ((scale * step).norm() < 1e-10) {
            out.converged = true;
            break;
        }
    }
    double final_res = sum_sq_residual(DemandModel::logit(beta[0], beta[1], beta[2]), samples);
    if (final_res > best_res) {
        beta = best;
        final_res = best_res;
    }
    out.model = DemandModel::logit(beta[0], beta[1], beta[2]);
    out.residual = final_res;
    return out;
}

}  // namespace

FitResult fit_least_squares(DemandModel::Family family,
                            const std::vector<std::pair<double, double>>& samples,
                            const DemandModel* init) {
    std::size_t need = family == DemandModel::Family::Logit ? 3 : 2;
    if (samples.size() < need)
        throw std::invalid_argument("fit: need at least as many samples as parameters");
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i + 1; j < samples.size(); ++j)
            if (samples[i].first == samples[j].first)
                throw std::invalid_argument("fit: sample prices must be distinct");

    FitResult out;
    switch (family) {
        case DemandModel::Family::Linear: {
            std::vector<double> x, y;
            for (auto& [p, v] : samples) {
                x.push_back(p);
                y.push_back(v);
            }
            auto [a, slope] = ols(x, y);
            out.model = DemandModel::linear(a, -slope);
            out.converged = true;
            break;
        }
        case DemandModel::Family::Quadratic: {
            std::vector<double> x, y;
            for (auto& [p, v] : samples) {
                x.push_back(p * p);
                y.push_back(v);
            }
            auto [c, slope] = ols(x, y);
            out.model = DemandModel::quadratic(c, -slope);
            out.converged = true;
            break;
        }
        case DemandModel::Family::Exponential: {
            std::vector<double> x, y;
            for (auto& [p, v] : samples) {
                if (v <= 0) throw std::invalid_argument("fit: exponential family needs positive rates");
                x.push_back(p);
                y.push_back(std::log(v));
            }
            auto [a, slope] = ols(x, y);
            out.model = DemandModel::exponential(a, -slope);
            out.converged = true;
            break;
        }
        case DemandModel::Family::Logit: return fit_logit(samples, init);
    }
    out.residual = sum_sq_residual(out.model, samples);
    return out;
}

std::string family_name(DemandModel::Family f) {
    switch (f) {
        case DemandModel::Family::Linear: return "linear";
        case DemandModel::Family::Quadratic: return "quadratic";
        case DemandModel::Family::Exponential: return "exponential";
        case DemandModel::Family::Logit: return "logit";
    }
    return "?";
}

}  // namespace liquar
