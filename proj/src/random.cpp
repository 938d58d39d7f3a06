#include "liquar/random.hpp"

#include <cmath>

namespace liquar {

double RngStream::exponential(double rate) {
    if (rate <= 0.0) throw std::invalid_argument("exponential: rate must be positive");
    // u < 1 strictly, so log1p(-u) is finite
    return -std::log1p(-uniform()) / rate;
}

UnitDist UnitDist::erlang(int phases) {
    if (phases < 1) throw std::invalid_argument("erlang: phase count must be >= 1");
    UnitDist d;
    d.family = Family::Erlang;
    d.k = phases;
    return d;
}

UnitDist UnitDist::hyperexp_from_scv(double target_scv) {
    if (target_scv < 1.0)
        throw std::invalid_argument(
            "hyperexp_from_scv: a two-phase hyperexponential requires scv >= 1, got " +
            std::to_string(target_scv));
    // p1 = (1 + sqrt((s-1)/(s+1)))/2, r_i = 2 p_i gives mean 1 and SCV s;
    // s = 1 degenerates to Exponential (both rates 1).
    double x = std::sqrt((target_scv - 1.0) / (target_scv + 1.0));
    UnitDist d;
    d.family = Family::HyperExp2;
    d.p1 = 0.5 * (1.0 + x);
    d.r1 = 2.0 * d.p1;
    d.r2 = 2.0 * (1.0 - d.p1);
    return d;
}

UnitDist UnitDist::from_scv(double scv) {
    if (scv == 0.0) return deterministic();
    if (scv < 1.0) {
        int phases = static_cast<int>(std::lround(1.0 / scv));
        if (std::abs(1.0 / static_cast<double>(phases) - scv) > 1e-9)
            throw std::invalid_argument("from_scv: scv < 1 must equal 1/k for integer k");
        return erlang(phases);
    }
    if (scv == 1.0) return exponential();
    return hyperexp_from_scv(scv);
}

double UnitDist::scv() const {
    switch (family) {
        case Family::Exponential: return 1.0;
        case Family::Deterministic: return 0.0;
        case Family::Erlang: return 1.0 / static_cast<double>(k);
        case Family::HyperExp2: {
            double p2 = 1.0 - p1;
            double m2 = 2.0 * (p1 / (r1 * r1) + p2 / (r2 * r2));
            return m2 - 1.0;  // mean is 1
        }
    }
    return 1.0;
}

double UnitDist::laplace(double s) const {
    switch (family) {
        case Family::Exponential: return 1.0 / (1.0 + s);
        case Family::Deterministic: return std::exp(-s);
        case Family::Erlang: {
            double kk = static_cast<double>(k);
            return std::pow(kk / (kk + s), k);
        }
        case Family::HyperExp2:
            return p1 * r1 / (r1 + s) + (1.0 - p1) * r2 / (r2 + s);
    }
    return 0.0;
}

double sample(const UnitDist& dist, RngStream& rng) {
    switch (dist.family) {
        case UnitDist::Family::Exponential: return rng.exponential(1.0);
        case UnitDist::Family::Deterministic: return 1.0;
        case UnitDist::Family::Erlang: {
            double rate = static_cast<double>(dist.k);
            double sum = 0.0;
            for (int i = 0; i < dist.k; ++i) sum += rng.exponential(rate);
            return sum;
        }
        case UnitDist::Family::HyperExp2:
            return rng.uniform() < dist.p1 ? rng.exponential(dist.r1) : rng.exponential(dist.r2);
    }
    return 0.0;
}

}  // namespace liquar
