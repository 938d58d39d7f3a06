#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace liquar {

// Splittable seeded RNG stream. Identical (seed, stream_id) pairs produce
// identical draw sequences; distinct stream ids give statistically
// independent generators. A stream must not be shared between concurrent
// consumers; fork() derived streams instead.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_(stream_id), gen_(mix_seed(seed, stream_id)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    // Derived stream with the same base seed; purpose tags keep the
    // randomness of unrelated components decoupled (common-random-numbers
    // discipline across experiments).
    RngStream fork(std::uint64_t purpose) const {
        return RngStream(seed_, splitmix64(stream_ ^ (0x9e3779b97f4a7c15ULL + purpose)));
    }

    std::uint64_t next_u64() { return gen_(); }

    // uniform on [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Exp(rate); inverse CDF so draws depend only on the raw bit stream
    double exponential(double rate);

  private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }
    static std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
        return splitmix64(splitmix64(seed) ^ splitmix64(stream ^ 0xda3e39cb94b95bdbULL));
    }

    std::uint64_t seed_, stream_;
    std::mt19937_64 gen_;
};

// Unit-mean random-variable family shared by service and inter-arrival
// modelling. Parametrizations are constrained so the analytic mean is
// exactly 1; scv() is the squared coefficient of variation Var/Mean^2.
struct UnitDist {
    enum class Family { Exponential, Erlang, HyperExp2, Deterministic };

    Family family = Family::Exponential;
    int k = 1;                      // Erlang phase count
    double p1 = 0.5, r1 = 1.0, r2 = 1.0;  // HyperExp2 branch prob / rates

    static UnitDist exponential() { return UnitDist{Family::Exponential}; }
    static UnitDist deterministic() { return UnitDist{Family::Deterministic}; }
    static UnitDist erlang(int phases);
    // Balanced-means two-moment fit: p1/r1 = p2/r2, mean 1, SCV = target.
    static UnitDist hyperexp_from_scv(double target_scv);
    // Dispatch on an scv value used by experiment sweeps (0.5 / 1 / 5, ...).
    static UnitDist from_scv(double scv);

    double scv() const;
    // Laplace transform E[exp(-s X)], s >= 0. Defined for all families.
    double laplace(double s) const;
};

double sample(const UnitDist& dist, RngStream& rng);

}  // namespace liquar
