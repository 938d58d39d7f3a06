#pragma once

#include <optional>
#include <string>
#include <vector>

#include "liquar/engine.hpp"

namespace liquar {

// Predict-then-optimize settings attached to a config when the experiment
// includes a PTO baseline.
struct PtoSettings {
    std::vector<double> thetas{0.003, 0.009, 0.015, 0.06, 0.15};
    int m = 3;                    // price-grid size (>= #demand parameters)
    double mu_explore = 0;        // 0 = box midpoint
    double chunk_length = 20000;  // ledger resolution of long phases
};

// Everything a reproducible experiment needs. Round-trips losslessly
// through JSON; stability is validated at load.
struct ExperimentConfig {
    std::string name = "custom";
    DemandModel demand = DemandModel::logit(10, 4.1, 1);
    StaffingCost cost{};
    double h0 = 1.0;
    UnitDist service = UnitDist::exponential();
    ArrivalProcess::Kind arrival_kind = ArrivalProcess::Kind::Poisson;
    UnitDist interarrival = UnitDist::exponential();
    FeasibleBox box{6.5, 10.0, 3.5, 7.0};
    HyperSchedule schedule{};
    Policy init{10.0, 5.0};
    double w1 = 0.0;
    int replications = 10;
    std::optional<PtoSettings> pto;

    EngineConfig engine() const;
    void validate() const;
};

std::string to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

// Named experiment presets; sweeps return one config per setting.
std::vector<ExperimentConfig> preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace liquar
