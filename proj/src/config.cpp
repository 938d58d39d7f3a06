#include "liquar/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace liquar {

using nlohmann::json;

namespace {

json dist_to_json(const UnitDist& d) {
    switch (d.family) {
        case UnitDist::Family::Exponential: return {{"family", "exponential"}};
        case UnitDist::Family::Deterministic: return {{"family", "deterministic"}};
        case UnitDist::Family::Erlang: return {{"family", "erlang"}, {"k", d.k}};
        case UnitDist::Family::HyperExp2:
            return {{"family", "hyperexp2"}, {"scv", d.scv()}};
    }
    return {};
}

UnitDist dist_from_json(const json& j, const std::string& key) {
    std::string fam = j.value("family", "");
    if (fam == "exponential") return UnitDist::exponential();
    if (fam == "deterministic") return UnitDist::deterministic();
    if (fam == "erlang") {
        if (!j.contains("k")) throw std::invalid_argument("config: " + key + ".k missing");
        return UnitDist::erlang(j.at("k").get<int>());
    }
    if (fam == "hyperexp2") {
        if (!j.contains("scv")) throw std::invalid_argument("config: " + key + ".scv missing");
        return UnitDist::hyperexp_from_scv(j.at("scv").get<double>());
    }
    throw std::invalid_argument("config: " + key + ".family unknown value '" + fam + "'");
}

json demand_to_json(const DemandModel& m) {
    json j{{"family", family_name(m.family)}};
    switch (m.family) {
        case DemandModel::Family::Linear: j["a"] = m.a; j["b"] = m.b; break;
        case DemandModel::Family::Quadratic: j["c"] = m.c; j["a"] = m.a; break;
        case DemandModel::Family::Exponential: j["a"] = m.a; j["b"] = m.b; break;
        case DemandModel::Family::Logit: j["M0"] = m.M0; j["a"] = m.a; j["b"] = m.b; break;
    }
    if (m.scale != 1.0) j["scale"] = m.scale;
    return j;
}

double need(const json& j, const char* section, const char* key) {
    if (!j.contains(key))
        throw std::invalid_argument(std::string("config: ") + section + "." + key + " missing");
    if (!j.at(key).is_number())
        throw std::invalid_argument(std::string("config: ") + section + "." + key +
                                    " must be a number");
    return j.at(key).get<double>();
}

DemandModel demand_from_json(const json& j) {
    std::string fam = j.value("family", "");
    DemandModel m;
    if (fam == "linear")
        m = DemandModel::linear(need(j, "demand", "a"), need(j, "demand", "b"));
    else if (fam == "quadratic")
        m = DemandModel::quadratic(need(j, "demand", "c"), need(j, "demand", "a"));
    else if (fam == "exponential")
        m = DemandModel::exponential(need(j, "demand", "a"), need(j, "demand", "b"));
    else if (fam == "logit")
        m = DemandModel::logit(need(j, "demand", "M0"), need(j, "demand", "a"),
                               need(j, "demand", "b"));
    else
        throw std::invalid_argument("config: demand.family unknown value '" + fam + "'");
    if (j.contains("scale")) m = m.scaled(j.at("scale").get<double>());
    return m;
}

}  // namespace

EngineConfig ExperimentConfig::engine() const {
    EngineConfig e;
    e.demand = demand;
    e.cost = cost;
    e.h0 = h0;
    e.service = service;
    e.arrival_kind = arrival_kind;
    e.interarrival = interarrival;
    e.box = box;
    e.schedule = schedule;
    e.x1 = init;
    e.w1 = w1;
    return e;
}

void ExperimentConfig::validate() const {
    box.validate(demand);
    if (!box.contains(init))
        throw std::invalid_argument("config: init outside the feasible box");
    if (h0 < 0) throw std::invalid_argument("config: h0 must be nonnegative");
    if (schedule.L < 1) throw std::invalid_argument("config: schedule.L must be >= 1");
    if (!(schedule.alpha >= 0.0 && schedule.alpha < 0.5))
        throw std::invalid_argument("config: schedule.alpha must lie in [0, 1/2)");
    if (w1 < 0) throw std::invalid_argument("config: w1 must be nonnegative");
    if (pto) {
        int n_params = demand.family == DemandModel::Family::Logit ? 3 : 2;
        if (pto->m < n_params)
            throw std::invalid_argument("config: pto.m smaller than the parameter count");
        for (double th : pto->thetas)
            if (!(th > 0 && th < 1))
                throw std::invalid_argument("config: pto.thetas entries must lie in (0,1)");
    }
}

std::string to_json(const ExperimentConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["demand"] = demand_to_json(cfg.demand);
    j["cost"] = {{"form", "linear"}, {"c0", cfg.cost.c0}};
    j["h0"] = cfg.h0;
    j["service"] = dist_to_json(cfg.service);
    j["arrivals"] = cfg.arrival_kind == ArrivalProcess::Kind::Poisson
                        ? json{{"kind", "poisson"}}
                        : json{{"kind", "renewal"}, {"interarrival", dist_to_json(cfg.interarrival)}};
    j["box"] = {{"mu_lo", cfg.box.mu_lo},
                {"mu_hi", cfg.box.mu_hi},
                {"p_lo", cfg.box.p_lo},
                {"p_hi", cfg.box.p_hi}};
    j["schedule"] = {{"c_eta", cfg.schedule.c_eta}, {"a", cfg.schedule.a},
                     {"c_T", cfg.schedule.c_T},     {"b", cfg.schedule.b},
                     {"c_delta", cfg.schedule.c_delta}, {"c", cfg.schedule.c},
                     {"delta_cap", cfg.schedule.delta_cap}, {"alpha", cfg.schedule.alpha},
                     {"L", cfg.schedule.L}};
    j["init"] = {{"mu", cfg.init.mu}, {"p", cfg.init.p}};
    j["w1"] = cfg.w1;
    j["replications"] = cfg.replications;
    if (cfg.pto) {
        j["pto"] = {{"thetas", cfg.pto->thetas},
                    {"m", cfg.pto->m},
                    {"mu_explore", cfg.pto->mu_explore},
                    {"chunk_length", cfg.pto->chunk_length}};
    }
    return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.name = j.value("name", "custom");
    if (!j.contains("demand")) throw std::invalid_argument("config: demand missing");
    cfg.demand = demand_from_json(j.at("demand"));
    if (j.contains("cost")) cfg.cost.c0 = need(j.at("cost"), "cost", "c0");
    if (j.contains("h0")) cfg.h0 = j.at("h0").get<double>();
    if (j.contains("service")) cfg.service = dist_from_json(j.at("service"), "service");
    if (j.contains("arrivals")) {
        std::string kind = j.at("arrivals").value("kind", "poisson");
        if (kind == "poisson") {
            cfg.arrival_kind = ArrivalProcess::Kind::Poisson;
        } else if (kind == "renewal") {
            cfg.arrival_kind = ArrivalProcess::Kind::Renewal;
            if (!j.at("arrivals").contains("interarrival"))
                throw std::invalid_argument("config: arrivals.interarrival missing");
            cfg.interarrival = dist_from_json(j.at("arrivals").at("interarrival"),
                                              "arrivals.interarrival");
        } else {
            throw std::invalid_argument("config: arrivals.kind unknown value '" + kind + "'");
        }
    }
    if (!j.contains("box")) throw std::invalid_argument("config: box missing");
    const json& jb = j.at("box");
    cfg.box = {need(jb, "box", "mu_lo"), need(jb, "box", "mu_hi"), need(jb, "box", "p_lo"),
               need(jb, "box", "p_hi")};
    if (j.contains("schedule")) {
        const json& js = j.at("schedule");
        HyperSchedule& s = cfg.schedule;
        if (js.contains("c_eta")) s.c_eta = js.at("c_eta").get<double>();
        if (js.contains("a")) s.a = js.at("a").get<double>();
        if (js.contains("c_T")) s.c_T = js.at("c_T").get<double>();
        if (js.contains("b")) s.b = js.at("b").get<double>();
        if (js.contains("c_delta")) s.c_delta = js.at("c_delta").get<double>();
        if (js.contains("c")) s.c = js.at("c").get<double>();
        if (js.contains("delta_cap")) s.delta_cap = js.at("delta_cap").get<double>();
        if (js.contains("alpha")) s.alpha = js.at("alpha").get<double>();
        if (js.contains("L")) s.L = js.at("L").get<int>();
    }
    if (j.contains("init"))
        cfg.init = {need(j.at("init"), "init", "mu"), need(j.at("init"), "init", "p")};
    if (j.contains("w1")) cfg.w1 = j.at("w1").get<double>();
    if (j.contains("replications")) cfg.replications = j.at("replications").get<int>();
    if (j.contains("pto")) {
        PtoSettings ps;
        const json& jp = j.at("pto");
        if (jp.contains("thetas")) ps.thetas = jp.at("thetas").get<std::vector<double>>();
        if (jp.contains("m")) ps.m = jp.at("m").get<int>();
        if (jp.contains("mu_explore")) ps.mu_explore = jp.at("mu_explore").get<double>();
        if (jp.contains("chunk_length")) ps.chunk_length = jp.at("chunk_length").get<double>();
        cfg.pto = ps;
    }
    cfg.demand = cfg.demand.restricted(cfg.box.p_lo, cfg.box.p_hi);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("config: cannot write file '" + path + "'");
    out << to_json(cfg);
}

namespace {

ExperimentConfig base_config() {
    ExperimentConfig cfg;
    cfg.name = "base-6.1";
    cfg.demand = DemandModel::logit(10, 4.1, 1).restricted(3.5, 7.0);
    cfg.cost.c0 = 1.0;
    cfg.h0 = 1.0;
    cfg.service = UnitDist::exponential();
    cfg.box = {6.5, 10.0, 3.5, 7.0};
    cfg.schedule = HyperSchedule{};  // eta 4/k, T 200 k^{1/3}, delta min(.1,.5k^{-1/3})
    cfg.init = {10.0, 5.0};
    cfg.replications = 100;
    return cfg;
}

ExperimentConfig desk(ExperimentConfig cfg) {
    cfg.name += "-desk";
    cfg.schedule.c_T = 50.0;
    cfg.schedule.L = 300;
    cfg.replications = 10;
    return cfg;
}

}  // namespace

std::vector<ExperimentConfig> preset(const std::string& name) {
    if (name == "base-6.1") return {base_config()};
    if (name == "base-6.1-desk") return {desk(base_config())};
    if (name == "step-sweep-6.2.1" || name == "step-sweep-6.2.1-desk") {
        std::vector<ExperimentConfig> out;
        for (double c : {0.6, 1.0, 1.2}) {
            ExperimentConfig cfg = base_config();
            cfg.schedule.c_eta = c * 4.0;
            cfg.schedule.c_delta = c * 0.5;
            cfg.name = "step-sweep-6.2.1-c" + std::to_string(c).substr(0, 3);
            if (name.ends_with("-desk")) {
                cfg.schedule.L = 300;
                cfg.replications = 10;
                cfg.name += "-desk";
            }
            out.push_back(cfg);
        }
        return out;
    }
    if (name == "cycle-sweep-6.2.2" || name == "cycle-sweep-6.2.2-desk") {
        std::vector<ExperimentConfig> out;
        for (double T : {40.0, 200.0, 360.0}) {
            ExperimentConfig cfg = base_config();
            cfg.schedule.c_T = T;
            // equal total running time across sweep members
            cfg.schedule.L = static_cast<int>(std::ceil(1000.0 * std::pow(200.0 / T, 0.75)));
            cfg.name = "cycle-sweep-6.2.2-T" + std::to_string(static_cast<int>(T));
            if (name.ends_with("-desk")) {
                cfg.schedule.L = static_cast<int>(std::ceil(300.0 * std::pow(200.0 / T, 0.75)));
                cfg.replications = 10;
                cfg.name += "-desk";
            }
            out.push_back(cfg);
        }
        return out;
    }
    if (name == "pto-6.3-light" || name == "pto-6.3-heavy") {
        ExperimentConfig cfg = base_config();
        cfg.name = name;
        cfg.h0 = name.ends_with("heavy") ? 0.001 : 1.0;
        cfg.init = {10.0, 7.0};
        cfg.replications = 10;
        cfg.pto = PtoSettings{};
        return {cfg};
    }
    if (name == "e2m1-6.4" || name == "e2m1-6.4-desk") {
        ExperimentConfig cfg = base_config();
        cfg.name = "e2m1-6.4";
        cfg.arrival_kind = ArrivalProcess::Kind::Renewal;
        cfg.interarrival = UnitDist::erlang(2);
        if (name.ends_with("-desk")) {
            cfg.name += "-desk";
            cfg.schedule.L = 300;
            cfg.replications = 5;
        }
        return {cfg};
    }
    if (name == "robustness-C" || name == "robustness-C-desk") {
        std::vector<ExperimentConfig> out;
        for (double h0 : {0.001, 0.02, 1.0}) {
            for (double scv : {0.5, 1.0, 5.0}) {
                ExperimentConfig cfg = base_config();
                cfg.h0 = h0;
                cfg.service = UnitDist::from_scv(scv);
                char buf[64];
                std::snprintf(buf, sizeof(buf), "robustness-C-h%g-scv%g", h0, scv);
                cfg.name = buf;
                if (name.ends_with("-desk")) {
                    cfg.name += "-desk";
                    cfg.schedule.L = 200;
                    cfg.replications = 10;
                }
                out.push_back(cfg);
            }
        }
        return out;
    }
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("preset: unknown name '" + name + "'; known presets: " + known);
}

std::vector<std::string> preset_names() {
    return {"base-6.1",        "base-6.1-desk",        "step-sweep-6.2.1",
            "step-sweep-6.2.1-desk", "cycle-sweep-6.2.2", "cycle-sweep-6.2.2-desk",
            "pto-6.3-light",   "pto-6.3-heavy",        "e2m1-6.4",
            "e2m1-6.4-desk",   "robustness-C",         "robustness-C-desk"};
}

}  // namespace liquar
