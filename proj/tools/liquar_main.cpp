// Command-line front end: reproducible experiments from JSON configs.
// Exit codes: 0 ok, 1 runtime failure, 2 configuration error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "liquar/config.hpp"
#include "liquar/harness.hpp"
#include "liquar/pto.hpp"

namespace fs = std::filesystem;
using namespace liquar;

namespace {

ExperimentConfig resolve_config(const std::string& config_path, const std::string& preset_name) {
    if (!config_path.empty()) return load_config(config_path);
    if (!preset_name.empty()) return preset(preset_name)[0];
    throw std::invalid_argument("config: pass --config FILE or --preset NAME");
}

Optimum solve_for(const ExperimentConfig& cfg) {
    if (cfg.arrival_kind == ArrivalProcess::Kind::Poisson)
        return solve_optimal(cfg.demand, cfg.cost, cfg.h0, cfg.service.scv(), Rect::of(cfg.box));
    return solve_optimal_gim1(cfg.demand, cfg.cost, cfg.h0, cfg.interarrival, Rect::of(cfg.box));
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

fs::path prepare_out_dir(const std::string& out, const ExperimentConfig& cfg,
                         std::uint64_t seed) {
    fs::path dir = out.empty() ? fs::path(cfg.name + "-seed" + std::to_string(seed)) : fs::path(out);
    fs::create_directories(dir);
    write_file(dir / "config.json", to_json(cfg));
    write_file(dir / "seed.txt", std::to_string(seed) + "\n");
    return dir;
}

// minimal polyline chart; layout is plumbing, not part of the measurement path
void write_regret_svg(const fs::path& path, const RegretReport& rep) {
    const double W = 720, H = 420, mL = 60, mB = 40, mT = 20, mR = 20;
    double tmax = rep.t.back();
    double rmax = 1e-12, rmin = 0;
    for (double r : rep.R) rmax = std::max(rmax, r);
    for (double r : rep.band_hi) rmax = std::max(rmax, r);
    for (double r : rep.band_lo) rmin = std::min(rmin, r);
    auto X = [&](double t) { return mL + (W - mL - mR) * t / tmax; };
    auto Y = [&](double r) { return H - mB - (H - mB - mT) * (r - rmin) / (rmax - rmin); };
    std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(int(W)) +
                      "' height='" + std::to_string(int(H)) + "'>\n";
    svg += "<rect width='100%' height='100%' fill='white'/>\n";
    auto polyline = [&](const std::vector<double>& ys, const char* color, double width) {
        std::string pts;
        for (std::size_t i = 0; i < rep.t.size(); ++i)
            pts += std::to_string(X(rep.t[i])) + "," + std::to_string(Y(ys[i])) + " ";
        svg += "<polyline fill='none' stroke='" + std::string(color) + "' stroke-width='" +
               std::to_string(width) + "' points='" + pts + "'/>\n";
    };
    if (rep.band_lo.size() == rep.t.size()) {
        polyline(rep.band_lo, "#bbccee", 1.0);
        polyline(rep.band_hi, "#bbccee", 1.0);
    }
    polyline(rep.R, "#224488", 2.0);
    svg += "<line x1='" + std::to_string(mL) + "' y1='" + std::to_string(H - mB) + "' x2='" +
           std::to_string(W - mR) + "' y2='" + std::to_string(H - mB) + "' stroke='black'/>\n";
    svg += "<line x1='" + std::to_string(mL) + "' y1='" + std::to_string(mT) + "' x2='" +
           std::to_string(mL) + "' y2='" + std::to_string(H - mB) + "' stroke='black'/>\n";
    char label[160];
    std::snprintf(label, sizeof(label),
                  "<text x='%g' y='%g' font-size='12'>time %.3g, mean regret %.4g, slope %.3f</text>\n",
                  mL + 8, mT + 14, tmax, rep.R.back(), rep.slope);
    svg += label;
    svg += "</svg>\n";
    write_file(path, svg);
}

int cmd_solve_optimal(const ExperimentConfig& cfg) {
    Optimum opt = solve_for(cfg);
    std::printf("mu*=%.6g p*=%.6g f*=%.8g profit*=%.8g rho*=%.6g grad_norm=%.2e\n", opt.x.mu,
                opt.x.p, opt.f, opt.profit, opt.rho, opt.grad_norm);
    if (cfg.arrival_kind == ArrivalProcess::Kind::Renewal) {
        double lam = eval(cfg.demand, opt.x.p);
        Gim1Result g = gim1_steady_state(cfg.interarrival, lam, opt.x.mu);
        std::printf("gi/m/1 at the optimum: sigma=%.8g workload(time-avg)=%.6g "
                    "workload(arrival-avg)=%.6g\n",
                    g.sigma, g.workload_time_avg, g.workload_arrival_avg);
    }
    return 0;
}

int cmd_run_liquar(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& out) {
    Optimum star = solve_for(cfg);
    RunResult run = run_liquar(cfg.engine(), seed);
    RegretReport rep = regret_curve(ledger_of(run), star.f);

    fs::path dir = prepare_out_dir(out, cfg, seed);
    std::ofstream cyc(dir / "cycles.csv"), itr(dir / "iterations.csv"), reg(dir / "regret.csv");
    run.write_cycles_csv(cyc);
    run.write_iterations_csv(itr);
    rep.write_csv(reg);
    char summary[512];
    std::snprintf(summary, sizeof(summary),
                  "{\"final\":{\"mu\":%.10g,\"p\":%.10g},\"x_star\":{\"mu\":%.10g,\"p\":%.10g},"
                  "\"final_distance\":%.6g,\"regret\":%.10g,\"relative_regret\":%.6g,"
                  "\"slope\":%.6g}\n",
                  run.final_policy.mu, run.final_policy.p, star.x.mu, star.x.p,
                  std::hypot(run.final_policy.mu - star.x.mu, run.final_policy.p - star.x.p),
                  rep.R.back(), rep.final_relative_regret(), rep.slope);
    write_file(dir / "summary.json", summary);
    std::printf("run %s: final=(%.4g, %.4g) distance=%.4g regret=%.6g rel=%.4g -> %s\n",
                cfg.name.c_str(), run.final_policy.mu, run.final_policy.p,
                std::hypot(run.final_policy.mu - star.x.mu, run.final_policy.p - star.x.p),
                rep.R.back(), rep.final_relative_regret(), dir.string().c_str());
    return 0;
}

int cmd_run_pto(const ExperimentConfig& cfg, double theta, int m, std::uint64_t seed,
                const std::string& out) {
    PtoRun run;
    run.theta = theta;
    run.m = m;
    PtoSettings ps = cfg.pto.value_or(PtoSettings{});
    run.mu_explore = ps.mu_explore;
    run.chunk_length = ps.chunk_length;
    // equal total time to the configured learning horizon
    double total = 0;
    for (int k = 1; k <= cfg.schedule.L; ++k) total += 2.0 * cfg.schedule.T(k);
    run.total_time = total;

    Optimum star = solve_for(cfg);
    PtoResult res = run_ppto(cfg, run, seed);
    RegretReport rep = regret_curve(res.ledger, star.f);

    fs::path dir = prepare_out_dir(out, cfg, seed);
    std::ofstream led(dir / "pto_ledger.csv"), reg(dir / "regret.csv");
    res.write_ledger_csv(led);
    rep.write_csv(reg);
    write_file(dir / "pto_summary.json", res.summary_json() + "\n");
    std::printf("pto %s theta=%g m=%d: x_hat=(%.4g, %.4g) regret=%.6g rel=%.4g -> %s\n",
                cfg.name.c_str(), theta, m, res.x_hat.x.mu, res.x_hat.x.p, rep.R.back(),
                rep.final_relative_regret(), dir.string().c_str());
    return 0;
}

int cmd_replicate(const ExperimentConfig& cfg, int runs, std::uint64_t seed0, int jobs,
                  const std::string& out, const std::string& svg) {
    int n = runs > 0 ? runs : cfg.replications;
    RegretReport rep = replicate(cfg, n, seed0, jobs);
    std::printf("%s: %d runs, final mean regret %.6g, relative %.4g, slope %.4f\n",
                cfg.name.c_str(), n, rep.R.back(), rep.final_relative_regret(), rep.slope);
    if (!out.empty()) {
        fs::path dir = prepare_out_dir(out, cfg, seed0);
        std::ofstream reg(dir / "regret.csv");
        rep.write_csv(reg);
        char summary[256];
        std::snprintf(summary, sizeof(summary),
                      "{\"runs\":%d,\"slope\":%.6g,\"intercept\":%.6g,"
                      "\"final_relative_regret\":%.6g}\n",
                      n, rep.slope, rep.intercept, rep.final_relative_regret());
        write_file(dir / "summary.json", summary);
        if (!svg.empty()) write_regret_svg(dir / svg, rep);
    } else if (!svg.empty()) {
        write_regret_svg(svg, rep);
    }
    return 0;
}

int cmd_sensitivity(double epsilon, const std::vector<double>& h0_list) {
    DemandModel demand = DemandModel::logit(10, 4.1, 1);
    StaffingCost cost{};
    Rect wide{0.5, 25.0, 0.5, 10.0};
    auto rows = sensitivity_misspecification(demand, cost, 1.0, epsilon, h0_list, wide);
    std::printf("%-10s %-8s %-12s %-12s %s\n", "h0", "rho*", "loss", "workload_err", "stable");
    for (const auto& r : rows) {
        if (r.believed_stable)
            std::printf("%-10.4g %-8.4f %-12.6g %-12.6g yes\n", r.h0, r.rho_star, r.loss,
                        r.workload_err);
        else
            std::printf("%-10.4g %-8.4f %-12s %-12.6g no (true queue unstable)\n", r.h0,
                        r.rho_star, "inf", r.workload_err);
    }
    return 0;
}

int cmd_check_assumptions(const ExperimentConfig& cfg) {
    AssumptionReport rep = check_assumption1a(cfg.demand, cfg.box, cfg.h0, cfg.service.scv());
    std::printf("slope conditions: %s (min slack %.4g at p=%.4g; hessian slack %.4g at "
                "mu=%.4g p=%.4g)\n",
                rep.holds ? "hold" : "FAIL", rep.min_slack_slope, rep.worst_slope_p,
                rep.min_slack_hessian, rep.worst_hessian.mu, rep.worst_hessian.p);
    ConvexityReport conv = convexity_report(cfg.demand, cfg.cost, cfg.h0, cfg.service.scv(),
                                            Rect::of(cfg.box));
    std::printf("convexity on the box: %s (min det %.4g at (%.4g, %.4g); min f_pp %.4g; "
                "empirical K0 %.4g)\n",
                conv.convex ? "convex" : "NOT convex", conv.min_det, conv.argmin_det.mu,
                conv.argmin_det.p, conv.min_fpp, conv.k0);
    std::printf("x* = (%.4g, %.4g), f* = %.6g\n", conv.x_star.x.mu, conv.x_star.x.p,
                conv.x_star.f);
    return 0;
}

int cmd_validate_sim(std::uint64_t seed) {
    int failures = 0;
    auto report = [&](const char* name, bool ok, double value, double bound) {
        std::printf("%-34s %s (%.6g vs %.6g)\n", name, ok ? "pass" : "FAIL", value, bound);
        failures += !ok;
    };

    // pk matching at three loads
    for (double rho : {0.5, 0.7, 0.9}) {
        RngStream rng(seed, static_cast<std::uint64_t>(rho * 100));
        ArrivalProcess ap = ArrivalProcess::poisson(rho);
        double integral = 0, w = 0;
        const double horizon = 1e6;
        const int chunks = 100;
        for (int i = 0; i < chunks; ++i) {
            RngStream crng = rng.fork(i);
            CycleTrace t = simulate_cycle(w, {1.0, 1.0}, horizon / chunks, ap,
                                          UnitDist::exponential(), crng);
            integral += workload_integral(t, 0, t.duration);
            w = t.w_end;
        }
        double avg = integral / horizon;
        double pk = pk_mean_workload(rho, 1.0, 1.0);
        char name[64];
        std::snprintf(name, sizeof(name), "pk match rho=%.1f", rho);
        report(name, std::abs(avg - pk) / pk < 0.02, avg, pk);
    }

    // work conservation on a long trace
    RngStream rng(seed, 777);
    ArrivalProcess ap = ArrivalProcess::poisson(0.8);
    CycleTrace t = simulate_cycle(3.0, {1.0, 1.0}, 1e5, ap, UnitDist::hyperexp_from_scv(5), rng);
    double total_v = 0;
    for (const auto& a : t.arrivals) total_v += a.work;
    double lhs = t.w0 + total_v - t.w_end;
    double rhs = t.policy.mu * t.busy_time();
    report("work conservation", std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, rhs), lhs, rhs);

    return failures == 0 ? 0 : 1;
}

int cmd_presets(const std::string& dump_dir) {
    if (dump_dir.empty()) {
        for (const auto& n : preset_names()) std::printf("%s\n", n.c_str());
        return 0;
    }
    fs::create_directories(dump_dir);
    for (const auto& n : preset_names()) {
        auto cfgs = preset(n);
        save_config(cfgs[0], (fs::path(dump_dir) / (n + ".json")).string());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"liquar: online learning for pricing and capacity sizing in a single-server queue"};
    app.require_subcommand(1);

    std::string config_path, preset_name, out_dir, svg_name;
    std::uint64_t seed = 42;
    std::uint64_t seed0 = 1;
    int runs = 0, jobs = 8, m = 3;
    double theta = 0.15, epsilon = 0.05;
    std::vector<double> h0_list{1.0, 0.3, 0.1, 0.05, 0.03, 0.022, 7.1e-4};

    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config JSON file");
        cmd->add_option("--preset", preset_name, "named preset instead of a config file");
    };

    CLI::App* solve = app.add_subcommand("solve-optimal", "ground-truth optimum of a config");
    add_config_opts(solve);

    CLI::App* runl = app.add_subcommand("run-liquar", "one learning run with full CSV output");
    add_config_opts(runl);
    runl->add_option("--seed", seed, "run seed");
    runl->add_option("--out", out_dir, "output directory");

    CLI::App* runp = app.add_subcommand("run-pto", "one predict-then-optimize run");
    add_config_opts(runp);
    runp->add_option("--theta", theta, "exploration ratio in (0,1)");
    runp->add_option("--m", m, "price grid size");
    runp->add_option("--seed", seed, "run seed");
    runp->add_option("--out", out_dir, "output directory");

    CLI::App* rep = app.add_subcommand("replicate", "averaged regret over seeded replications");
    add_config_opts(rep);
    rep->add_option("--runs", runs, "number of replications (default: config)");
    rep->add_option("--seed0", seed0, "first seed");
    rep->add_option("--jobs", jobs, "concurrent replications");
    rep->add_option("--out", out_dir, "output directory");
    rep->add_option("--svg", svg_name, "write a regret chart (file name)");

    CLI::App* sens = app.add_subcommand("sensitivity", "analytic misspecification table");
    sens->add_option("--epsilon", epsilon, "demand underestimation fraction");
    sens->add_option("--h0-list", h0_list, "holding costs to sweep")->expected(-1);

    CLI::App* chk = app.add_subcommand("check-assumptions", "slope-condition and convexity reports");
    add_config_opts(chk);

    CLI::App* val = app.add_subcommand("validate-sim", "simulator oracle suite");
    val->add_option("--seed", seed, "oracle seed");

    CLI::App* pre = app.add_subcommand("presets", "list presets or dump them as config files");
    pre->add_option("--dump", out_dir, "directory to write preset JSON files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve_optimal(resolve_config(config_path, preset_name));
        if (runl->parsed())
            return cmd_run_liquar(resolve_config(config_path, preset_name), seed, out_dir);
        if (runp->parsed())
            return cmd_run_pto(resolve_config(config_path, preset_name), theta, m, seed, out_dir);
        if (rep->parsed())
            return cmd_replicate(resolve_config(config_path, preset_name), runs, seed0, jobs,
                                 out_dir, svg_name);
        if (sens->parsed()) return cmd_sensitivity(epsilon, h0_list);
        if (chk->parsed()) return cmd_check_assumptions(resolve_config(config_path, preset_name));
        if (val->parsed()) return cmd_validate_sim(seed);
        if (pre->parsed()) return cmd_presets(out_dir);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
