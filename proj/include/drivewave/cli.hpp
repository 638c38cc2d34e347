#pragma once

// Command-line front end. run_cli is the whole program; tools/drivewave.cpp
// only forwards argv and the standard streams.
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure. Failures print a
// JSON object {"error": {"kind", "message", "details"}} on the error stream.

#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "analysis.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "si_wave.hpp"
#include "solver.hpp"
#include "sweep.hpp"

namespace drivewave {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

inline json config_echo(const RunConfig& cfg) {
    json j = to_key_values(cfg);
    j["command"] = to_string(cfg.command);
    return j;
}

// Re-parses an echoed config; the result compares equal to the original.
inline RunConfig config_from_echo(const json& echo) {
    KeyValues kv;
    std::optional<Command> cmd;
    for (const auto& [key, value] : echo.items()) {
        if (key == "command") cmd = parse_command(value.get<std::string>());
        else kv[key] = value.get<std::string>();
    }
    if (!cmd) throw Error(ErrorKind::config, "echo has no valid command");
    Violations v;
    RunConfig cfg = resolve_config(*cmd, kv, v);
    v.throw_if_any("invalid echoed config");
    return cfg;
}

// Thrown for --help and --version; carries the text to print.
struct HelpRequest {
    std::string text;
};

// Flags win over the config file; all violations are reported together.
inline RunConfig parse_config(int argc, const char* const* argv) {
    CLI::App app{"Reaction-diffusion gene drive laboratory", "drivewave"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    struct Sub {
        Command command;
        CLI::App* app;
        std::string config_path;
        std::vector<std::string> values;
        std::vector<CLI::Option*> options;
    };
    const std::vector<std::pair<Command, const char*>> commands = {
        {Command::simulate, "run one simulation and write trajectory and front CSVs"},
        {Command::speed, "measure the wave speed and print a report"},
        {Command::heatmap, "sweep (s, r) and write a speed heatmap"},
        {Command::regimes, "classify the (h, s) plane at r = inf"},
        {Command::thresholds, "print analytic thresholds and linearized speeds"},
        {Command::verify_si, "certify the SI sub- and super-solutions"},
    };
    const auto& keys = config_keys();
    std::vector<Sub> subs;
    subs.reserve(commands.size());
    for (const auto& [cmd, help] : commands) {
        Sub& sub = subs.emplace_back();
        sub.command = cmd;
        sub.app = app.add_subcommand(to_string(cmd), help);
        sub.app->set_help_flag("--help", "print this help"); // -h would clash with --h
        sub.app->add_option("--config", sub.config_path, "key=value config file");
        sub.values.resize(keys.size());
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (keys[i].is_switch)
                sub.options.push_back(sub.app->add_flag(keys[i].flag, keys[i].help));
            else
                sub.options.push_back(sub.app->add_option(keys[i].flag, sub.values[i], keys[i].help));
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        std::ostringstream os;
        app.exit(e, os, os);
        throw HelpRequest{os.str()};
    } catch (const CLI::ParseError& e) {
        throw Error(ErrorKind::config, e.what());
    }

    for (Sub& sub : subs) {
        if (!sub.app->parsed()) continue;
        Violations v;
        KeyValues kv;
        if (!sub.config_path.empty()) kv = read_kv_file(sub.config_path, v);
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (sub.options[i]->count() > 0) kv[keys[i].key] = keys[i].is_switch ? "true" : sub.values[i];
        RunConfig cfg = resolve_config(sub.command, kv, v);
        v.throw_if_any("invalid configuration");
        return cfg;
    }
    throw Error(ErrorKind::config, "no subcommand given");
}

namespace detail {

inline RunOptions run_options(const RunConfig& cfg) {
    RunOptions opt;
    opt.sample_interval = cfg.sample_interval;
    opt.moving_window = cfg.moving_window;
    opt.snapshot_times = cfg.snapshots;
    return opt;
}

inline json linearized_json(const RunConfig& cfg) {
    const Parameters p = cfg.params();
    return {{"drive", optional_json(linearized_speed_drive(cfg.timing, p))},
            {"wildtype", p.infinite_r() ? json(nullptr) : optional_json(linearized_speed_wildtype(cfg.timing, p))}};
}

inline void declare(json& summary, const std::string& path) { summary["artifacts"].push_back(path); }

inline int cmd_simulate(RunConfig cfg, std::ostream& out) {
    if (cfg.snapshots.empty()) {
        const double T = cfg.final_time;
        cfg.snapshots = {0.0, 0.25 * T, 0.5 * T, 0.75 * T, T};
    }
    const Trajectory tr = simulate(cfg.timing, cfg.params(), cfg.representation, cfg.grid(), run_options(cfg));
    json run = {{"version", kVersion},
                {"config", config_echo(cfg)},
                {"grid", to_json(cfg.grid())},
                {"diagnostics", to_json(tr.diagnostics)},
                {"components", tr.names}};
    try {
        run["report"] = to_json(detect_outcome(tr));
    } catch (const Error& e) {
        run["report"] = nullptr;
        run["report_error"] = e.what();
    }
    json summary = {{"command", "simulate"}, {"artifacts", json::array()}};
    const std::string traj = cfg.prefix + "_trajectory.csv";
    const std::string fronts = cfg.prefix + "_fronts.csv";
    const std::string side = cfg.prefix + "_run.json";
    write_file(traj, trajectory_csv(tr));
    write_file(fronts, fronts_csv(tr));
    write_file(side, run.dump(2) + "\n");
    declare(summary, traj);
    declare(summary, fronts);
    declare(summary, side);
    summary["report"] = run["report"];
    out << summary.dump(2) << "\n";
    return kExitOk;
}

inline int cmd_speed(const RunConfig& cfg, std::ostream& out) {
    const Trajectory tr = simulate(cfg.timing, cfg.params(), cfg.representation, cfg.grid(), run_options(cfg));
    json j = to_json(detect_outcome(tr));
    j["linearized_speed"] = linearized_json(cfg);
    j["diagnostics"] = to_json(tr.diagnostics);
    j["config"] = config_echo(cfg);
    j["version"] = kVersion;
    out << j.dump(2) << "\n";
    return kExitOk;
}

inline int cmd_heatmap(const RunConfig& cfg, std::ostream& out) {
    const SweepTable table = run_heatmap(cfg.sweep, cfg.threads);
    const json side = {{"version", kVersion},
                       {"sweep", to_json(cfg.sweep)},
                       {"overlays", to_json(overlay_lines(cfg.sweep))},
                       {"cells", cell_diagnostics(table)},
                       {"config", config_echo(cfg)}};
    const std::string csv = cfg.prefix + "_heatmap.csv";
    const std::string sidecar = cfg.prefix + "_overlays.json";
    write_file(csv, heatmap_csv(table));
    write_file(sidecar, side.dump(2) + "\n");
    std::size_t failed = 0;
    for (const SweepCell& c : table.cells) failed += c.outcome ? 0 : 1;
    json summary = {{"command", "heatmap"},
                    {"artifacts", json::array()},
                    {"cells", table.cells.size()},
                    {"failed_cells", failed}};
    declare(summary, csv);
    declare(summary, sidecar);
    out << summary.dump(2) << "\n";
    return kExitOk;
}

inline int cmd_regimes(const RunConfig& cfg, std::ostream& out) {
    const RegimeTable table = run_regime_map(cfg.timing, cfg.c, cfg.h_axis, cfg.sweep.s_axis);
    const std::string csv = cfg.prefix + "_regimes.csv";
    write_file(csv, regime_csv(table));
    std::map<std::string, int> counts;
    for (const auto& r : table.cells) ++counts[r ? to_string(*r) : "BOUNDARY"];
    json summary = {{"command", "regimes"}, {"artifacts", json::array()}, {"counts", counts},
                    {"config", config_echo(cfg)}};
    declare(summary, csv);
    out << summary.dump(2) << "\n";
    return kExitOk;
}

inline int cmd_thresholds(const RunConfig& cfg, std::ostream& out) {
    const Thresholds th = thresholds(cfg.timing, cfg.c, cfg.h);
    json j = to_json(th);
    j["c"] = conversion(cfg.timing, cfg.c);
    j["h"] = cfg.h;

    // Pulled-set boundary over the whole open s range.
    SweepSpec sp;
    sp.timing = cfg.timing;
    sp.c = cfg.c;
    sp.h = cfg.h;
    sp.s_axis = {1e-3, 1.0 - 1e-3, 1000, false};
    j["pulled_set_boundary"] = overlay_lines(sp).pulled_set_boundary;

    if (cfg.s) {
        const double s = *cfg.s;
        const Parameters p = cfg.params();
        j["s"] = s;
        j["r"] = number_or_inf(cfg.r);
        j["linearized_speed"] = linearized_json(cfg);
        j["pulled_set"] = pulled_set_contains(cfg.timing, cfg.c, cfg.h, s);
        j["regime"] = on_threshold(th, s) ? json("BOUNDARY") : json(to_string(classify_regime(cfg.timing, cfg.c, cfg.h, s)));
        j["interior_equilibrium"] = optional_json(interior_equilibrium(cfg.timing, p));
        json persistence = {{"pure_drive_r", persistence_pure(s)}, {"drive_density", number_or_inf(drive_equilibrium_density(p))}};
        try {
            const EquilibriumReport eq = persistence_composite(cfg.timing, p);
            persistence["composite_r"] = eq.persistence_r;
            persistence["composite_n_star"] = eq.n_star;
        } catch (const Error&) {
            persistence["composite_r"] = nullptr;
        }
        j["persistence"] = persistence;
    }
    j["config"] = config_echo(cfg);
    j["version"] = kVersion;
    out << j.dump(2) << "\n";
    return kExitOk;
}

inline int cmd_verify_si(const RunConfig& cfg, std::ostream& out) {
    const SIParams si = cfg.si ? *cfg.si : si_params(cfg.timing, cfg.params());
    if (!(si.beta2 > si.gamma))
        throw Error(ErrorKind::config, "verify-si requires beta2 > gamma for the mapped model");
    const SubSuperConstants k = admissible_constants(si);
    const auto [zmin, zmax] = default_verification_range(k);
    const SubSuperReport rep = verify_subsuper(si, k, zmin, zmax, static_cast<std::size_t>(cfg.si_points));
    json j = {{"si", to_json(si)},
              {"critical_speed", optional_json(critical_speed(si))},
              {"constants", to_json(k)},
              {"report", to_json(rep)},
              {"config", config_echo(cfg)},
              {"version", kVersion}};
    out << j.dump(2) << "\n";
    return rep.holds() ? kExitOk : kExitNumerical;
}

inline void print_error(std::ostream& err, const std::string& kind, const std::string& message,
                        const std::vector<std::string>& details = {}) {
    err << json{{"error", {{"kind", kind}, {"message", message}, {"details", details}}}}.dump() << "\n";
}

} // namespace detail

inline int dispatch(const RunConfig& cfg, std::ostream& out) {
    switch (cfg.command) {
        case Command::simulate: return detail::cmd_simulate(cfg, out);
        case Command::speed: return detail::cmd_speed(cfg, out);
        case Command::heatmap: return detail::cmd_heatmap(cfg, out);
        case Command::regimes: return detail::cmd_regimes(cfg, out);
        case Command::thresholds: return detail::cmd_thresholds(cfg, out);
        case Command::verify_si: return detail::cmd_verify_si(cfg, out);
    }
    throw Error(ErrorKind::config, "unknown command");
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_config(argc, argv);
    } catch (const HelpRequest& h) {
        out << h.text;
        return kExitOk;
    } catch (const Error& e) {
        detail::print_error(err, "usage", e.what(), e.details());
        return kExitUsage;
    }
    try {
        return dispatch(cfg, out);
    } catch (const Error& e) {
        const bool usage = e.kind() == ErrorKind::config;
        detail::print_error(err, usage ? "usage" : to_string(e.kind()), e.what(), e.details());
        return usage ? kExitUsage : kExitNumerical;
    } catch (const std::exception& e) {
        detail::print_error(err, "internal", e.what());
        return kExitNumerical;
    }
}

} // namespace drivewave
