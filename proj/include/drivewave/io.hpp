#pragma once

// JSON and CSV views of library results.

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "analysis.hpp"
#include "si_wave.hpp"
#include "solver.hpp"
#include "sweep.hpp"

namespace drivewave {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::json;

namespace detail {

// JSON has no infinity; encode it as the string "inf".
inline json number_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

template <class T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

} // namespace detail

inline json to_json(const Parameters& p) {
    return {{"r", detail::number_or_inf(p.r)}, {"c", p.c}, {"s", p.s}, {"h", p.h}};
}

inline json to_json(const GridConfig& g) {
    return {{"L", g.length}, {"dx", g.dx}, {"dt", g.dt ? json(*g.dt) : json("auto")}, {"T", g.final_time},
            {"bc", "reflecting"}};
}

inline json to_json(const WaveReport& w) {
    json j = {{"outcome", to_string(w.outcome)},
              {"speed", detail::optional_json(w.speed)},
              {"stderr", w.std_error},
              {"wake_density", w.wake_density},
              {"stalled", w.stalled},
              {"displacement", w.displacement}};
    if (w.left_speed) {
        j["left_speed"] = *w.left_speed;
        j["left_stderr"] = w.left_stderr;
    }
    if (w.plateau) j["plateau"] = *w.plateau;
    return j;
}

inline json to_json(const SolverDiagnostics& d) {
    return {{"steps", d.steps},
            {"dt", d.dt},
            {"min_before_clamp", d.min_before_clamp},
            {"clamp_total", d.clamp_total},
            {"window_shift", d.window_shift}};
}

inline json to_json(const Thresholds& t) {
    return {{"timing", to_string(t.timing)},
            {"A_over_s", t.a_factor},
            {"A_sign", t.a_sign()},
            {"s1", detail::number_or_inf(t.s1)},
            {"s2", detail::number_or_inf(t.s2)}};
}

inline json to_json(const SIParams& si) { return {{"beta1", si.beta1}, {"beta2", si.beta2}, {"gamma", si.gamma}}; }

inline json to_json(const SubSuperConstants& k) {
    return {{"L1", k.L1},       {"L2", k.L2}, {"L3", k.L3},
            {"M", k.M},         {"lambda", k.lambda},
            {"v", k.v},         {"z1", k.z1}, {"z2", k.z2},
            {"cond2_sup", k.cond2_sup}, {"cond4_sup", k.cond4_sup}};
}

inline json to_json(const SubSuperReport& r) {
    json conds = json::array();
    const char* names[] = {"i", "ii", "iii", "iv"};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& c = r.conditions[i];
        conds.push_back({{"condition", names[i]},
                         {"worst_margin", c.worst},
                         {"at", c.at},
                         {"roundoff", c.roundoff},
                         {"active_worst_margin", std::isinf(c.active_worst) ? json(nullptr) : json(c.active_worst)},
                         {"violations", c.violations},
                         {"holds", c.holds()}});
    }
    return {{"conditions", conds},
            {"z_min", r.z_min},
            {"z_max", r.z_max},
            {"n_points", r.n_points},
            {"breakpoints_inside", r.breakpoints_inside},
            {"holds", r.holds()}};
}

inline json to_json(const Axis& a) {
    return {{"min", a.min}, {"max", a.max}, {"count", a.count}, {"log", a.log}};
}

inline json to_json(const SweepSpec& sp) {
    return {{"timing", to_string(sp.timing)},
            {"c", sp.c},
            {"h", sp.h},
            {"s_axis", to_json(sp.s_axis)},
            {"r_axis", to_json(sp.r_axis)},
            {"include_r0", sp.include_r0},
            {"include_rinf", sp.include_rinf},
            {"dx", sp.dx},
            {"min_travel", sp.min_travel},
            {"max_time", sp.max_time},
            {"representation", to_string(sp.representation)}};
}

inline json to_json(const Overlays& ov) {
    json curves = json::object();
    for (const Curve& c : ov.curves) {
        json pts = json::array();
        for (const auto& [s, r] : c.points) pts.push_back({{"s", s}, {"r", r}});
        curves[c.name] = pts;
    }
    return {{"curves", curves},
            {"s1", detail::optional_json(ov.s1)},
            {"s2", detail::optional_json(ov.s2)},
            {"pulled_set_boundary", ov.pulled_set_boundary}};
}

inline json cell_diagnostics(const SweepTable& t) {
    json cells = json::array();
    for (const SweepCell& c : t.cells) {
        json j = {{"s", c.s},
                  {"r", detail::number_or_inf(c.r)},
                  {"outcome", c.outcome ? to_string(*c.outcome) : "ERROR"},
                  {"speed", detail::optional_json(c.speed)},
                  {"left_speed", detail::optional_json(c.left_speed)},
                  {"plateau", detail::optional_json(c.plateau)},
                  {"stalled", c.stalled}};
        if (!c.error.empty()) j["error"] = c.error;
        cells.push_back(std::move(j));
    }
    return cells;
}

// Columns: t, x, then one column per component.
inline std::string trajectory_csv(const Trajectory& tr) {
    std::string out = "t,x";
    for (const auto& n : tr.names) out += "," + n;
    out += "\n";
    char buf[64];
    for (const Profile& p : tr.snapshots) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.10g,%.10g", p.t, p.x(i));
            out += buf;
            for (const auto& comp : p.components) {
                std::snprintf(buf, sizeof buf, ",%.10g", comp[i]);
                out += buf;
            }
            out += "\n";
        }
    }
    return out;
}

// Front position at level 0.5 and the maxima, one row per sample.
inline std::string fronts_csv(const Trajectory& tr) {
    std::string out = "t,front,max_drive,max_total\n";
    const std::size_t k = nearest_level(tr.levels, 0.5);
    char buf[128];
    for (const FrontSample& s : tr.samples) {
        if (std::isnan(s.right[k]))
            std::snprintf(buf, sizeof buf, "%.10g,,%.10g,%.10g\n", s.t, s.max_drive, s.max_total);
        else
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g\n", s.t, s.right[k], s.max_drive, s.max_total);
        out += buf;
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::config, "cannot open " + path + " for writing");
    f << content;
    if (!f) throw Error(ErrorKind::config, "failed writing " + path);
}

} // namespace drivewave
