#pragma once

// Run configuration: a flat key=value map ("solver.dx=0.25") built from an
// optional config file and command-line flags, resolved into RunConfig.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "model_core.hpp"
#include "si_wave.hpp"
#include "solver.hpp"
#include "sweep.hpp"

namespace drivewave {

enum class Command { simulate, speed, heatmap, regimes, thresholds, verify_si };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::speed: return "speed";
        case Command::heatmap: return "heatmap";
        case Command::regimes: return "regimes";
        case Command::thresholds: return "thresholds";
        case Command::verify_si: return "verify-si";
    }
    return "unknown";
}

struct KeyInfo {
    const char* key;
    const char* flag;
    const char* help;
    bool is_switch = false;
};

// Every configurable key with its flag; a flag and a file entry set the same key.
inline const std::vector<KeyInfo>& config_keys() {
    static const std::vector<KeyInfo> keys = {
        {"model.timing", "--timing", "zygote | germline | perfect"},
        {"model.r", "--r", "intrinsic growth rate, >= 0 or inf"},
        {"model.c", "--c", "conversion probability in [0,1]"},
        {"model.s", "--s", "drive fitness cost in (0,1)"},
        {"model.h", "--h", "dominance in [0,1]"},
        {"solver.representation", "--representation", "genotype | allele | frequency"},
        {"solver.dx", "--dx", "grid spacing"},
        {"solver.dt", "--dt", "time step or auto"},
        {"solver.L", "--L", "domain length or auto"},
        {"solver.T", "--T", "final time"},
        {"solver.sample_interval", "--sample-interval", "time between front samples"},
        {"solver.moving_window", "--moving-window", "keep the front centred", true},
        {"solver.snapshots", "--snapshots", "comma-separated snapshot times"},
        {"sweep.s_min", "--s-min", "first s value"},
        {"sweep.s_max", "--s-max", "last s value"},
        {"sweep.s_count", "--s-count", "number of s values"},
        {"sweep.r_min", "--r-min", "smallest positive r (log axis)"},
        {"sweep.r_max", "--r-max", "largest r (log axis)"},
        {"sweep.r_count", "--r-count", "number of log-spaced r values"},
        {"sweep.include_r0", "--include-r0", "add the exact r=0 row (true/false)"},
        {"sweep.include_rinf", "--include-rinf", "add an r=inf row (true/false)"},
        {"sweep.min_travel", "--min-travel", "distance each front should cover"},
        {"sweep.max_time", "--max-time", "cap on per-cell run time"},
        {"regimes.h_min", "--h-min", "first h value"},
        {"regimes.h_max", "--h-max", "last h value"},
        {"regimes.h_count", "--h-count", "number of h values"},
        {"si.beta1", "--beta1", "SI depletion rate"},
        {"si.beta2", "--beta2", "SI growth rate"},
        {"si.gamma", "--gamma", "SI clearance rate"},
        {"si.points", "--points", "verification grid size"},
        {"output.prefix", "--prefix", "output file prefix"},
        {"run.threads", "--threads", "worker threads for sweeps"},
    };
    return keys;
}

using KeyValues = std::map<std::string, std::string>;

struct RunConfig {
    Command command = Command::speed;
    Timing timing = Timing::zygote;
    double r = 1.0;
    double c = 1.0;
    double h = 0.0;
    std::optional<double> s;
    Representation representation = Representation::allele;
    double dx = 0.25;
    std::optional<double> dt;
    std::optional<double> length;
    double final_time = 200.0;
    double sample_interval = 1.0;
    bool moving_window = false;
    std::vector<double> snapshots;
    SweepSpec sweep;
    Axis h_axis{0.0, 1.0, 101, false};
    std::optional<SIParams> si;
    long si_points = 100000;
    std::string prefix = "drivewave";
    unsigned threads = 1;

    Parameters params() const { return {r, c, s.value_or(0.0), h}; }
    GridConfig grid() const { return {length.value_or(0.0), dx, dt, final_time}; }

    bool operator==(const RunConfig& o) const {
        auto si_eq = [](const std::optional<SIParams>& a, const std::optional<SIParams>& b) {
            if (a.has_value() != b.has_value()) return false;
            return !a || (a->beta1 == b->beta1 && a->beta2 == b->beta2 && a->gamma == b->gamma);
        };
        return command == o.command && timing == o.timing && r == o.r && c == o.c && h == o.h && s == o.s &&
               representation == o.representation && dx == o.dx && dt == o.dt && length == o.length &&
               final_time == o.final_time && sample_interval == o.sample_interval &&
               moving_window == o.moving_window && snapshots == o.snapshots && sweep == o.sweep &&
               h_axis == o.h_axis && si_eq(si, o.si) && si_points == o.si_points && prefix == o.prefix &&
               threads == o.threads;
    }
};

inline unsigned default_threads() {
    if (const char* env = std::getenv("DRIVEWAVE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// key=value text

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool known_key(const std::string& k) {
    for (const auto& info : config_keys())
        if (k == info.key) return true;
    return false;
}

inline KeyValues parse_kv_text(const std::string& text, Violations& v, const std::string& origin = "config") {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(lineno);
        if (eq == std::string::npos) {
            v.add(where + ": expected key=value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        if (!known_key(key)) {
            v.add(where + ": unknown key '" + key + "'");
            continue;
        }
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline KeyValues read_kv_file(const std::string& path, Violations& v) {
    std::ifstream f(path);
    if (!f) {
        v.add("cannot read config file '" + path + "'");
        return {};
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_kv_text(ss.str(), v, path);
}

// ---------------------------------------------------------------------------
// Typed readers. Each records a violation instead of throwing.

namespace detail {

inline std::optional<double> parse_double(const std::string& s, bool allow_inf) {
    if (s == "inf" || s == "INF" || s == "infinity") {
        if (allow_inf) return kInfinity;
        return std::nullopt;
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Reader {
public:
    Reader(const KeyValues& kv, Violations& v) : kv_(kv), v_(v) {}

    const std::string* raw(const std::string& key) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? nullptr : &it->second;
    }
    void number(const std::string& key, double& out, bool allow_inf = false) {
        if (const auto* s = raw(key)) {
            if (auto d = parse_double(*s, allow_inf)) out = *d;
            else v_.add(key + ": '" + *s + "' is not a number");
        }
    }
    void optional_number(const std::string& key, std::optional<double>& out, bool auto_ok) {
        if (const auto* s = raw(key)) {
            if (auto_ok && *s == "auto") out.reset();
            else if (auto d = parse_double(*s, false)) out = *d;
            else v_.add(key + ": '" + *s + "' is not a number" + (auto_ok ? " or auto" : ""));
        }
    }
    template <class Int>
    void integer(const std::string& key, Int& out) {
        if (const auto* s = raw(key)) {
            char* end = nullptr;
            const long long val = std::strtoll(s->c_str(), &end, 10);
            if (s->empty() || *end != '\0') v_.add(key + ": '" + *s + "' is not an integer");
            else out = static_cast<Int>(val);
        }
    }
    void boolean(const std::string& key, bool& out) {
        if (const auto* s = raw(key)) {
            if (*s == "true" || *s == "1" || *s == "yes") out = true;
            else if (*s == "false" || *s == "0" || *s == "no") out = false;
            else v_.add(key + ": '" + *s + "' is not true/false");
        }
    }
    void list(const std::string& key, std::vector<double>& out) {
        if (const auto* s = raw(key)) {
            out.clear();
            std::stringstream ss(*s);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                if (auto d = parse_double(item, false)) out.push_back(*d);
                else v_.add(key + ": '" + item + "' is not a number");
            }
        }
    }

private:
    const KeyValues& kv_;
    Violations& v_;
};

} // namespace detail

inline std::optional<Timing> parse_timing(const std::string& s) {
    if (s == "zygote") return Timing::zygote;
    if (s == "germline") return Timing::germline;
    if (s == "perfect" || s == "perfect_zygote") return Timing::perfect_zygote;
    return std::nullopt;
}

inline std::optional<Representation> parse_representation(const std::string& s) {
    if (s == "genotype") return Representation::genotype;
    if (s == "allele") return Representation::allele;
    if (s == "frequency") return Representation::frequency;
    return std::nullopt;
}

// Builds and validates a RunConfig; every violated constraint is reported.
inline RunConfig resolve_config(Command cmd, const KeyValues& kv, Violations& v) {
    RunConfig cfg;
    cfg.command = cmd;
    cfg.threads = default_threads();
    detail::Reader rd(kv, v);

    if (const auto* t = rd.raw("model.timing")) {
        if (auto tm = parse_timing(*t)) cfg.timing = *tm;
        else v.add("model.timing: '" + *t + "' is not zygote, germline or perfect");
    }
    rd.number("model.r", cfg.r, true);
    rd.number("model.c", cfg.c);
    rd.number("model.h", cfg.h);
    rd.optional_number("model.s", cfg.s, false);

    if (const auto* t = rd.raw("solver.representation")) {
        if (auto rep = parse_representation(*t)) cfg.representation = *rep;
        else v.add("solver.representation: '" + *t + "' is not genotype, allele or frequency");
    }
    rd.number("solver.dx", cfg.dx);
    rd.optional_number("solver.dt", cfg.dt, true);
    rd.optional_number("solver.L", cfg.length, true);
    rd.number("solver.T", cfg.final_time);
    rd.number("solver.sample_interval", cfg.sample_interval);
    rd.boolean("solver.moving_window", cfg.moving_window);
    rd.list("solver.snapshots", cfg.snapshots);

    SweepSpec& sp = cfg.sweep;
    rd.number("sweep.s_min", sp.s_axis.min);
    rd.number("sweep.s_max", sp.s_axis.max);
    rd.integer("sweep.s_count", sp.s_axis.count);
    rd.number("sweep.r_min", sp.r_axis.min);
    rd.number("sweep.r_max", sp.r_axis.max);
    rd.integer("sweep.r_count", sp.r_axis.count);
    rd.boolean("sweep.include_r0", sp.include_r0);
    rd.boolean("sweep.include_rinf", sp.include_rinf);
    rd.number("sweep.min_travel", sp.min_travel);
    rd.number("sweep.max_time", sp.max_time);
    sp.timing = cfg.timing;
    sp.c = cfg.c;
    sp.h = cfg.h;
    sp.dx = cfg.dx;
    sp.representation = cfg.representation;

    rd.number("regimes.h_min", cfg.h_axis.min);
    rd.number("regimes.h_max", cfg.h_axis.max);
    rd.integer("regimes.h_count", cfg.h_axis.count);

    const bool any_si = rd.raw("si.beta1") || rd.raw("si.beta2") || rd.raw("si.gamma");
    if (any_si) {
        SIParams si{};
        if (!rd.raw("si.beta1") || !rd.raw("si.beta2") || !rd.raw("si.gamma"))
            v.add("si: beta1, beta2 and gamma must be given together");
        rd.number("si.beta1", si.beta1);
        rd.number("si.beta2", si.beta2);
        rd.number("si.gamma", si.gamma);
        cfg.si = si;
    }
    rd.integer("si.points", cfg.si_points);
    if (const auto* p = rd.raw("output.prefix")) cfg.prefix = *p;
    if (rd.raw("run.threads")) {
        long t = 0;
        rd.integer("run.threads", t);
        if (t < 1) v.add("run.threads must be >= 1");
        else cfg.threads = static_cast<unsigned>(t);
    }

    // Range checks.
    v.check(cfg.c >= 0.0 && cfg.c <= 1.0, "c must lie in [0,1]");
    v.check(cfg.h >= 0.0 && cfg.h <= 1.0, "h must lie in [0,1]");
    v.check(cfg.r >= 0.0, "r must be >= 0 or inf");
    if (cfg.s) v.check(*cfg.s > 0.0 && *cfg.s < 1.0, "s must lie in (0,1)");
    v.check(cfg.sample_interval > 0.0, "sample_interval must be positive");
    v.check(!cfg.prefix.empty(), "output prefix must not be empty");

    switch (cmd) {
        case Command::simulate:
        case Command::speed: {
            if (!cfg.s) v.add("s is required for " + std::string(to_string(cmd)));
            GridConfig g = cfg.grid();
            if (!cfg.length && cfg.s && cfg.dx > 0.0 && cfg.final_time > 0.0) {
                MeasureConfig mc;
                mc.dx = cfg.dx;
                mc.final_time = cfg.final_time;
                mc.moving_window = cfg.moving_window;
                cfg.length = measurement_grid(cfg.timing, cfg.params(), mc).length;
                g.length = *cfg.length;
            }
            if (cfg.length) v.merge(check(g));
            else v.merge(check(GridConfig{16.0 * cfg.dx, cfg.dx, cfg.dt, cfg.final_time}));
            break;
        }
        case Command::heatmap: v.merge(check(cfg.sweep)); break;
        case Command::regimes:
            v.check(cfg.h_axis.count >= 2, "h-axis count must be >= 2");
            v.check(cfg.h_axis.min >= 0.0 && cfg.h_axis.max <= 1.0 && cfg.h_axis.min < cfg.h_axis.max,
                    "h-axis must satisfy 0 <= min < max <= 1");
            v.check(cfg.sweep.s_axis.count >= 2, "s-axis count must be >= 2");
            v.check(cfg.sweep.s_axis.min > 0.0 && cfg.sweep.s_axis.max < 1.0 &&
                        cfg.sweep.s_axis.min < cfg.sweep.s_axis.max,
                    "s-axis must satisfy 0 < min < max < 1");
            break;
        case Command::thresholds: break;
        case Command::verify_si:
            if (cfg.si) {
                v.check(cfg.si->beta1 > 0.0 && cfg.si->beta2 > 0.0 && cfg.si->gamma > 0.0,
                        "beta1, beta2 and gamma must be positive");
                v.check(cfg.si->beta2 > cfg.si->gamma, "verify-si requires beta2 > gamma");
            } else if (!cfg.s) {
                v.add("verify-si needs either beta1/beta2/gamma or a model with s");
            }
            v.check(cfg.si_points >= 2, "si.points must be >= 2");
            break;
    }
    return cfg;
}

// Inverse of resolve_config: every key with its resolved value.
inline KeyValues to_key_values(const RunConfig& cfg) {
    using detail::format_double;
    KeyValues kv;
    kv["model.timing"] = to_string(cfg.timing);
    kv["model.r"] = format_double(cfg.r);
    kv["model.c"] = format_double(cfg.c);
    kv["model.h"] = format_double(cfg.h);
    if (cfg.s) kv["model.s"] = format_double(*cfg.s);
    kv["solver.representation"] = to_string(cfg.representation);
    kv["solver.dx"] = format_double(cfg.dx);
    kv["solver.dt"] = cfg.dt ? format_double(*cfg.dt) : "auto";
    kv["solver.L"] = cfg.length ? format_double(*cfg.length) : "auto";
    kv["solver.T"] = format_double(cfg.final_time);
    kv["solver.sample_interval"] = format_double(cfg.sample_interval);
    kv["solver.moving_window"] = cfg.moving_window ? "true" : "false";
    std::string snaps;
    for (std::size_t i = 0; i < cfg.snapshots.size(); ++i) snaps += (i ? "," : "") + format_double(cfg.snapshots[i]);
    kv["solver.snapshots"] = snaps;
    const SweepSpec& sp = cfg.sweep;
    kv["sweep.s_min"] = format_double(sp.s_axis.min);
    kv["sweep.s_max"] = format_double(sp.s_axis.max);
    kv["sweep.s_count"] = std::to_string(sp.s_axis.count);
    kv["sweep.r_min"] = format_double(sp.r_axis.min);
    kv["sweep.r_max"] = format_double(sp.r_axis.max);
    kv["sweep.r_count"] = std::to_string(sp.r_axis.count);
    kv["sweep.include_r0"] = sp.include_r0 ? "true" : "false";
    kv["sweep.include_rinf"] = sp.include_rinf ? "true" : "false";
    kv["sweep.min_travel"] = format_double(sp.min_travel);
    kv["sweep.max_time"] = format_double(sp.max_time);
    kv["regimes.h_min"] = format_double(cfg.h_axis.min);
    kv["regimes.h_max"] = format_double(cfg.h_axis.max);
    kv["regimes.h_count"] = std::to_string(cfg.h_axis.count);
    if (cfg.si) {
        kv["si.beta1"] = format_double(cfg.si->beta1);
        kv["si.beta2"] = format_double(cfg.si->beta2);
        kv["si.gamma"] = format_double(cfg.si->gamma);
    }
    kv["si.points"] = std::to_string(cfg.si_points);
    kv["output.prefix"] = cfg.prefix;
    kv["run.threads"] = std::to_string(cfg.threads);
    return kv;
}

inline std::optional<Command> parse_command(const std::string& s) {
    for (Command c : {Command::simulate, Command::speed, Command::heatmap, Command::regimes, Command::thresholds,
                      Command::verify_si})
        if (s == to_string(c)) return c;
    return std::nullopt;
}

} // namespace drivewave
