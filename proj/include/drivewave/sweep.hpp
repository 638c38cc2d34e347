#pragma once

// (s, r) speed heatmaps and (h, s) regime maps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "analysis.hpp"
#include "errors.hpp"
#include "solver.hpp"

namespace drivewave {

struct Axis {
    double min = 0.0;
    double max = 1.0;
    int count = 2;
    bool log = false;

    std::vector<double> values() const {
        std::vector<double> v(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            const double f = count > 1 ? static_cast<double>(i) / (count - 1) : 0.0;
            v[static_cast<std::size_t>(i)] =
                log ? std::exp(std::log(min) + f * (std::log(max) - std::log(min))) : min + f * (max - min);
        }
        return v;
    }
    bool operator==(const Axis&) const = default;
};

struct SweepSpec {
    Timing timing = Timing::zygote;
    double c = 0.25;
    double h = 0.1;
    Axis s_axis{0.05, 0.95, 50, false};
    Axis r_axis{0.01, 10.0, 40, true};
    bool include_r0 = true;
    bool include_rinf = false;
    double dx = 0.25;
    double min_travel = 50.0; // each cell runs at least until the front covers this distance
    double max_time = 2000.0;
    Representation representation = Representation::allele;

    bool operator==(const SweepSpec&) const = default;
};

inline Violations check(const SweepSpec& sp) {
    Violations v;
    v.check(sp.s_axis.count >= 2, "s-axis count must be >= 2");
    v.check(sp.r_axis.count >= 2, "r-axis count must be >= 2");
    v.check(sp.s_axis.min > 0.0 && sp.s_axis.max < 1.0 && sp.s_axis.min < sp.s_axis.max,
            "s-axis must satisfy 0 < min < max < 1");
    v.check(sp.r_axis.min > 0.0 && sp.r_axis.max > sp.r_axis.min, "r-axis log bounds must be positive and increasing");
    v.check(sp.c >= 0.0 && sp.c <= 1.0, "c must lie in [0,1]");
    v.check(sp.h >= 0.0 && sp.h <= 1.0, "h must lie in [0,1]");
    v.check(sp.dx > 0.0, "dx must be positive");
    v.check(sp.min_travel > 0.0 && sp.max_time > 0.0, "min_travel and max_time must be positive");
    return v;
}

// r rows in output order: optional exact 0, the log axis, optional inf.
inline std::vector<double> r_rows(const SweepSpec& sp) {
    std::vector<double> r;
    if (sp.include_r0) r.push_back(0.0);
    for (double v : sp.r_axis.values()) r.push_back(v);
    if (sp.include_rinf) r.push_back(kInfinity);
    return r;
}

struct SweepCell {
    double s = 0.0;
    double r = 0.0;
    std::optional<double> speed; // drive speed for coexistence cells
    std::optional<double> left_speed;
    std::optional<double> plateau;
    std::optional<Outcome> outcome; // empty when the run failed
    double wake_density = 0.0;
    double std_error = 0.0;
    bool stalled = false;
    std::string error;
};

struct SweepTable {
    std::vector<double> s_values;
    std::vector<double> r_values;
    std::vector<SweepCell> cells; // row-major: r outer, s inner
    const SweepCell& at(std::size_t r_index, std::size_t s_index) const {
        return cells[r_index * s_values.size() + s_index];
    }
};

// True where both fronts can run apart: the interface region must then stay
// in the domain, so such cells use a fixed domain instead of a moving window.
inline bool may_coexist(const SweepSpec& sp, const Parameters& p) {
    if (p.r == 0.0) return false;
    const Thresholds th = thresholds(sp.timing, sp.c, sp.h);
    return th.a_sign() > 0 && p.s > th.s1 - 0.02 && p.s < th.s2 + 0.02;
}

// Grid for one cell. A pulled front lags its asymptotic speed by roughly
// 3/(2 lambda t), so a fit over the tail of [0, T] is within a few percent
// only once T >= kSettle / v^2; travelling `min_travel` alone is not enough
// for slow fronts.
inline constexpr double kSettle = 150.0;

inline MeasureConfig cell_measure_config(const SweepSpec& sp, const Parameters& p) {
    const double vd = linearized_speed_drive(sp.timing, p).value_or(0.0);
    const double vw = std::abs(linearized_speed_wildtype(sp.timing, p).value_or(0.0));
    // The front to wait for: the drive front when it is pulled, else the
    // wild-type front; with neither linearly driven, a nominal speed.
    const double lead = vd > 0.0 ? vd : vw;
    const double v = lead > 0.0 ? std::max(lead, 0.1) : 0.25;
    const double settle = lead > 0.0 ? kSettle / (v * v) : 0.0;
    MeasureConfig mc;
    mc.representation = sp.representation;
    mc.dx = sp.dx;
    mc.final_time = std::clamp(std::max(sp.min_travel / v, settle), 60.0, sp.max_time);
    mc.sample_interval = mc.final_time / 200.0;
    if (may_coexist(sp, p)) {
        // Fixed domain holding both fronts, with the interface placed so
        // each has room for its own distance plus a tail.
        const double right = std::max(vd, 0.25) * mc.final_time + 40.0;
        const double left = std::max(vw, 0.25) * mc.final_time + 40.0;
        mc.length = std::ceil((left + right) / sp.dx) * sp.dx;
        mc.interface_fraction = left / *mc.length;
    } else {
        mc.moving_window = true;
        mc.length = window_length(v, sp.dx);
    }
    return mc;
}

inline SweepCell run_cell(const SweepSpec& sp, double s, double r) {
    SweepCell cell;
    cell.s = s;
    cell.r = r;
    try {
        const Parameters p{r, sp.c, s, sp.h};
        const WaveReport rep = measure_wave(sp.timing, p, cell_measure_config(sp, p));
        cell.outcome = rep.outcome;
        cell.speed = rep.speed;
        cell.left_speed = rep.left_speed;
        cell.plateau = rep.plateau;
        cell.wake_density = rep.wake_density;
        cell.std_error = rep.std_error;
        cell.stalled = rep.stalled;
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

// Cells are independent; each worker writes only its own pre-sized slot, so
// the table does not depend on scheduling.
template <class CellFn>
void parallel_cells(std::size_t count, unsigned parallelism, const CellFn& fn) {
    const unsigned workers = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(count)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
}

inline SweepTable run_heatmap(const SweepSpec& sp, unsigned parallelism) {
    check(sp).throw_if_any("invalid sweep");
    SweepTable table;
    table.s_values = sp.s_axis.values();
    table.r_values = r_rows(sp);
    const std::size_t ns = table.s_values.size();
    table.cells.resize(ns * table.r_values.size());
    parallel_cells(table.cells.size(), parallelism, [&](std::size_t i) {
        table.cells[i] = run_cell(sp, table.s_values[i % ns], table.r_values[i / ns]);
    });
    return table;
}

// ---------------------------------------------------------------------------
// Regime maps (r = inf classification, no PDE runs).

struct RegimeTable {
    std::vector<double> h_values;
    std::vector<double> s_values;
    std::vector<std::optional<Regime>> cells; // row-major: h outer; empty marks a threshold cell
    const std::optional<Regime>& at(std::size_t h_index, std::size_t s_index) const {
        return cells[h_index * s_values.size() + s_index];
    }
};

inline RegimeTable run_regime_map(Timing t, double c, const Axis& h_axis, const Axis& s_axis) {
    RegimeTable table;
    table.h_values = h_axis.values();
    table.s_values = s_axis.values();
    for (double h : table.h_values) {
        const Thresholds th = thresholds(t, c, h);
        for (double s : table.s_values) {
            if (on_threshold(th, s, 1e-9))
                table.cells.emplace_back(std::nullopt);
            else
                table.cells.emplace_back(classify_regime(t, c, h, s));
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Analytic overlays for the heatmap.

struct Curve {
    std::string name;
    std::vector<std::pair<double, double>> points; // (s, r)
};

struct Overlays {
    std::vector<Curve> curves;
    std::optional<double> s1, s2;
    std::vector<double> pulled_set_boundary;
};

inline Overlays overlay_lines(const SweepSpec& sp) {
    Overlays ov;
    const double r_lo = sp.include_r0 ? 0.0 : sp.r_axis.min, r_hi = sp.r_axis.max;
    const double s_lo = sp.s_axis.min, s_hi = sp.s_axis.max;
    auto in_bounds = [&](double r) { return r >= r_lo && r <= r_hi; };

    Curve pure{"pure_drive_persistence", {}};
    Curve composite{"composite_persistence", {}};
    for (double s : sp.s_axis.values()) {
        const double rp = persistence_pure(s);
        if (in_bounds(rp)) pure.points.emplace_back(s, rp);
        try {
            const EquilibriumReport eq = persistence_composite(sp.timing, {1.0, sp.c, s, sp.h});
            if (in_bounds(eq.persistence_r)) composite.points.emplace_back(s, eq.persistence_r);
        } catch (const Error&) {
        }
    }
    ov.curves.push_back(std::move(pure));
    ov.curves.push_back(std::move(composite));

    const Thresholds th = thresholds(sp.timing, sp.c, sp.h);
    if (th.s1 >= s_lo && th.s1 <= s_hi) ov.s1 = th.s1;
    if (th.s2 >= s_lo && th.s2 <= s_hi) ov.s2 = th.s2;

    // Scan the s-axis at 10x its resolution for membership changes, then bisect.
    const int n = 10 * (sp.s_axis.count - 1);
    auto member = [&](double s) { return pulled_set_contains(sp.timing, sp.c, sp.h, s); };
    double prev_s = s_lo;
    bool prev = member(s_lo);
    for (int i = 1; i <= n; ++i) {
        const double s = s_lo + (s_hi - s_lo) * i / n;
        const bool cur = member(s);
        if (cur != prev) ov.pulled_set_boundary.push_back(bisect_flip(member, prev_s, s, 1e-12));
        prev = cur;
        prev_s = s;
    }
    return ov;
}

// ---------------------------------------------------------------------------
// CSV output.

namespace detail {

inline std::string fmt_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace detail

inline std::string heatmap_csv(const SweepTable& table) {
    std::string out = "s,r,speed,outcome,wake_density,stderr\n";
    for (const SweepCell& c : table.cells) {
        out += detail::fmt_number(c.s) + "," + detail::fmt_number(c.r) + ",";
        if (c.speed) out += detail::fmt_number(*c.speed);
        out += ",";
        out += c.outcome ? to_string(*c.outcome) : "ERROR";
        out += "," + detail::fmt_number(c.wake_density) + ",";
        if (c.speed) out += detail::fmt_number(c.std_error);
        out += "\n";
    }
    return out;
}

inline std::string regime_csv(const RegimeTable& table) {
    std::string out = "h,s,regime\n";
    for (std::size_t i = 0; i < table.h_values.size(); ++i)
        for (std::size_t j = 0; j < table.s_values.size(); ++j) {
            const auto& r = table.at(i, j);
            out += detail::fmt_number(table.h_values[i]) + "," + detail::fmt_number(table.s_values[j]) + "," +
                   (r ? to_string(*r) : "BOUNDARY") + "\n";
        }
    return out;
}

} // namespace drivewave
