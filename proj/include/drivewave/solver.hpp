#pragma once

// Explicit Euler / centred-difference integrator for the 1-D reaction-diffusion
// systems, plus front tracking, speed fitting and outcome detection.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "errors.hpp"
#include "model_core.hpp"

namespace drivewave {

// ---------------------------------------------------------------------------
// Reaction systems. Each exposes the per-cell reaction, the drive and total
// densities used by the observers, and the two far-field states.

struct GenotypeSystem {
    static constexpr std::size_t kComponents = 3;
    static constexpr bool kAdvection = false;
    static constexpr bool kFrequencyComponent = false;
    using State = std::array<double, 3>;

    Timing timing;
    Parameters params;

    State reaction(const State& u) const {
        const GenotypeState r = genotype_reaction(timing, params, {u[0], u[1], u[2]});
        return {r.dd, r.dw, r.ww};
    }
    double drive(const State& u) const { return u[0] + alpha(timing, params.c) * u[1]; }
    double total(const State& u) const { return u[0] + u[1] + u[2]; }
    State left_state() const { return {1.0, 0.0, 0.0}; }
    State right_state() const { return {0.0, 0.0, 1.0}; }
    static std::vector<std::string> names() { return {"n_DD", "n_DW", "n_WW"}; }
};

struct AlleleSystem {
    static constexpr std::size_t kComponents = 2;
    static constexpr bool kAdvection = false;
    static constexpr bool kFrequencyComponent = false;
    using State = std::array<double, 2>;

    Timing timing;
    Parameters params;

    State reaction(const State& u) const {
        const AlleleState r = allele_reaction(timing, params, {u[0], u[1]});
        return {r.d, r.w};
    }
    double drive(const State& u) const { return u[0]; }
    double total(const State& u) const { return u[0] + u[1]; }
    State left_state() const { return {1.0, 0.0}; }
    State right_state() const { return {0.0, 1.0}; }
    static std::vector<std::string> names() { return {"n_D", "n_W"}; }
};

// (n, p) form. The solver adds 2 d_x(log n) d_x p to the p equation.
struct FrequencySystem {
    static constexpr std::size_t kComponents = 2;
    static constexpr bool kAdvection = true;
    static constexpr bool kFrequencyComponent = true; // component 1 lives in [0,1]
    using State = std::array<double, 2>;

    Timing timing;
    Parameters params;

    State reaction(const State& u) const {
        const FrequencyState r = frequency_reaction_unchecked(timing, params, {u[0], u[1]});
        return {r.n, r.p};
    }
    double drive(const State& u) const { return u[0] * u[1]; }
    double total(const State& u) const { return u[0]; }
    State left_state() const { return {1.0, 1.0}; }
    State right_state() const { return {1.0, 0.0}; }
    static std::vector<std::string> names() { return {"n", "p"}; }
};

// d_t p - d_xx p = p(1-p) (B - A p) / M(p), with M = 1 for the cubic variant.
struct ScalarSystem {
    static constexpr std::size_t kComponents = 1;
    static constexpr bool kAdvection = false;
    static constexpr bool kFrequencyComponent = true;
    using State = std::array<double, 1>;

    double A = 0.0;
    double B = 0.0;
    double s = 0.0;
    bool divide_by_mean_fitness = true;

    static ScalarSystem rinf(Timing t, const Parameters& p) {
        const Selection sel = selection(t, p);
        return {sel.A, sel.B, p.s, true};
    }
    static ScalarSystem weak_selection(double s) { return {-s, 1.0 - 2.0 * s, s, false}; }

    double sigma(double p) const {
        const double num = B - A * p;
        return divide_by_mean_fitness ? num / ((-A * p + (A - s)) * p + 1.0) : num;
    }
    State reaction(const State& u) const { return {u[0] * (1.0 - u[0]) * sigma(u[0])}; }
    double drive(const State& u) const { return u[0]; }
    double total(const State&) const { return 1.0; }
    State left_state() const { return {1.0}; }
    State right_state() const { return {0.0}; }
    static std::vector<std::string> names() { return {"p"}; }
};

enum class Representation { genotype, allele, frequency };

inline const char* to_string(Representation r) {
    switch (r) {
        case Representation::genotype: return "genotype";
        case Representation::allele: return "allele";
        case Representation::frequency: return "frequency";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Grid and run configuration.

inline constexpr double kCflSafety = 0.8;

struct GridConfig {
    double length = 400.0;
    double dx = 0.25;
    std::optional<double> dt; // empty: AUTO
    double final_time = 100.0;

    bool operator==(const GridConfig&) const = default;
};

inline double max_stable_dt(double dx) { return kCflSafety * dx * dx / 2.0; }

inline Violations check(const GridConfig& g) {
    Violations v;
    v.check(g.dx > 0.0, "dx must be positive");
    v.check(g.length > 0.0, "L must be positive");
    v.check(g.final_time > 0.0, "T must be positive");
    if (g.dx > 0.0 && g.length > 0.0) {
        const double cells = g.length / g.dx;
        v.check(std::abs(cells - std::round(cells)) <= 1e-9 * cells, "L/dx must be an integer");
        v.check(std::round(cells) >= 16, "L/dx must be at least 16");
        if (g.dt)
            v.check(*g.dt > 0.0 && *g.dt <= max_stable_dt(g.dx) * (1.0 + 1e-12),
                    "dt violates the diffusion CFL bound 0.8*dx^2/2");
    }
    return v;
}

// AUTO step: diffusion bound, tightened for very large r so that the reaction
// (Lipschitz constant about 1 + r) stays inside the Euler stability region.
inline double resolve_dt(const GridConfig& g, double r) {
    if (g.dt) return *g.dt;
    double dt = max_stable_dt(g.dx);
    if (std::isfinite(r)) dt = std::min(dt, 1.0 / (1.0 + r));
    return dt;
}

// Smallest domain (a multiple of dx) that keeps a front launched at the centre
// away from the walls for time T, with slack for its leading tail.
inline double domain_length(double v_guess, double T, double dx, double tail = 40.0) {
    const double need = 2.0 * (1.0 + std::abs(v_guess) * T + tail);
    return std::ceil(need / dx / 2.0) * 2.0 * dx;
}

// Moving-window length. The window cuts the leading tail of a pulled front,
// which slows it by about pi^2 v / (2 (D v / 2)^2) for a distance D ahead;
// D = 80 / v keeps that below half a percent.
inline double window_length(double v_guess, double dx) {
    const double need = std::max(200.0, 2.0 * 80.0 / std::max(std::abs(v_guess), 0.1));
    return std::max(16.0 * dx, std::ceil(need / dx) * dx);
}

struct RunOptions {
    double sample_interval = 1.0;
    bool moving_window = false;
    double interface_fraction = 0.5; // initial step location as a fraction of L
    double density_floor = 0.01;     // below this total density, track the drive density
    std::vector<double> snapshot_times;
};

// Levels at which fronts are tracked each sample: 0.02, 0.04, ..., 0.98.
inline std::vector<double> tracked_levels() {
    std::vector<double> lv;
    for (int k = 1; k <= 49; ++k) lv.push_back(0.02 * k);
    return lv;
}

inline std::size_t nearest_level(const std::vector<double>& levels, double value) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < levels.size(); ++k)
        if (std::abs(levels[k] - value) < std::abs(levels[best] - value)) best = k;
    return best;
}

struct Profile {
    double t = 0.0;
    double x0 = 0.0; // absolute position of node 0
    double dx = 0.0;
    std::vector<std::vector<double>> components;

    std::size_t size() const { return components.empty() ? 0 : components.front().size(); }
    double x(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
};

struct FrontSample {
    double t = 0.0;
    double max_drive = 0.0;
    double max_total = 0.0;
    std::vector<double> right; // rightmost crossing per tracked level, NaN if none
    std::vector<double> left;  // leftmost crossing per tracked level
};

struct SolverDiagnostics {
    long steps = 0;
    double dt = 0.0;
    double min_before_clamp = 0.0; // most negative density produced by a step
    double clamp_total = 0.0;      // summed magnitude removed by clamping
    double window_shift = 0.0;     // total distance the moving window travelled
};

struct Trajectory {
    std::vector<std::string> names;
    std::vector<double> levels;
    std::vector<FrontSample> samples;
    std::vector<Profile> snapshots;
    Profile final_state;
    std::vector<double> final_observable; // drive fraction, or drive density where n is small
    std::vector<double> final_total;
    std::vector<double> final_drive;
    double length = 0.0;
    double interface_x = 0.0;
    bool moving_window = false;
    SolverDiagnostics diagnostics;
};

// ---------------------------------------------------------------------------
// Front location.

enum class Scan { rightmost, leftmost };

// Linear interpolation of a crossing of `level` by values sampled at x0 + i dx.
inline std::optional<double> front_position(const std::vector<double>& profile, double x0, double dx,
                                            double level, Scan scan = Scan::rightmost) {
    const std::size_t n = profile.size();
    if (n < 2) return std::nullopt;
    auto crosses = [&](std::size_t i) { return (profile[i - 1] >= level) != (profile[i] >= level); };
    auto interp = [&](std::size_t i) {
        const double a = profile[i - 1], b = profile[i];
        return x0 + dx * (static_cast<double>(i - 1) + (level - a) / (b - a));
    };
    if (scan == Scan::rightmost) {
        for (std::size_t i = n - 1; i >= 1; --i)
            if (crosses(i)) return interp(i);
    } else {
        for (std::size_t i = 1; i < n; ++i)
            if (crosses(i)) return interp(i);
    }
    return std::nullopt;
}

// front_position for every level of an ascending list in one sweep; NaN marks
// a level that is never crossed.
inline std::vector<double> front_positions(const std::vector<double>& profile, double x0, double dx,
                                           const std::vector<double>& levels, Scan scan) {
    std::vector<double> out(levels.size(), std::numeric_limits<double>::quiet_NaN());
    const std::size_t n = profile.size();
    std::size_t remaining = levels.size();
    auto visit = [&](std::size_t i) {
        const double a = profile[i - 1], b = profile[i];
        const double lo = std::min(a, b), hi = std::max(a, b);
        // (a >= level) != (b >= level) exactly when lo < level <= hi.
        for (auto it = std::upper_bound(levels.begin(), levels.end(), lo); it != levels.end() && *it <= hi; ++it) {
            const std::size_t k = static_cast<std::size_t>(it - levels.begin());
            if (!std::isnan(out[k])) continue;
            out[k] = x0 + dx * (static_cast<double>(i - 1) + (*it - a) / (b - a));
            --remaining;
        }
    };
    if (scan == Scan::rightmost) {
        for (std::size_t i = n - 1; i >= 1 && remaining > 0; --i) visit(i);
    } else {
        for (std::size_t i = 1; i < n && remaining > 0; ++i) visit(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Time integration.

template <class System>
Trajectory simulate(const System& sys, const GridConfig& grid, const RunOptions& opt = {},
                    double r_for_dt = 0.0) {
    check(grid).throw_if_any("invalid grid");
    constexpr std::size_t K = System::kComponents;
    using State = typename System::State;

    const double dx = grid.dx;
    const double dt = resolve_dt(grid, r_for_dt);
    const std::size_t N = static_cast<std::size_t>(std::llround(grid.length / dx)) + 1;
    const double inv_dx2 = 1.0 / (dx * dx);
    const double inv_2dx = 0.5 / dx;
    const double mid = opt.interface_fraction * grid.length;

    std::vector<State> u(N), next(N);
    for (std::size_t i = 0; i < N; ++i)
        u[i] = dx * static_cast<double>(i) < mid ? sys.left_state() : sys.right_state();

    Trajectory tr;
    tr.names = System::names();
    tr.levels = tracked_levels();
    tr.length = grid.length;
    tr.interface_x = mid;
    tr.moving_window = opt.moving_window;
    tr.diagnostics.dt = dt;

    double offset = 0.0;
    std::vector<double> obs(N), logn(System::kAdvection ? N : 0);

    auto observe = [&](std::vector<double>& o) {
        for (std::size_t i = 0; i < N; ++i) {
            const double n = sys.total(u[i]);
            const double d = sys.drive(u[i]);
            o[i] = n > opt.density_floor ? d / n : d;
        }
    };
    auto make_profile = [&](double t) {
        Profile p;
        p.t = t;
        p.x0 = offset;
        p.dx = dx;
        p.components.assign(K, std::vector<double>(N));
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t k = 0; k < K; ++k) p.components[k][i] = u[i][k];
        return p;
    };
    auto record = [&](double t) {
        observe(obs);
        FrontSample fs;
        fs.t = t;
        for (std::size_t i = 0; i < N; ++i) {
            fs.max_drive = std::max(fs.max_drive, sys.drive(u[i]));
            fs.max_total = std::max(fs.max_total, sys.total(u[i]));
        }
        fs.right = front_positions(obs, offset, dx, tr.levels, Scan::rightmost);
        fs.left = front_positions(obs, offset, dx, tr.levels, Scan::leftmost);
        tr.samples.push_back(std::move(fs));
    };
    // Spatially uniform far fields; they move only when the initial states
    // are not equilibria (e.g. a drive population below its persistence r).
    State far_left = sys.left_state(), far_right = sys.right_state();
    auto react_only = [&](State& c) {
        const State react = sys.reaction(c);
        for (std::size_t k = 0; k < K; ++k) c[k] = std::max(0.0, c[k] + dt * react[k]);
        if constexpr (System::kFrequencyComponent) c[K - 1] = std::min(c[K - 1], 1.0);
    };

    // Keeps the half-peak front inside the central fifth of the window.
    auto recenter = [&]() {
        const double peak = *std::max_element(obs.begin(), obs.end());
        const double level = 0.5 * std::clamp(peak, 2.0 * tr.levels.front(), 1.0);
        const double front = tr.samples.back().right[nearest_level(tr.levels, level)];
        if (std::isnan(front)) return;
        const double rel = front - offset - 0.5 * grid.length;
        if (std::abs(rel) < 0.1 * grid.length) return;
        const long shift = std::lround(rel / dx);
        const std::size_t k = static_cast<std::size_t>(std::min<long>(std::labs(shift), static_cast<long>(N) - 1));
        // New cells get the far-field state, evolved without diffusion:
        // copying the edge cell would also copy the leading tail, which then
        // grows everywhere ahead.
        if (shift > 0) {
            std::copy(u.begin() + static_cast<long>(k), u.end(), u.begin());
            std::fill(u.end() - static_cast<long>(k), u.end(), far_right);
        } else {
            std::copy_backward(u.begin(), u.end() - static_cast<long>(k), u.end());
            std::fill(u.begin(), u.begin() + static_cast<long>(k), far_left);
        }
        const double moved = static_cast<double>(shift > 0 ? static_cast<long>(k) : -static_cast<long>(k)) * dx;
        offset += moved;
        tr.diagnostics.window_shift += moved;
    };

    const long steps = std::max(1L, std::lround(grid.final_time / dt));
    const long per_sample = std::max(1L, std::lround(opt.sample_interval / dt));
    std::vector<double> snaps = opt.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;

    auto take_snapshots = [&](double t) {
        while (next_snap < snaps.size() && snaps[next_snap] <= t + 0.5 * dt) {
            tr.snapshots.push_back(make_profile(t));
            ++next_snap;
        }
    };

    record(0.0);
    take_snapshots(0.0);
    double min_seen = 0.0, clamped = 0.0;

    for (long step = 1; step <= steps; ++step) {
        if constexpr (System::kAdvection) {
            for (std::size_t i = 0; i < N; ++i) logn[i] = std::log(std::max(u[i][0], 1e-8));
        }
        double checksum = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            // Reflecting walls: mirror the neighbour across the boundary node.
            const State& l = u[i == 0 ? 1 : i - 1];
            const State& r = u[i == N - 1 ? N - 2 : i + 1];
            const State& c = u[i];
            const State react = sys.reaction(c);
            State out;
            for (std::size_t k = 0; k < K; ++k)
                out[k] = c[k] + dt * ((l[k] - 2.0 * c[k] + r[k]) * inv_dx2 + react[k]);
            if constexpr (System::kAdvection) {
                if (i > 0 && i < N - 1) {
                    const double dlogn = (logn[i + 1] - logn[i - 1]) * inv_2dx;
                    const double dp = (r[1] - l[1]) * inv_2dx;
                    out[1] += dt * 2.0 * dlogn * dp;
                }
            }
            for (std::size_t k = 0; k < K; ++k) {
                const double v = out[k];
                checksum += v;
                if (v < 0.0) {
                    min_seen = std::min(min_seen, v);
                    clamped -= v;
                    out[k] = 0.0;
                }
            }
            if constexpr (System::kFrequencyComponent) {
                const std::size_t k = K - 1;
                if (out[k] > 1.0) {
                    clamped += out[k] - 1.0;
                    out[k] = 1.0;
                }
            }
            next[i] = out;
        }
        if (!std::isfinite(checksum))
            throw Error(ErrorKind::numerical_blowup,
                        "non-finite value at step " + std::to_string(step) + " (t = " +
                            std::to_string(static_cast<double>(step) * dt) + ")");
        u.swap(next);
        if (opt.moving_window) {
            react_only(far_left);
            react_only(far_right);
        }

        const double t = static_cast<double>(step) * dt;
        if (step % per_sample == 0 || step == steps) {
            record(t);
            if (opt.moving_window) recenter();
        }
        take_snapshots(t);
    }

    tr.diagnostics.steps = steps;
    tr.diagnostics.min_before_clamp = min_seen;
    tr.diagnostics.clamp_total = clamped;
    tr.final_state = make_profile(static_cast<double>(steps) * dt);
    observe(obs);
    tr.final_observable = obs;
    tr.final_total.resize(N);
    tr.final_drive.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        tr.final_total[i] = sys.total(u[i]);
        tr.final_drive[i] = sys.drive(u[i]);
    }
    return tr;
}

inline Trajectory simulate_rinf_scalar(Timing t, const Parameters& p, const GridConfig& grid,
                                       const RunOptions& opt = {}) {
    return simulate(ScalarSystem::rinf(t, p), grid, opt);
}

inline Trajectory simulate(Timing t, const Parameters& p, Representation rep, const GridConfig& grid,
                           const RunOptions& opt = {}) {
    validate(p);
    if (p.infinite_r()) return simulate_rinf_scalar(t, p, grid, opt);
    switch (rep) {
        case Representation::genotype: return simulate(GenotypeSystem{t, p}, grid, opt, p.r);
        case Representation::allele: return simulate(AlleleSystem{t, p}, grid, opt, p.r);
        case Representation::frequency: return simulate(FrequencySystem{t, p}, grid, opt, p.r);
    }
    throw Error(ErrorKind::config, "unknown representation");
}

// ---------------------------------------------------------------------------
// Speed fitting and outcome detection.

struct SpeedFit {
    double speed = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

inline SpeedFit fit_line(const std::vector<double>& t, const std::vector<double>& x) {
    const std::size_t n = t.size();
    double mt = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mt += t[i];
        mx += x[i];
    }
    mt /= static_cast<double>(n);
    mx /= static_cast<double>(n);
    double stt = 0.0, stx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - mt) * (t[i] - mt);
        stx += (t[i] - mt) * (x[i] - mx);
    }
    SpeedFit f;
    f.samples = n;
    f.speed = stx / stt;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = x[i] - (mx + f.speed * (t[i] - mt));
        ssr += e * e;
    }
    f.std_error = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / stt) : 0.0;
    return f;
}

// Least-squares slope over the last `window` fraction of the samples.
inline SpeedFit estimate_speed(const std::vector<double>& times, const std::vector<double>& positions,
                               double window = 0.4) {
    std::vector<double> t, x;
    const std::size_t n = std::min(times.size(), positions.size());
    const std::size_t first = n - static_cast<std::size_t>(std::ceil(window * static_cast<double>(n)));
    for (std::size_t i = first; i < n; ++i) {
        if (std::isnan(positions[i])) continue;
        t.push_back(times[i]);
        x.push_back(positions[i]);
    }
    if (t.size() < 10)
        throw Error(ErrorKind::measurement, "estimate_speed: fewer than 10 samples in the fit window");
    return fit_line(t, x);
}

enum class Outcome { drive_invasion, wt_invasion, coexistence, clearance };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::drive_invasion: return "DRIVE_INVASION";
        case Outcome::wt_invasion: return "WT_INVASION";
        case Outcome::coexistence: return "COEXISTENCE";
        case Outcome::clearance: return "CLEARANCE";
    }
    return "UNKNOWN";
}

struct DetectOptions {
    double fit_window = 0.4;
    double stall_tolerance = 1e-3;
    double clearance_level = 1e-3;
};

struct WaveReport {
    Outcome outcome = Outcome::clearance;
    std::optional<double> speed; // drive (rightward) front, or the single front
    double std_error = 0.0;
    std::optional<double> left_speed; // wild-type front in coexistence
    double left_stderr = 0.0;
    std::optional<double> plateau; // interior drive frequency in coexistence
    double wake_density = 0.0;
    bool stalled = false;
    double displacement = 0.0; // distance covered by the fitted front
};

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto m = v.begin() + static_cast<long>(v.size() / 2);
    std::nth_element(v.begin(), m, v.end());
    return *m;
}

inline std::vector<double> window_values(const Trajectory& tr, const std::vector<double>& values, double a,
                                         double b) {
    const Profile& f = tr.final_state;
    std::vector<double> out;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f.x(i) >= a && f.x(i) <= b) out.push_back(values[i]);
    return out;
}

inline std::pair<std::vector<double>, std::vector<double>> front_series(const Trajectory& tr, std::size_t level,
                                                                        Scan scan) {
    std::vector<double> t, x;
    for (const auto& s : tr.samples) {
        t.push_back(s.t);
        x.push_back(scan == Scan::rightmost ? s.right[level] : s.left[level]);
    }
    return {t, x};
}

inline double travelled(const std::vector<double>& x) {
    double first = std::numeric_limits<double>::quiet_NaN(), last = first;
    for (double v : x) {
        if (std::isnan(v)) continue;
        if (std::isnan(first)) first = v;
        last = v;
    }
    return std::isnan(first) ? 0.0 : last - first;
}

} // namespace detail

// Decay rate of the maximal drive density: minus the log-slope over the last
// `window` fraction of samples.
inline SpeedFit fit_decay_rate(const Trajectory& tr, double window = 0.4) {
    std::vector<double> t, y;
    for (const auto& s : tr.samples) {
        if (!(s.max_drive > 0.0)) continue;
        t.push_back(s.t);
        y.push_back(std::log(s.max_drive));
    }
    SpeedFit f = estimate_speed(t, y, window);
    f.speed = -f.speed;
    return f;
}

inline WaveReport detect_outcome(const Trajectory& tr, const DetectOptions& opt = {}) {
    if (tr.samples.size() < 10)
        throw Error(ErrorKind::measurement, "detect_outcome: trajectory has fewer than 10 samples");
    WaveReport rep;
    const double L = tr.length;
    const double dx = tr.final_state.dx;

    if (tr.samples.back().max_drive < opt.clearance_level) {
        rep.outcome = Outcome::clearance;
        rep.wake_density = detail::median(tr.final_total);
        return rep;
    }

    // Coexistence: the region around the initial interface holds an interior
    // frequency while one front runs right and another runs left.
    if (!tr.moving_window) {
        const double half = 0.025 * L;
        const double p_mid =
            detail::median(detail::window_values(tr, tr.final_observable, tr.interface_x - half, tr.interface_x + half));
        if (p_mid > 0.01 && p_mid < 0.99) {
            const auto [tr_t, tr_x] = detail::front_series(tr, nearest_level(tr.levels, 0.5 * p_mid), Scan::rightmost);
            const auto [tl_t, tl_x] = detail::front_series(tr, nearest_level(tr.levels, 0.5 * (1.0 + p_mid)), Scan::leftmost);
            try {
                const SpeedFit right = estimate_speed(tr_t, tr_x, opt.fit_window);
                const SpeedFit left = estimate_speed(tl_t, tl_x, opt.fit_window);
                if (right.speed > opt.stall_tolerance && left.speed < -opt.stall_tolerance) {
                    rep.outcome = Outcome::coexistence;
                    rep.speed = right.speed;
                    rep.std_error = right.std_error;
                    rep.left_speed = left.speed;
                    rep.left_stderr = left.std_error;
                    rep.plateau = p_mid;
                    rep.wake_density = detail::median(
                        detail::window_values(tr, tr.final_total, tr.interface_x - half, tr.interface_x + half));
                    rep.displacement = detail::travelled(tr_x);
                    rep.stalled = std::abs(rep.displacement) < 20.0 * dx;
                    return rep;
                }
            } catch (const Error&) {
                // fall through to the single-front reading
            }
        }
    }

    // A pulse that eradicates the population never reaches 1, so track half
    // of the highest value the observable still holds.
    double peak = 0.0;
    for (double v : tr.final_observable) peak = std::max(peak, v);
    const double level = 0.5 * std::clamp(peak, tr.levels.front() * 2.0, 1.0);
    const auto [t, x] = detail::front_series(tr, nearest_level(tr.levels, level), Scan::rightmost);
    SpeedFit fit;
    try {
        fit = estimate_speed(t, x, opt.fit_window);
    } catch (const Error&) {
        // Near the upper threshold the drive can fade too slowly to fall
        // below the clearance level within the run, leaving no front at
        // any tracked level. A decaying residue is read as clearance.
        if (!(fit_decay_rate(tr, opt.fit_window).speed > 0.0)) throw;
        rep.outcome = Outcome::clearance;
        rep.stalled = true;
        rep.wake_density = detail::median(tr.final_total);
        return rep;
    }
    rep.speed = fit.speed;
    rep.std_error = fit.std_error;
    rep.displacement = detail::travelled(x);
    rep.stalled = std::abs(fit.speed) < opt.stall_tolerance || std::abs(rep.displacement) < 20.0 * dx;
    rep.outcome = fit.speed >= 0.0 ? Outcome::drive_invasion : Outcome::wt_invasion;

    const double front = x.back();
    const double sgn = fit.speed >= 0.0 ? -1.0 : 1.0; // the wake lies behind the front
    if (!std::isnan(front)) {
        const double a = front + sgn * 0.05 * L, b = front + sgn * 0.25 * L;
        auto wake = detail::window_values(tr, tr.final_total, std::min(a, b), std::max(a, b));
        if (wake.empty()) wake.push_back(sgn < 0 ? tr.final_total.front() : tr.final_total.back());
        rep.wake_density = detail::median(wake);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Zero-diffusion ODE.

inline GenotypeState ode_equilibrium(Timing t, const Parameters& p, GenotypeState st, double tol = 1e-10,
                                     double t_max = 1e5) {
    validate(p);
    require_finite_r(p, "ode_equilibrium");
    const double h = std::min(0.1, 0.5 / (1.0 + p.r));
    auto f = [&](const GenotypeState& g) { return genotype_reaction(t, p, g); };
    auto axpy = [](const GenotypeState& a, double k, const GenotypeState& b) {
        return GenotypeState{a.dd + k * b.dd, a.dw + k * b.dw, a.ww + k * b.ww};
    };
    for (double time = 0.0; time < t_max; time += h) {
        const GenotypeState k1 = f(st);
        if (std::max({std::abs(k1.dd), std::abs(k1.dw), std::abs(k1.ww)}) < tol) return st;
        const GenotypeState k2 = f(axpy(st, 0.5 * h, k1));
        const GenotypeState k3 = f(axpy(st, 0.5 * h, k2));
        const GenotypeState k4 = f(axpy(st, h, k3));
        st.dd += h / 6.0 * (k1.dd + 2 * k2.dd + 2 * k3.dd + k4.dd);
        st.dw += h / 6.0 * (k1.dw + 2 * k2.dw + 2 * k3.dw + k4.dw);
        st.ww += h / 6.0 * (k1.ww + 2 * k2.ww + 2 * k3.ww + k4.ww);
        st.dd = std::max(st.dd, 0.0);
        st.dw = std::max(st.dw, 0.0);
        st.ww = std::max(st.ww, 0.0);
    }
    throw Error(ErrorKind::not_converged,
                "ode_equilibrium: no steady state by t = " + std::to_string(t_max) + "; last state (" +
                    std::to_string(st.dd) + ", " + std::to_string(st.dw) + ", " + std::to_string(st.ww) + ")");
}

// ---------------------------------------------------------------------------
// Convenience: one call from parameters to a wave report.

struct MeasureConfig {
    Representation representation = Representation::allele;
    double dx = 0.25;
    double final_time = 300.0;
    std::optional<double> length; // default: domain_length from a speed guess
    bool moving_window = false;
    double sample_interval = 1.0;
    double interface_fraction = 0.5;
};

inline GridConfig measurement_grid(Timing t, const Parameters& p, const MeasureConfig& mc) {
    GridConfig g;
    g.dx = mc.dx;
    g.final_time = mc.final_time;
    if (mc.length) {
        g.length = *mc.length;
    } else {
        double v = linearized_speed_drive(t, p).value_or(2.0);
        if (auto w = linearized_speed_wildtype(t, p)) v = std::max(v, std::abs(*w));
        v = std::max(v, 1.0);
        g.length = mc.moving_window ? window_length(linearized_speed_drive(t, p).value_or(1.0), mc.dx)
                                    : domain_length(v, mc.final_time, mc.dx);
    }
    return g;
}

inline WaveReport measure_wave(Timing t, const Parameters& p, const MeasureConfig& mc = {}) {
    RunOptions opt;
    opt.moving_window = mc.moving_window;
    opt.sample_interval = mc.sample_interval;
    opt.interface_fraction = mc.interface_fraction;
    const Trajectory tr = simulate(t, p, mc.representation, measurement_grid(t, p, mc), opt);
    return detect_outcome(tr);
}

} // namespace drivewave
