#pragma once

// Closed-form layer: linearized speeds, thresholds s1/s2, pulled criteria,
// sign-of-speed integral, regime classification, equilibria, persistence.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "errors.hpp"
#include "model_core.hpp"

namespace drivewave {

using SigmaFn = std::function<double(double)>;

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol = 1e-9, int max_depth = 50) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Shrinks [lo, hi] around the point where pred changes value; pred(lo) != pred(hi).
template <class Pred>
double bisect_flip(const Pred& pred, double lo, double hi, double tol = 1e-10) {
    const bool at_lo = pred(lo);
    if (pred(hi) == at_lo)
        throw Error(ErrorKind::search_failed, "bisect_flip: predicate does not change on bracket");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (pred(mid) == at_lo ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline std::optional<double> linearized_speed_drive(Timing t, const Parameters& p) {
    // d_{n_D} F_D(0, 1) equals sigma(0) for every timing.
    const double radicand = selection(t, p).B;
    if (radicand < 0.0) return std::nullopt;
    return 2.0 * std::sqrt(radicand);
}

inline double drive_equilibrium_density(const Parameters& p) {
    if (p.r == 0.0) return 0.0;
    if (p.infinite_r()) return 1.0;
    return std::max(0.0, 1.0 - p.s / (p.r * (1.0 - p.s)));
}

// Leftward speed of wild-type re-invasion into a drive population. params.c is
// the effective conversion rate; the Timing overload applies c = 1 for perfect.
inline std::optional<double> linearized_speed_wildtype(const Parameters& p, double drive_equilibrium) {
    if (drive_equilibrium <= 0.0) return -2.0 * std::sqrt(p.r);
    const double radicand = (1.0 - p.s * p.h) * (1.0 - p.c) / (1.0 - p.s) - 1.0;
    if (radicand < 0.0) return std::nullopt;
    return -2.0 * std::sqrt(radicand);
}

inline std::optional<double> linearized_speed_wildtype(Timing t, const Parameters& p) {
    Parameters q = p;
    q.c = conversion(t, p.c);
    return linearized_speed_wildtype(q, drive_equilibrium_density(p));
}

struct Thresholds {
    Timing timing = Timing::zygote;
    double a_factor = 0.0; // A / s
    double s1 = 0.0;
    double s2 = 0.0;

    double A(double s) const { return s * a_factor; }
    int a_sign() const { return std::abs(a_factor) <= 1e-12 ? 0 : (a_factor > 0 ? 1 : -1); }
};

inline Thresholds thresholds(Timing t, double c, double h) {
    c = conversion(t, c);
    auto ratio = [](double num, double den) { return den == 0.0 ? kInfinity : num / den; };
    Thresholds th;
    th.timing = t;
    th.s1 = ratio(c, 1.0 - h * (1.0 - c));
    if (t == Timing::germline) {
        th.a_factor = 1.0 - 2.0 * h;
        th.s2 = ratio(c, h * (1.0 + c));
    } else {
        th.a_factor = 2.0 * (1.0 - c) * (1.0 - h) - 1.0;
        th.s2 = ratio(c, 2.0 * c + h * (1.0 - c));
    }
    return th;
}

inline bool pulled_set_contains(Timing t, double c, double h, double s) {
    c = conversion(t, c);
    if (t == Timing::germline)
        return (1.0 - 2.0 * s * h) * (c - s * h * (c + 1.0)) + s * (1.0 - 2.0 * h) > 0.0;
    const double k = (1.0 - h) * (1.0 - c);
    return (1.0 - 2.0 * s * (1.0 - k)) * ((-2.0 * c - h + c * h) * s + c) + s * (2.0 * k - 1.0) > 0.0;
}

// sigma(0) >= (1 - p) sigma(p) on a uniform grid: the growth rate per capita
// is maximal at low density, a sufficient condition for a pulled front.
inline bool pulled_criterion(const SigmaFn& sigma, int grid_resolution = 10000) {
    const double s0 = sigma(0.0);
    for (int i = 0; i < grid_resolution; ++i) {
        const double p = static_cast<double>(i) / (grid_resolution - 1);
        if (s0 - (1.0 - p) * sigma(p) < -1e-12) return false;
    }
    return true;
}

inline double speed_sign_integral(const SigmaFn& sigma, double tol = 1e-9) {
    return adaptive_simpson([&](double p) { return p * (1.0 - p) * sigma(p); }, 0.0, 1.0, tol);
}

enum class Regime {
    drive_invasion,
    wt_invasion,
    coexistence,
    bistable,
    clearance,
};

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::drive_invasion: return "DRIVE_INVASION";
        case Regime::wt_invasion: return "WT_INVASION";
        case Regime::coexistence: return "COEXISTENCE";
        case Regime::bistable: return "BISTABLE";
        case Regime::clearance: return "CLEARANCE";
    }
    return "UNKNOWN";
}

inline constexpr double kThresholdTolerance = 1e-12;

inline bool on_threshold(const Thresholds& th, double s, double tol = kThresholdTolerance) {
    return std::abs(s - th.s1) <= tol || std::abs(s - th.s2) <= tol;
}

// r = inf classification by the signs of sigma(0) and sigma(1).
inline Regime classify_regime(Timing t, double c, double h, double s) {
    const Thresholds th = thresholds(t, c, h);
    if (on_threshold(th, s))
        throw Error(ErrorKind::boundary, "classify_regime: s lies on a threshold");
    const int sign = th.a_sign();
    if (sign == 0) return s < th.s1 ? Regime::drive_invasion : Regime::wt_invasion;
    const double lo = std::min(th.s1, th.s2), hi = std::max(th.s1, th.s2);
    if (s < lo) return Regime::drive_invasion;
    if (s > hi) return Regime::wt_invasion;
    return sign > 0 ? Regime::coexistence : Regime::bistable;
}

// r = 0: the drive either spreads (s < s2) or is cleared everywhere.
inline Regime classify_regime_r0(Timing t, double c, double h, double s) {
    const Thresholds th = thresholds(t, c, h);
    if (std::abs(s - th.s2) <= kThresholdTolerance)
        throw Error(ErrorKind::boundary, "classify_regime_r0: s lies on s2");
    return s < th.s2 ? Regime::drive_invasion : Regime::clearance;
}

// Root of sigma, B / A, without restricting it to (0, 1). Absent when A = 0.
inline std::optional<double> selection_root(Timing t, const Parameters& p) {
    const Selection sel = selection(t, p);
    if (sel.A == 0.0) return std::nullopt;
    return sel.B / sel.A;
}

inline std::optional<double> interior_equilibrium(Timing t, const Parameters& p) {
    const auto root = selection_root(t, p);
    if (!root || *root <= 0.0 || *root >= 1.0) return std::nullopt;
    return root;
}

inline double persistence_pure(double s) { return s / (1.0 - s); }

struct EquilibriumReport {
    std::optional<double> p_star;
    double n_star = 0.0;
    double persistence_r = 0.0;
};

inline EquilibriumReport persistence_composite(Timing t, const Parameters& p) {
    const Thresholds th = thresholds(t, p.c, p.h);
    const auto pstar = interior_equilibrium(t, p);
    if (!pstar || th.a_sign() <= 0)
        throw Error(ErrorKind::coexistence_absent, "persistence_composite: no stable interior equilibrium");
    const double M = mean_fitness(t, p, *pstar);
    EquilibriumReport rep;
    rep.p_star = pstar;
    rep.persistence_r = (1.0 - M) / M;
    if (p.infinite_r())
        rep.n_star = 1.0;
    else if (p.r > 0.0)
        rep.n_star = std::max(0.0, 1.0 - (1.0 - M) / (p.r * M));
    return rep;
}

// Cubic frequency model s p(1-p)(p - (2s-1)/s), the weak-selection limit of
// perfect conversion. Its travelling fronts are known in closed form.
inline double weak_selection_sigma(double s, double p) { return s * p - (2.0 * s - 1.0); }

inline bool weak_selection_pushed(double s) {
    const double a = (2.0 * s - 1.0) / s;
    return a > -0.5;
}

inline double weak_selection_speed(double s) {
    if (weak_selection_pushed(s)) return (2.0 - 3.0 * s) / std::sqrt(2.0 * s);
    return 2.0 * std::sqrt(1.0 - 2.0 * s);
}

} // namespace drivewave
