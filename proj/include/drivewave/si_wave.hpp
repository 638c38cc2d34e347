#pragma once

// r = 0 reduction to the SI system
//   S' = S'' - beta1 S I / (S + I),   I' = I'' + beta2 S I / (S + I) - gamma I
// with S = n_W, I = n_D, and a numerical certificate for the sub- and
// super-solutions that bracket its critical travelling wave.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "model_core.hpp"
#include "solver.hpp"

namespace drivewave {

struct SIParams {
    double beta1 = 1.0;
    double beta2 = 0.8;
    double gamma = 0.2;
};

inline SIParams si_params(Timing t, const Parameters& p) {
    const double c = conversion(t, p.c);
    const double s = p.s, h = p.h;
    SIParams si;
    si.beta1 = 1.0 - (1.0 - s * h) * (1.0 - c);
    si.beta2 = t == Timing::germline ? c * (1.0 - s * h) + s * (1.0 - h)
                                     : c * (1.0 - s) + s * (1.0 - c) * (1.0 - h);
    si.gamma = s;
    return si;
}

inline std::optional<double> critical_speed(const SIParams& si) {
    if (si.beta2 < si.gamma) return std::nullopt;
    return 2.0 * std::sqrt(si.beta2 - si.gamma);
}

struct SISystem {
    static constexpr std::size_t kComponents = 2;
    static constexpr bool kAdvection = false;
    static constexpr bool kFrequencyComponent = false;
    using State = std::array<double, 2>; // (S, I)

    SIParams si;

    State reaction(const State& u) const {
        const double n = u[0] + u[1];
        if (n <= kDensityFloor) return {0.0, 0.0};
        const double contact = u[0] * u[1] / n;
        return {-si.beta1 * contact, si.beta2 * contact - si.gamma * u[1]};
    }
    double drive(const State& u) const { return u[1]; }
    double total(const State& u) const { return u[0] + u[1]; }
    State left_state() const { return {0.0, 1.0}; }
    State right_state() const { return {1.0, 0.0}; }
    static std::vector<std::string> names() { return {"S", "I"}; }
};

struct SubSuperConstants {
    double L1 = 0.0;
    double L2 = 0.0;
    double M = 0.0;      // (beta2 - gamma) / gamma
    double lambda = 0.0; // sqrt(beta2 - gamma)
    double v = 0.0;      // 2 lambda
    double L3 = 0.0;     // e M lambda
    double z1 = 0.0;     // L1 log L1, where the S sub-solution leaves 0
    double z2 = 0.0;     // (L2 / L3)^2, where the I sub-solution leaves 0
    double cond2_sup = 0.0; // sup over z > z1 of beta1 L3 z exp((1/L1 - lambda) z)
    double cond4_sup = 0.0; // sup over z > z2 of 4 beta2 L3^2 z^3.5 exp(-lambda z)
};

namespace detail {

// Smallest x >= lo with ok(x), assuming ok is monotone: doubling, then bisection.
template <class Pred>
double monotone_search(const Pred& ok, double lo, double rel_tol = 1e-9) {
    double hi = lo;
    for (int k = 0; !ok(hi); ++k) {
        if (k >= 60) throw Error(ErrorKind::search_failed, "constant search exceeded 2^60");
        lo = hi;
        hi *= 2.0;
    }
    if (ok(lo)) return lo;
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

} // namespace detail

inline SubSuperConstants admissible_constants(const SIParams& si) {
    if (!(si.beta2 > si.gamma))
        throw Error(ErrorKind::config, "admissible_constants: requires beta2 > gamma");
    SubSuperConstants k;
    k.lambda = std::sqrt(si.beta2 - si.gamma);
    k.v = 2.0 * k.lambda;
    k.M = (si.beta2 - si.gamma) / si.gamma;
    k.L3 = std::exp(1.0) * k.M * k.lambda;
    const double lam = k.lambda;

    auto cond2_sup = [&](double L1) {
        const double z1 = L1 * std::log(L1);
        const double kappa = lam - 1.0 / L1;
        const double z = std::max(z1, 1.0 / kappa);
        return si.beta1 * k.L3 * z * std::exp(-kappa * z);
    };
    auto l1_ok = [&](double L1) {
        if (L1 * std::log(L1) <= 1.0 / lam) return false;
        if (1.0 / L1 >= lam) return false;
        return cond2_sup(L1) <= k.v - 1.0 / L1;
    };
    k.L1 = detail::monotone_search(l1_ok, std::exp(1.0));
    k.z1 = k.L1 * std::log(k.L1);
    k.cond2_sup = cond2_sup(k.L1);

    auto g_sup = [&](double z2) {
        const double z = std::max(z2, 3.5 / lam);
        return 4.0 * si.beta2 * k.L3 * k.L3 * std::pow(z, 3.5) * std::exp(-lam * z);
    };
    auto l2_ok = [&](double L2) {
        if (L2 <= k.L3 * std::sqrt(k.z1)) return false;
        const double ratio = L2 / k.L3;
        if (1.0 - 4.0 * si.beta2 * std::pow(ratio, 4) > 0.0) return false;
        const double z2 = ratio * ratio;
        return L2 * (1.0 - k.L1 * std::exp(-z2 / k.L1)) >= g_sup(z2);
    };
    k.L2 = detail::monotone_search(l2_ok, k.L3 * std::sqrt(k.z1) * (1.0 + 1e-9));
    k.z2 = std::pow(k.L2 / k.L3, 2);
    k.cond4_sup = g_sup(k.z2);
    return k;
}

// Value and first two derivatives of a profile at one point.
struct Jet {
    double f = 0.0, d1 = 0.0, d2 = 0.0;
};

inline Jet s_sub(const SubSuperConstants& k, double z) {
    if (z <= k.z1) return {};
    const double e = std::exp(-z / k.L1);
    return {1.0 - k.L1 * e, e, -e / k.L1};
}

inline Jet i_super(const SubSuperConstants& k, double z) {
    if (z <= 1.0 / k.lambda) return {k.M, 0.0, 0.0};
    const double e = k.L3 * std::exp(-k.lambda * z);
    return {e * z, e * (1.0 - k.lambda * z), e * (k.lambda * k.lambda * z - 2.0 * k.lambda)};
}

inline Jet i_sub(const SubSuperConstants& k, double z) {
    if (z <= k.z2) return {};
    const double e = std::exp(-k.lambda * z);
    const double rz = std::sqrt(z);
    const double g = k.L3 * z - k.L2 * rz;
    const double g1 = k.L3 - 0.5 * k.L2 / rz;
    const double g2 = 0.25 * k.L2 / (z * rz);
    const double lam = k.lambda;
    return {g * e, (g1 - lam * g) * e, (g2 - 2.0 * lam * g1 + lam * lam * g) * e};
}

struct ConditionMargin {
    double worst = std::numeric_limits<double>::infinity(); // min of (rhs - lhs) in the satisfied direction
    double at = 0.0;
    double roundoff = 0.0; // floating-point allowance at the worst point
    // Worst margin over the pieces where the condition is not trivially 0 >= 0.
    double active_worst = std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    bool holds() const { return violations == 0; }
};

struct SubSuperReport {
    std::array<ConditionMargin, 4> conditions;
    double z_min = 0.0, z_max = 0.0;
    std::size_t n_points = 0;
    bool breakpoints_inside = false;
    bool holds() const {
        for (const auto& c : conditions)
            if (!c.holds()) return false;
        return breakpoints_inside;
    }
};

inline std::pair<double, double> default_verification_range(const SubSuperConstants& k) {
    return {-50.0, 200.0 / k.lambda};
}

// Conditions of the lemma, each written as margin >= 0:
//  (i)   -v S' - S'' >= 0 for S = 1;
//  (ii)  beta1 Ibar <= v S_' + S_'' where S_ > 0, else condition 2 with S_ = 0;
//  (iii) -v I' - I'' - (beta2 - gamma) I >= 0 for Ibar = L3 z e^{-lz}, else
//        condition 3 at the worst case S = 1;
//  (iv)  -v I_' - I_'' <= beta2 S_ I_ / (S_ + I_) - gamma I_ where I_ > 0.
// Margins (iii) and (iv) are exact identities or small differences, so each
// point is allowed a roundoff of 64 eps times the magnitude of its terms.
inline SubSuperReport verify_subsuper(const SIParams& si, const SubSuperConstants& k, double z_min,
                                      double z_max, std::size_t n_points) {
    SubSuperReport rep;
    rep.z_min = z_min;
    rep.z_max = z_max;
    rep.n_points = n_points;
    const double v = k.v;
    const std::array<double, 3> breaks{k.z1, 1.0 / k.lambda, k.z2};
    rep.breakpoints_inside = true;
    for (double b : breaks) rep.breakpoints_inside = rep.breakpoints_inside && b > z_min && 10.0 * b < z_max;

    constexpr double kEps = std::numeric_limits<double>::epsilon();
    auto note = [&](ConditionMargin& c, double margin, double scale, double z) {
        const double tol = 64.0 * kEps * scale;
        if (scale > 0.0) c.active_worst = std::min(c.active_worst, margin);
        if (margin < c.worst) {
            c.worst = margin;
            c.at = z;
            c.roundoff = tol;
        }
        if (margin < -tol) ++c.violations;
    };
    auto evaluate = [&](double z) {
        note(rep.conditions[0], 0.0, 0.0, z);

        const Jet s = s_sub(k, z);
        const Jet ib = i_super(k, z);
        if (z > k.z1) {
            const double lhs = si.beta1 * ib.f, rhs = v * s.d1 + s.d2;
            note(rep.conditions[1], rhs - lhs, std::abs(lhs) + std::abs(v * s.d1) + std::abs(s.d2), z);
        } else {
            note(rep.conditions[1], 0.0, 0.0, z);
        }

        if (z > 1.0 / k.lambda) {
            const double a = -v * ib.d1, b = -ib.d2, c = (si.beta2 - si.gamma) * ib.f;
            note(rep.conditions[2], a + b - c, std::abs(a) + std::abs(b) + std::abs(c), z);
        } else {
            const double rhs = si.beta2 * k.M / (1.0 + k.M) - si.gamma * k.M;
            note(rep.conditions[2], -rhs, si.beta2 * k.M / (1.0 + k.M) + si.gamma * k.M, z);
        }

        const Jet il = i_sub(k, z);
        if (z > k.z2) {
            const double lhs = -v * il.d1 - il.d2;
            const double rhs = si.beta2 * s.f * il.f / (s.f + il.f) - si.gamma * il.f;
            note(rep.conditions[3], rhs - lhs,
                 std::abs(v * il.d1) + std::abs(il.d2) + si.beta2 * il.f + si.gamma * il.f, z);
        } else {
            note(rep.conditions[3], 0.0, 0.0, z);
        }
    };

    const double h = n_points > 1 ? (z_max - z_min) / static_cast<double>(n_points - 1) : 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double z = z_min + h * static_cast<double>(i);
        bool on_break = false;
        for (double b : breaks) on_break = on_break || std::abs(z - b) < 1e-9;
        if (!on_break) evaluate(z);
    }
    // One-sided checks beside each breakpoint.
    for (double b : breaks)
        if (b > z_min && b < z_max) {
            evaluate(b - 1e-9);
            evaluate(b + 1e-9);
        }
    return rep;
}

inline Trajectory simulate_si(const SIParams& si, const GridConfig& grid, const RunOptions& opt = {}) {
    return simulate(SISystem{si}, grid, opt);
}

inline double si_speed_crosscheck(const SIParams& si, const GridConfig& grid, const RunOptions& opt = {}) {
    if (!critical_speed(si)) throw Error(ErrorKind::config, "si_speed_crosscheck: requires beta2 > gamma");
    const WaveReport rep = detect_outcome(simulate_si(si, grid, opt));
    if (!rep.speed) throw Error(ErrorKind::measurement, "si_speed_crosscheck: no front detected");
    return *rep.speed;
}

} // namespace drivewave
