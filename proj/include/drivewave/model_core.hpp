#pragma once

// Reaction terms for the drive/wild-type genotype model in three coordinate
// systems: genotypes (n_DD, n_DW, n_WW), allelic half-densities (n_D, n_W),
// and total density with drive frequency (n, p).

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace drivewave {

enum class Timing { zygote, germline, perfect_zygote };

inline const char* to_string(Timing t) {
    switch (t) {
        case Timing::zygote: return "zygote";
        case Timing::germline: return "germline";
        case Timing::perfect_zygote: return "perfect";
    }
    return "unknown";
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Below this total density the mating terms are replaced by their limit, 0.
inline constexpr double kDensityFloor = 1e-12;

struct Parameters {
    double r = 0.0; // kInfinity selects the frequency-only limit
    double c = 1.0;
    double s = 0.2;
    double h = 0.0;

    bool infinite_r() const { return std::isinf(r); }
    bool operator==(const Parameters&) const = default;
};

inline Violations check(const Parameters& p) {
    Violations v;
    v.check(p.s > 0.0 && p.s < 1.0, "s must lie in (0,1)");
    v.check(p.c >= 0.0 && p.c <= 1.0, "c must lie in [0,1]");
    v.check(p.h >= 0.0 && p.h <= 1.0, "h must lie in [0,1]");
    v.check(p.r >= 0.0 && !std::isnan(p.r), "r must be >= 0 or inf");
    return v;
}

inline void validate(const Parameters& p) { check(p).throw_if_any("invalid parameters"); }

// Perfect conversion is the zygote model with c = 1.
inline double conversion(Timing t, double c) { return t == Timing::perfect_zygote ? 1.0 : c; }

// Fraction of a heterozygote's density counted towards n_D.
inline double alpha(Timing t, double c) {
    return t == Timing::germline ? 0.5 * (1.0 + c) : 0.5;
}

enum class Genotype { dd = 0, dw = 1, ww = 2 };

// Indexed by Genotype.
using OffspringDistribution = std::array<double, 3>;

inline OffspringDistribution offspring_distribution(Timing t, double c, Genotype a, Genotype b) {
    c = conversion(t, c);
    const double germ_het = t == Timing::germline ? 0.5 * (1.0 + c) : 0.5;
    auto drive_gamete = [&](Genotype g) {
        switch (g) {
            case Genotype::dd: return 1.0;
            case Genotype::dw: return germ_het;
            case Genotype::ww: return 0.0;
        }
        return 0.0;
    };
    const double pa = drive_gamete(a);
    const double pb = drive_gamete(b);
    double dd = pa * pb;
    double dw = pa * (1.0 - pb) + (1.0 - pa) * pb;
    const double ww = (1.0 - pa) * (1.0 - pb);
    if (t != Timing::germline) {
        dd += c * dw;
        dw *= 1.0 - c;
    }
    return {dd, dw, ww};
}

// Rates reuse the state layout; entries may be negative.
struct GenotypeState {
    double dd = 0.0, dw = 0.0, ww = 0.0;
    double total() const { return dd + dw + ww; }
};

struct AlleleState {
    double d = 0.0, w = 0.0;
    double total() const { return d + w; }
};

struct FrequencyState {
    double n = 0.0, p = 0.0;
};

inline AlleleState to_allelic(Timing t, const GenotypeState& g, double c) {
    const double a = alpha(t, c);
    return {g.dd + a * g.dw, g.ww + (1.0 - a) * g.dw};
}

inline FrequencyState to_frequency(const AlleleState& a) {
    const double n = a.total();
    return {n, n > 0.0 ? a.d / n : 0.0};
}

inline AlleleState to_allelic(const FrequencyState& f) { return {f.n * f.p, f.n * (1.0 - f.p)}; }

// Mean fitness and frequency selection are quadratic/linear in p:
//   M(p) = -A p^2 + (A - s) p + 1,   sigma(p) M(p) = -A p + B.
struct Selection {
    double A = 0.0;
    double B = 0.0;
};

inline Selection selection(Timing t, double c, double h, double s) {
    c = conversion(t, c);
    if (t == Timing::germline) return {s * (1.0 - 2.0 * h), c * (1.0 - s * h) - s * h};
    const double k = (1.0 - c) * (1.0 - h);
    return {s * (2.0 * k - 1.0), c * (1.0 - s) - s * (1.0 - k)};
}

inline Selection selection(Timing t, const Parameters& p) { return selection(t, p.c, p.h, p.s); }

inline double mean_fitness(Timing t, const Parameters& prm, double p) {
    const Selection sel = selection(t, prm);
    return (-sel.A * p + (sel.A - prm.s)) * p + 1.0;
}

inline double rinf_sigma(Timing t, const Parameters& prm, double p) {
    const Selection sel = selection(t, prm);
    return (-sel.A * p + sel.B) / mean_fitness(t, prm, p);
}

inline void require_finite_r(const Parameters& p, const char* op) {
    if (p.infinite_r())
        throw Error(ErrorKind::config,
                    std::string(op) + ": density equations are undefined at r = inf");
}

inline GenotypeState genotype_reaction(Timing t, const Parameters& prm, const GenotypeState& st) {
    require_finite_r(prm, "genotype_reaction");
    const double n = st.total();
    if (n <= kDensityFloor) return {};
    const double c = conversion(t, prm.c);
    const double s = prm.s, h = prm.h;
    const double R = prm.r * (1.0 - n) + 1.0;
    const double dd = st.dd, dw = st.dw, ww = st.ww;

    double b_dd, b_dw, b_ww;
    if (t == Timing::germline) {
        b_dd = 0.25 * (1 + c) * (1 + c) * dw * dw + (1 + c) * dw * dd + dd * dd;
        b_dw = (1 + c) * ww * dw + 2 * ww * dd + 0.5 * (1 - c * c) * dw * dw + (1 - c) * dw * dd;
        b_ww = ww * ww + (1 - c) * ww * dw + 0.25 * (1 - c) * (1 - c) * dw * dw;
    } else {
        b_dd = c * ww * dw + 2 * c * ww * dd + (0.5 * c + 0.25) * dw * dw + (c + 1) * dw * dd + dd * dd;
        b_dw = (1 - c) * (ww * dw + 2 * ww * dd + 0.5 * dw * dw + dw * dd);
        b_ww = ww * ww + ww * dw + 0.25 * dw * dw;
    }
    return {(1 - s) * R * b_dd / n - dd, (1 - s * h) * R * b_dw / n - dw, R * b_ww / n - ww};
}

inline AlleleState allele_reaction(Timing t, const Parameters& prm, const AlleleState& st) {
    require_finite_r(prm, "allele_reaction");
    const double n = st.total();
    if (n <= kDensityFloor) return {};
    const double c = conversion(t, prm.c);
    const double s = prm.s, h = prm.h;
    const double Rn = (prm.r * (1.0 - n) + 1.0) / n;
    const double het = 1.0 - s * h;
    const double gain_d = t == Timing::germline ? (1 - s) * st.d + het * (1 + c) * st.w
                                                : (1 - s) * (st.d + 2 * c * st.w) + het * (1 - c) * st.w;
    const double gain_w = st.w + het * (1 - c) * st.d;
    return {st.d * (Rn * gain_d - 1.0), st.w * (Rn * gain_w - 1.0)};
}

// Reaction part of the (n, p) system. The solver adds 2 d_x(log n) d_x p to dp.
// At r = inf the density is pinned (dn = 0) and dp = p(1-p) sigma(p).
inline FrequencyState frequency_reaction_unchecked(Timing t, const Parameters& prm,
                                                   const FrequencyState& st) {
    const Selection sel = selection(t, prm);
    const double M = (-sel.A * st.p + (sel.A - prm.s)) * st.p + 1.0;
    const double growth = st.p * (1.0 - st.p) * (-sel.A * st.p + sel.B);
    if (prm.infinite_r()) return {0.0, growth / M};
    const double R = prm.r * (1.0 - st.n) + 1.0;
    return {R * M * st.n - st.n, R * growth};
}

inline FrequencyState frequency_reaction(Timing t, const Parameters& prm, const FrequencyState& st) {
    if (!(st.n > 0.0))
        throw Error(ErrorKind::degenerate_state, "frequency_reaction: requires n > 0");
    return frequency_reaction_unchecked(t, prm, st);
}

} // namespace drivewave
