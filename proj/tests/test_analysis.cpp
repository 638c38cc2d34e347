#include <gtest/gtest.h>

#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "drivewave/analysis.hpp"

using namespace drivewave;

namespace {

double gk_integral(const SigmaFn& sigma) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double p) { return p * (1.0 - p) * sigma(p); }, 0.0, 1.0, 15, 1e-13);
}

SigmaFn perfect_sigma(double s) {
    return [s](double p) { return rinf_sigma(Timing::perfect_zygote, {kInfinity, 1.0, s, 0.0}, p); };
}

// Plain bisection on a continuous function with a sign change on [lo, hi].
template <class F>
double root(const F& f, double lo, double hi) {
    const bool neg_lo = f(lo) < 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((f(mid) < 0.0) == neg_lo ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST(LinearizedSpeed, Drive) {
    EXPECT_NEAR(*linearized_speed_drive(Timing::perfect_zygote, {0, 1, 1e-300, 0}), 2.0, 1e-12);
    EXPECT_NEAR(*linearized_speed_drive(Timing::perfect_zygote, {0, 1, 0.5, 0}), 0.0, 1e-12);
    EXPECT_NEAR(*linearized_speed_drive(Timing::zygote, {1, 0.25, 0.3, 0.1}), 2.0 * std::sqrt(0.0775), 1e-12);
    EXPECT_NEAR(*linearized_speed_drive(Timing::zygote, {1, 0.25, 0.3, 0.1}), 0.5568, 5e-5);
    for (double h : {0.0, 0.4, 0.9})
        for (double s : {0.1, 0.3, 0.45})
            EXPECT_NEAR(*linearized_speed_drive(Timing::zygote, {1, 1.0, s, h}), 2.0 * std::sqrt(1 - 2 * s), 1e-12);
    EXPECT_FALSE(linearized_speed_drive(Timing::perfect_zygote, {0, 1, 0.6, 0}));
}

TEST(LinearizedSpeed, WildTypeAndEquilibriumDensity) {
    EXPECT_NEAR(*linearized_speed_wildtype({1.0, 0.25, 0.4, 0.1}, 0.0), -2.0, 1e-15);
    EXPECT_NEAR(*linearized_speed_wildtype({1.0, 0.25, 0.4, 0.1}, 0.5), -2.0 * std::sqrt(0.2), 1e-12);
    EXPECT_NEAR(drive_equilibrium_density({0.3 / 0.7, 1, 0.3, 0}), 0.0, 1e-15);
    EXPECT_NEAR(drive_equilibrium_density({3.0, 1, 0.3, 0}), 1.0 - 0.3 / 2.1, 1e-15);
    EXPECT_EQ(drive_equilibrium_density({0.5, 1, 0.5, 0}), 0.0);
}

TEST(Thresholds, PublishedValues) {
    Thresholds th = thresholds(Timing::zygote, 0.25, 0.1);
    EXPECT_NEAR(th.s1, 0.2703, 5e-5);
    EXPECT_NEAR(th.s2, 0.4348, 5e-5);
    EXPECT_EQ(th.a_sign(), 1);
    th = thresholds(Timing::zygote, 0.75, 0.1);
    EXPECT_NEAR(th.s1, 0.7692, 5e-5);
    EXPECT_NEAR(th.s2, 0.4918, 5e-5);
    EXPECT_EQ(th.a_sign(), -1);
    th = thresholds(Timing::germline, 0.25, 0.3);
    EXPECT_NEAR(th.s2, 0.25 / (0.3 * 1.25), 1e-12);
    EXPECT_NEAR(th.s1, 0.3226, 5e-5);
    EXPECT_EQ(th.a_sign(), 1);
}

// Independent oracle: s1 and s2 are where sigma(1) and sigma(0) vanish.
TEST(Thresholds, AgreeWithSigmaRoots) {
    for (Timing t : {Timing::zygote, Timing::germline})
        for (double c : {0.1, 0.25, 0.5, 0.75})
            for (double h : {0.1, 0.3, 0.6}) {
                const Thresholds th = thresholds(t, c, h);
                auto sigma_at = [&](double p) {
                    return [=](double s) { return rinf_sigma(t, {kInfinity, c, s, h}, p); };
                };
                if (th.s1 > 1e-3 && th.s1 < 0.999) {
                    EXPECT_NEAR(root(sigma_at(1.0), 1e-3, 0.999), th.s1, 1e-10);
                }
                if (th.s2 > 1e-3 && th.s2 < 0.999) {
                    EXPECT_NEAR(root(sigma_at(0.0), 1e-3, 0.999), th.s2, 1e-10);
                }
            }
}

TEST(Thresholds, PositiveAIffOrderedThresholds) {
    for (Timing t : {Timing::zygote, Timing::germline})
        for (int i = 0; i <= 100; ++i)
            for (int j = 0; j <= 100; ++j) {
                const double c = 0.01 * i, h = 0.01 * j;
                const Thresholds th = thresholds(t, c, h);
                if (th.a_sign() == 0 || std::abs(th.s1 - th.s2) < 1e-12) continue;
                EXPECT_EQ(th.a_sign() > 0, th.s1 < th.s2) << to_string(t) << " c=" << c << " h=" << h;
            }
}

TEST(Thresholds, DriveRadicandVanishesAtS2) {
    for (Timing t : {Timing::zygote, Timing::germline})
        for (double c : {0.2, 0.5, 0.8})
            for (double h : {0.2, 0.5}) {
                const Thresholds th = thresholds(t, c, h);
                if (th.s2 >= 1.0) continue;
                EXPECT_NEAR(selection(t, c, h, th.s2).B, 0.0, 1e-14);
            }
}

TEST(PulledSet, Membership) {
    for (double c : {0.1, 0.5, 0.9})
        for (double s : {0.01, 0.05}) EXPECT_TRUE(pulled_set_contains(Timing::germline, c, 0.0, s));
    EXPECT_FALSE(pulled_set_contains(Timing::zygote, 0.75, 0.1, 0.45));
}

// Stated for the A < 0 regime, where the set is defined.
TEST(PulledSet, ImpliesBelowS2) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20000; ++i) {
        const Timing t = i % 2 ? Timing::zygote : Timing::germline;
        const double c = u(rng), h = u(rng), s = 0.001 + 0.998 * u(rng);
        const Thresholds th = thresholds(t, c, h);
        if (th.a_sign() < 0 && pulled_set_contains(t, c, h, s)) {
            EXPECT_LT(s, th.s2);
        }
    }
}

TEST(PulledCriterion, Cases) {
    EXPECT_TRUE(pulled_criterion([](double) { return 0.3; }));
    EXPECT_TRUE(pulled_criterion(perfect_sigma(0.2)));
    EXPECT_FALSE(pulled_criterion(perfect_sigma(0.45)));
}

TEST(SignIntegral, AgreesWithGaussKronrod) {
    EXPECT_EQ(speed_sign_integral([](double) { return 0.0; }), 0.0);
    for (double s : {0.1, 0.3, 0.5, 0.69, 0.72, 0.9}) {
        const SigmaFn f = perfect_sigma(s);
        EXPECT_NEAR(speed_sign_integral(f, 1e-12), gk_integral(f), 1e-10) << s;
    }
    EXPECT_GT(speed_sign_integral(perfect_sigma(0.5)), 0.0);
}

TEST(SignIntegral, PerfectConversionRoot) {
    auto integral = [](double s) { return gk_integral(perfect_sigma(s)); };
    const double oracle = root(integral, 0.5, 0.95);
    const double got =
        bisect_flip([](double s) { return speed_sign_integral(perfect_sigma(s), 1e-12) > 0.0; }, 0.5, 0.95, 1e-10);
    EXPECT_NEAR(got, oracle, 1e-8);
    EXPECT_NEAR(got, 0.697, 0.005);
}

TEST(WeakSelection, ExactThresholds) {
    const double pushed_flip = bisect_flip(weak_selection_pushed, 0.2, 0.6, 1e-12);
    EXPECT_NEAR(pushed_flip, 0.4, 1e-6);
    auto integral_positive = [](double s) {
        return speed_sign_integral([s](double p) { return weak_selection_sigma(s, p); }, 1e-13) > 0.0;
    };
    EXPECT_NEAR(bisect_flip(integral_positive, 0.5, 0.9, 1e-12), 2.0 / 3.0, 1e-6);
    EXPECT_NEAR(weak_selection_speed(0.45), 0.6852, 5e-5);
    EXPECT_NEAR(weak_selection_speed(0.2), 2.0 * std::sqrt(0.6), 1e-15);
}

// The sufficient condition sigma(0) >= (1-p) sigma(p) is sharper than needed
// for the cubic: it certifies pulled fronts only up to s = 1/3 (shifted by
// the first grid point p = 1e-4).
TEST(WeakSelection, SufficientCriterionFlipsAtOneThird) {
    auto pulled = [](double s) { return pulled_criterion([s](double p) { return weak_selection_sigma(s, p); }); };
    EXPECT_NEAR(bisect_flip(pulled, 0.2, 0.6, 1e-12), 1.0 / (3.0 - 1e-4), 1e-8);
}

TEST(Regime, Examples) {
    EXPECT_EQ(classify_regime(Timing::zygote, 0.25, 0.1, 0.35), Regime::coexistence);
    EXPECT_EQ(classify_regime(Timing::zygote, 0.75, 0.1, 0.6), Regime::bistable);
    EXPECT_EQ(classify_regime(Timing::germline, 0.25, 0.75, 0.4), Regime::bistable);
    EXPECT_EQ(classify_regime_r0(Timing::zygote, 0.25, 0.1, 0.5), Regime::clearance);
    EXPECT_EQ(classify_regime_r0(Timing::zygote, 0.25, 0.1, 0.3), Regime::drive_invasion);
    const Thresholds th = thresholds(Timing::zygote, 0.25, 0.1);
    try {
        classify_regime(Timing::zygote, 0.25, 0.1, th.s1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::boundary);
    }
}

TEST(Regime, ConsistentWithSigmaSigns) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const Timing t = i % 3 == 0 ? Timing::germline : (i % 3 == 1 ? Timing::zygote : Timing::perfect_zygote);
        const double c = u(rng), h = u(rng), s = 0.001 + 0.998 * u(rng);
        const Parameters p{kInfinity, c, s, h};
        const double s0 = rinf_sigma(t, p, 0.0), s1 = rinf_sigma(t, p, 1.0);
        if (std::abs(s0) < 1e-9 || std::abs(s1) < 1e-9) continue;
        Regime want;
        if (s0 > 0 && s1 > 0) want = Regime::drive_invasion;
        else if (s0 < 0 && s1 < 0) want = Regime::wt_invasion;
        else if (s0 < 0) want = Regime::bistable;
        else want = Regime::coexistence;
        EXPECT_EQ(classify_regime(t, c, h, s), want) << to_string(t) << " c=" << c << " h=" << h << " s=" << s;
    }
}

TEST(Equilibrium, InteriorRoot) {
    const Parameters p{kInfinity, 0.25, 0.35, 0.1};
    EXPECT_NEAR(*interior_equilibrium(Timing::zygote, p), 0.5 - 0.025 / 0.245, 1e-12);
    EXPECT_NEAR(*interior_equilibrium(Timing::zygote, p), 0.3980, 5e-5);
    const Thresholds th = thresholds(Timing::zygote, 0.25, 0.1);
    EXPECT_NEAR(*selection_root(Timing::zygote, {1, 0.25, th.s1, 0.1}), 1.0, 1e-12);
    EXPECT_NEAR(*selection_root(Timing::zygote, {1, 0.25, th.s2, 0.1}), 0.0, 1e-12);
    EXPECT_FALSE(interior_equilibrium(Timing::zygote, {1, 0.25, 0.2, 0.1}));
}

TEST(Equilibrium, Persistence) {
    EXPECT_DOUBLE_EQ(persistence_pure(0.5), 1.0);
    EXPECT_NEAR(persistence_pure(0.3), 0.4286, 5e-5);

    const EquilibriumReport rep = persistence_composite(Timing::zygote, {1.0, 0.25, 0.35, 0.1});
    EXPECT_NEAR(rep.persistence_r, 0.1236, 5e-4);
    const double M = mean_fitness(Timing::zygote, {1.0, 0.25, 0.35, 0.1}, *rep.p_star);
    EXPECT_NEAR(M, 0.8900, 1e-4);

    // Approaching s1 from below the composite line joins the pure line.
    const double s1 = thresholds(Timing::zygote, 0.25, 0.1).s1;
    const double s = s1 + 1e-9;
    EXPECT_NEAR(persistence_composite(Timing::zygote, {1.0, 0.25, s, 0.1}).persistence_r, persistence_pure(s), 1e-6);
    EXPECT_THROW(persistence_composite(Timing::zygote, {1.0, 0.75, 0.6, 0.1}), Error);
}

TEST(Numerics, SimpsonAndBisect) {
    EXPECT_NEAR(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI), 2.0, 1e-9);
    EXPECT_NEAR(bisect_flip([](double x) { return x > 0.3; }, 0.0, 1.0, 1e-12), 0.3, 1e-11);
    EXPECT_THROW(bisect_flip([](double) { return true; }, 0.0, 1.0), Error);
}
