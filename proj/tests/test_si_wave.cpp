#include <gtest/gtest.h>

#include <random>

#include "drivewave/si_wave.hpp"

using namespace drivewave;

namespace {

const SIParams kReference{1.0, 0.8, 0.2};

// S = 1 everywhere with I = 1 on the left half.
struct SaturatedSI : SISystem {
    State left_state() const { return {1.0, 1.0}; }
    State right_state() const { return {1.0, 0.0}; }
};

} // namespace

TEST(SIMapping, Examples) {
    SIParams si = si_params(Timing::perfect_zygote, {0.0, 1.0, 0.2, 0.0});
    EXPECT_NEAR(si.beta1, 1.0, 1e-15);
    EXPECT_NEAR(si.beta2, 0.8, 1e-15);
    EXPECT_NEAR(si.gamma, 0.2, 1e-15);

    si = si_params(Timing::zygote, {0.0, 0.25, 0.3, 0.1});
    EXPECT_NEAR(si.beta1, 1.0 - 0.97 * 0.75, 1e-15);
    EXPECT_NEAR(si.beta2, 0.25 * 0.7 + 0.3 * 0.75 * 0.9, 1e-15);
    EXPECT_NEAR(si.gamma, 0.3, 1e-15);

    for (double s : {0.1, 0.4}) EXPECT_NEAR(si_params(Timing::germline, {0.0, 1.0, s, 1.0}).beta2, 1.0 - s, 1e-15);
}

TEST(SIMapping, MatchesAlleleReactionAtZeroR) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Timing t : {Timing::zygote, Timing::germline, Timing::perfect_zygote})
        for (int i = 0; i < 1000; ++i) {
            const Parameters p{0.0, u(rng), 0.01 + 0.98 * u(rng), u(rng)};
            const double nd = u(rng), nw = u(rng);
            const AlleleState a = allele_reaction(t, p, {nd, nw});
            const SISystem::State si = SISystem{si_params(t, p)}.reaction({nw, nd});
            EXPECT_NEAR(si[0], a.w, 1e-14);
            EXPECT_NEAR(si[1], a.d, 1e-14);
        }
}

TEST(SICriticalSpeed, Values) {
    EXPECT_NEAR(*critical_speed(kReference), 2.0 * std::sqrt(0.6), 1e-15);
    EXPECT_NEAR(*critical_speed(kReference), 1.549, 5e-4);
    EXPECT_EQ(*critical_speed({1.0, 0.3, 0.3}), 0.0);
    EXPECT_FALSE(critical_speed({1.0, 0.2, 0.3}));
    EXPECT_THROW(admissible_constants({1.0, 0.3, 0.3}), Error);
}

TEST(SIConstants, SatisfyTheirDefiningInequalities) {
    for (const SIParams& si : {kReference, si_params(Timing::zygote, {0, 0.25, 0.3, 0.1}),
                               si_params(Timing::germline, {0, 0.25, 0.3, 0.1})}) {
        const SubSuperConstants k = admissible_constants(si);
        EXPECT_NEAR(k.v, 2.0 * std::sqrt(si.beta2 - si.gamma), 1e-15);
        EXPECT_GT(k.z1, 1.0 / k.lambda);
        EXPECT_GT(k.z2, k.z1);
        // Brute-force sup of the condition-2 bound on a fine grid.
        double sup2 = 0.0;
        for (int i = 0; i <= 200000; ++i) {
            const double z = k.z1 + 1e-3 * i;
            sup2 = std::max(sup2, si.beta1 * k.L3 * z * std::exp((1.0 / k.L1 - k.lambda) * z));
        }
        EXPECT_LE(sup2, k.v - 1.0 / k.L1 + 1e-12);
        EXPECT_LE(sup2, k.cond2_sup * (1.0 + 1e-12));
    }
}

TEST(SIVerification, ReferenceAndMappedParameterSets) {
    for (const SIParams& si : {kReference, si_params(Timing::zygote, {0, 0.25, 0.3, 0.1}),
                               si_params(Timing::germline, {0, 0.25, 0.3, 0.1})}) {
        const SubSuperConstants k = admissible_constants(si);
        const auto [zmin, zmax] = default_verification_range(k);
        const SubSuperReport rep = verify_subsuper(si, k, zmin, zmax, 100000);
        EXPECT_TRUE(rep.breakpoints_inside);
        for (const ConditionMargin& c : rep.conditions) {
            EXPECT_EQ(c.violations, 0u);
            EXPECT_GE(c.worst, -c.roundoff);
        }
        EXPECT_TRUE(rep.holds());
    }
}

// The verifier must be able to fail: a too-small L2 moves the I
// sub-solution above what the reaction can sustain.
TEST(SIVerification, DetectsBadConstants) {
    SubSuperConstants k = admissible_constants(kReference);
    k.L2 *= 0.5;
    k.z2 = std::pow(k.L2 / k.L3, 2);
    const auto [zmin, zmax] = default_verification_range(k);
    EXPECT_FALSE(verify_subsuper(kReference, k, zmin, zmax, 100000).conditions[3].holds());

    SubSuperConstants narrow = admissible_constants(kReference);
    EXPECT_FALSE(verify_subsuper(kReference, narrow, 0.0, 10.0, 1000).breakpoints_inside);
}

TEST(SISimulation, InfectedBoundAndSpeed) {
    RunOptions opt;
    opt.interface_fraction = 0.125;
    const Trajectory tr = simulate_si(kReference, {600.0, 0.25, std::nullopt, 200.0}, opt);
    const double M = (kReference.beta2 - kReference.gamma) / kReference.gamma;
    for (const FrontSample& s : tr.samples) EXPECT_LE(s.max_drive, M * 1.02);
    const WaveReport rep = detect_outcome(tr);
    EXPECT_NEAR(*rep.speed, *critical_speed(kReference), 0.05 * *critical_speed(kReference));
}

TEST(SISimulation, SusceptibleNeverIncreases) {
    RunOptions opt;
    for (int k = 0; k <= 40; ++k) opt.snapshot_times.push_back(1.0 * k);
    const Trajectory tr = simulate(SaturatedSI{{kReference}}, {100.0, 0.25, std::nullopt, 40.0}, opt);
    for (std::size_t j = 1; j < tr.snapshots.size(); ++j) {
        const auto& before = tr.snapshots[j - 1].components[0];
        const auto& after = tr.snapshots[j].components[0];
        for (std::size_t i = 0; i < before.size(); ++i) ASSERT_LE(after[i], before[i] + 1e-12) << j << " " << i;
    }
}

TEST(SISimulation, ClearanceRateBelowThreshold) {
    const SIParams si{1.0, 0.2, 0.5};
    const Trajectory tr = simulate_si(si, {100.0, 0.25, std::nullopt, 40.0});
    EXPECT_EQ(detect_outcome(tr).outcome, Outcome::clearance);
    EXPECT_GE(fit_decay_rate(tr).speed, (si.gamma - si.beta2) - 0.05);
}
