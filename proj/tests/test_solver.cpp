#include <gtest/gtest.h>

#include <random>

#include "drivewave/solver.hpp"

using namespace drivewave;

namespace {

// Allele system started from a uniform state instead of a step.
struct UniformAllele : AlleleSystem {
    State value;
    State left_state() const { return value; }
    State right_state() const { return value; }
};

// Superlinear growth that leaves the floating-point range in finite time.
struct Explosive {
    static constexpr std::size_t kComponents = 1;
    static constexpr bool kAdvection = false;
    static constexpr bool kFrequencyComponent = false;
    using State = std::array<double, 1>;
    State reaction(const State& u) const { return {1e3 * u[0] * u[0]}; }
    double drive(const State& u) const { return u[0]; }
    double total(const State& u) const { return u[0]; }
    State left_state() const { return {2.0}; }
    State right_state() const { return {1.0}; }
    static std::vector<std::string> names() { return {"u"}; }
};

double speed_of(const Trajectory& tr) { return *detect_outcome(tr).speed; }

} // namespace

TEST(FrontPosition, StepAndRamp) {
    std::vector<double> step(20, 0.0);
    for (int i = 0; i < 8; ++i) step[i] = 1.0;
    const double x = *front_position(step, 0.0, 0.5, 0.5);
    EXPECT_GT(x, 7 * 0.5);
    EXPECT_LT(x, 8 * 0.5);

    std::vector<double> ramp;
    for (int i = 0; i <= 10; ++i) ramp.push_back(1.0 - 0.1 * i);
    EXPECT_NEAR(*front_position(ramp, 2.0, 1.0, 0.35), 2.0 + 6.5, 1e-12);
    EXPECT_NEAR(*front_position(ramp, 2.0, 1.0, 0.35, Scan::leftmost), 8.5, 1e-12);
    EXPECT_FALSE(front_position(ramp, 0.0, 1.0, 2.0));
}

TEST(FrontPosition, SinglePassMatchesPerLevelScan) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<double> levels = tracked_levels();
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> prof(200);
        for (double& v : prof) v = u(rng);
        for (Scan scan : {Scan::rightmost, Scan::leftmost}) {
            const auto all = front_positions(prof, 1.5, 0.25, levels, scan);
            for (std::size_t k = 0; k < levels.size(); ++k) {
                const auto one = front_position(prof, 1.5, 0.25, levels[k], scan);
                ASSERT_EQ(one.has_value(), !std::isnan(all[k]));
                if (one) {
                    ASSERT_EQ(*one, all[k]);
                }
            }
        }
    }
}

TEST(SpeedFit, SyntheticLine) {
    std::vector<double> t, x;
    for (int i = 0; i < 100; ++i) {
        t.push_back(0.5 * i);
        x.push_back(3.0 + 1.2 * t.back());
    }
    const SpeedFit f = estimate_speed(t, x);
    EXPECT_NEAR(f.speed, 1.2, 1e-12);
    EXPECT_NEAR(f.std_error, 0.0, 1e-10);
    EXPECT_EQ(f.samples, 40u);
    x.assign(x.size(), std::numeric_limits<double>::quiet_NaN());
    EXPECT_THROW(estimate_speed(t, x), Error);
}

TEST(Grid, ValidationReportsEveryViolation) {
    const Violations v = check(GridConfig{10.3, 0.25, 1.0, 10.0});
    EXPECT_EQ(v.items().size(), 2u); // non-integer L/dx and CFL
    EXPECT_TRUE(check(GridConfig{2.0, 0.25, std::nullopt, 1.0}).items().size() == 1u);
    EXPECT_DOUBLE_EQ(resolve_dt({100, 0.25, std::nullopt, 1}, 0.0), 0.025);
    EXPECT_DOUBLE_EQ(resolve_dt({100, 0.25, std::nullopt, 1}, 99.0), 0.01);
}

TEST(Solver, UniformDataStaysUniform) {
    UniformAllele sys;
    sys.timing = Timing::zygote;
    sys.params = {2.0, 0.4, 0.3, 0.2};
    sys.value = {0.3, 0.5};
    const Trajectory tr = simulate(sys, {20.0, 0.25, std::nullopt, 5.0}, {}, sys.params.r);

    // Independent oracle: the same Euler steps on one well-mixed cell.
    AlleleState a{0.3, 0.5};
    for (long k = 0; k < tr.diagnostics.steps; ++k) {
        const AlleleState r = allele_reaction(sys.timing, sys.params, a);
        a = {a.d + tr.diagnostics.dt * r.d, a.w + tr.diagnostics.dt * r.w};
    }
    for (std::size_t i = 0; i < tr.final_state.size(); ++i) {
        EXPECT_EQ(tr.final_state.components[0][i], tr.final_state.components[0][0]);
        EXPECT_EQ(tr.final_state.components[1][i], tr.final_state.components[1][0]);
    }
    EXPECT_NEAR(tr.final_state.components[0][0], a.d, 1e-14);
    EXPECT_NEAR(tr.final_state.components[1][0], a.w, 1e-14);
}

TEST(Solver, PositivityBeforeClamping) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Timing timings[] = {Timing::zygote, Timing::germline, Timing::perfect_zygote};
    for (int i = 0; i < 20; ++i) {
        const Timing t = timings[i % 3];
        const Parameters p{5.0 * u(rng), u(rng), 0.05 + 0.9 * u(rng), u(rng)};
        for (Representation rep : {Representation::genotype, Representation::allele, Representation::frequency}) {
            const Trajectory tr = simulate(t, p, rep, {40.0, 0.25, std::nullopt, 10.0});
            EXPECT_GE(tr.diagnostics.min_before_clamp, -1e-12) << i << " " << to_string(rep);
        }
    }
}

TEST(Solver, GenotypeAndAlleleFormsAgree) {
    for (Timing t : {Timing::zygote, Timing::germline}) {
        const Parameters p{1.0, 0.4, 0.3, 0.2};
        const GridConfig g{300.0, 0.25, std::nullopt, 100.0};
        const Trajectory a = simulate(t, p, Representation::allele, g);
        const Trajectory gt = simulate(t, p, Representation::genotype, g);
        double worst = 0.0;
        for (std::size_t i = 0; i < a.final_drive.size(); ++i)
            worst = std::max(worst, std::abs(a.final_drive[i] - gt.final_drive[i]));
        EXPECT_LT(worst, 1e-6) << to_string(t);
    }
}

TEST(Solver, FrequencyFormAgreesWhereDensityIsPositive) {
    // The advection term is discretised differently from the allele form, so
    // the two agree to O(dx^2); dx = 0.125 brings that below 1e-4.
    const Parameters p{1.0, 0.4, 0.3, 0.2};
    const GridConfig g{300.0, 0.125, std::nullopt, 100.0};
    const Trajectory a = simulate(Timing::zygote, p, Representation::allele, g);
    const Trajectory f = simulate(Timing::zygote, p, Representation::frequency, g);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.final_total.size(); ++i) {
        if (a.final_total[i] <= 0.01) continue;
        const double pa = a.final_drive[i] / a.final_total[i];
        worst = std::max(worst, std::abs(pa - f.final_state.components[1][i]));
    }
    EXPECT_LT(worst, 1e-4);
}

TEST(Solver, BlowupReportsStep) {
    try {
        simulate(Explosive{}, {20.0, 0.25, std::nullopt, 50.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numerical_blowup);
        EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
    }
}

// Both runs share dt = 0.016 so only the spatial error changes; with the AUTO
// step the Euler time error alone (about 3% at dx = 0.4) would dominate.
TEST(Solver, PulledSpeedRefinementAndMovingWindow) {
    const Parameters p{0.0, 1.0, 0.2, 0.0};
    RunOptions early;
    early.interface_fraction = 0.125;
    const double coarse = speed_of(simulate(Timing::perfect_zygote, p, Representation::allele, {800.0, 0.4, 0.016, 300.0}, early));
    const double fine = speed_of(simulate(Timing::perfect_zygote, p, Representation::allele, {800.0, 0.2, 0.016, 300.0}, early));
    EXPECT_LT(std::abs(coarse - fine) / fine, 0.02);
    EXPECT_NEAR(fine, 2.0 * std::sqrt(0.6), 0.05 * 2.0 * std::sqrt(0.6));

    RunOptions window;
    window.moving_window = true;
    const Trajectory moving = simulate(Timing::perfect_zygote, p, Representation::allele, {200.0, 0.2, 0.016, 300.0}, window);
    EXPECT_GT(moving.diagnostics.window_shift, 300.0);
    EXPECT_LT(std::abs(speed_of(moving) - fine) / fine, 0.005);
}

TEST(Outcome, WildTypeInvasionAtInfiniteR) {
    for (double s : {0.8, 0.9}) {
        const Trajectory tr = simulate(Timing::perfect_zygote, {kInfinity, 1.0, s, 0.0}, Representation::allele,
                                       {200.0, 0.25, std::nullopt, 60.0});
        const WaveReport rep = detect_outcome(tr);
        EXPECT_EQ(rep.outcome, Outcome::wt_invasion) << s;
        EXPECT_LT(*rep.speed, 0.0);
    }
}

TEST(Outcome, ClearanceAtZeroR) {
    const Trajectory tr = simulate(Timing::perfect_zygote, {0.0, 1.0, 0.7, 0.0}, Representation::genotype,
                                   {100.0, 0.25, std::nullopt, 60.0});
    EXPECT_EQ(detect_outcome(tr).outcome, Outcome::clearance);
    EXPECT_GE(fit_decay_rate(tr).speed, 2 * 0.7 - 1 - 0.05);

    const Trajectory z = simulate(Timing::zygote, {0.0, 0.25, 0.5, 0.1}, Representation::allele,
                                  {100.0, 0.25, std::nullopt, 150.0});
    EXPECT_EQ(detect_outcome(z).outcome, Outcome::clearance);
}

TEST(Outcome, CoexistencePlateau) {
    const Parameters p{3.0, 0.25, 0.35, 0.1};
    RunOptions opt;
    opt.sample_interval = 2.0;
    const Trajectory tr = simulate(Timing::zygote, p, Representation::allele, {600.0, 0.25, std::nullopt, 400.0}, opt);
    const WaveReport rep = detect_outcome(tr);
    ASSERT_EQ(rep.outcome, Outcome::coexistence);
    EXPECT_NEAR(*rep.plateau, *interior_equilibrium(Timing::zygote, p), 0.01);
    EXPECT_GT(*rep.speed, 0.0);
    EXPECT_LT(*rep.left_speed, 0.0);
}

TEST(Ode, Equilibria) {
    const GenotypeState ww = ode_equilibrium(Timing::zygote, {2.0, 0.4, 0.3, 0.2}, {0.0, 0.0, 0.2});
    EXPECT_NEAR(ww.ww, 1.0, 1e-9);

    const Parameters p{3.0, 1.0, 0.3, 0.0};
    const GenotypeState dd = ode_equilibrium(Timing::perfect_zygote, p, {0.2, 0.0, 0.0});
    EXPECT_NEAR(dd.dd, drive_equilibrium_density(p), 1e-8);

    const Parameters q{3.0, 0.25, 0.35, 0.1};
    const GenotypeState mix = ode_equilibrium(Timing::zygote, q, {0.3, 0.1, 0.6}, 1e-12);
    const AlleleState a = to_allelic(Timing::zygote, mix, q.c);
    EXPECT_NEAR(a.d / a.total(), *interior_equilibrium(Timing::zygote, q), 1e-4);
}

TEST(Ode, ReportsNonConvergence) {
    try {
        ode_equilibrium(Timing::zygote, {0.0, 0.25, 0.35, 0.1}, {0.3, 0.1, 0.6}, 1e-14, 5.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::not_converged);
    }
}
