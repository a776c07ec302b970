#include <doctest.h>

#include <cmath>

#include "switchcon/lyapunov.hpp"
#include "switchcon/systems.hpp"

using namespace switchcon;

namespace {

SwitchedSystem scalar_linear(int n, double horizon = 5.0) {
    auto ms = make_linear_consensus(n, 1, {Digraph::complete(n)}, WeightProfile::constant(1.0),
                                    Domain::ball(10.0));
    SwitchingSignal sig(0.0, horizon, {0.0}, {1}, 1.0);
    return SwitchedSystem(std::move(ms), std::move(sig));
}

// brute-force consensus distance: grid search over the common value
double consensus_distance_grid(const std::vector<double>& x, int n, int m) {
    double best = std::numeric_limits<double>::infinity();
    // per-coordinate 1D minimization is separable; grid each coordinate
    for (int c = 0; c < m; ++c) {
        double lo = x[static_cast<std::size_t>(c)], hi = lo;
        for (int i = 0; i < n; ++i) {
            lo = std::min(lo, x[static_cast<std::size_t>(i * m + c)]);
            hi = std::max(hi, x[static_cast<std::size_t>(i * m + c)]);
        }
        double cbest = std::numeric_limits<double>::infinity();
        for (int q = 0; q <= 20000; ++q) {
            const double v = lo + (hi - lo) * q / 20000.0;
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                const double d = x[static_cast<std::size_t>(i * m + c)] - v;
                s += d * d;
            }
            cbest = std::min(cbest, s);
        }
        best = (best == std::numeric_limits<double>::infinity()) ? cbest : best + cbest;
    }
    return std::sqrt(best);
}

}  // namespace

TEST_CASE("max_v and max_w basics") {
    auto v = ScalarCertificate::norm_squared();
    CHECK(max_v(v, {1.0, 0.0, 0.0, 2.0}, 2, 2) == doctest::Approx(4.0));
    CHECK(max_v(v, {1.5, 1.5, 1.5}, 3, 1) == doctest::Approx(2.25));
    CHECK(max_v(v, {3.0}, 1, 1) == doctest::Approx(9.0));

    auto w = PairCertificate::diff_norm_squared();
    CHECK(max_w(w, {0.0, 1.0, 3.0}, 3, 1) == doctest::Approx(9.0));
    CHECK(max_w(w, {2.0, 2.0, 2.0}, 3, 1) == doctest::Approx(0.0));
    CHECK(max_w(w, {1.0, 4.0}, 2, 1) == doctest::Approx(9.0));
}

TEST_CASE("argmax_agents handles ties, singletons, and wide tolerances") {
    auto v = ScalarCertificate::norm_squared();
    CHECK(argmax_agents(v, {2.0, -2.0, 1.0}, 3, 1, 1e-9) == std::vector<int>{1, 2});
    CHECK(argmax_agents(v, {2.0, -1.0, 1.0}, 3, 1, 1e-9) == std::vector<int>{1});
    CHECK(argmax_agents(v, {2.0, -1.0, 1.0}, 3, 1, 100.0) == std::vector<int>{1, 2, 3});
}

TEST_CASE("dini_max_v matches hand evaluation and the finite-difference oracle") {
    auto v = ScalarCertificate::norm_squared();
    auto sys = scalar_linear(2);

    // tie at (1,-1): both agents in the argmax, d/dt V = -4 for each
    CHECK(dini_max_v(v, sys, 0.5, {1.0, -1.0}) == doctest::Approx(-4.0));
    // unique argmax at (2,1): 2*2*(1-2) = -4
    CHECK(dini_max_v(v, sys, 0.5, {2.0, 1.0}) == doctest::Approx(-4.0));

    const double fd = dini_max_v_fd(v, sys, 0.5, {2.0, 1.0}, 1e-6);
    CHECK(std::abs(fd - (-4.0)) < 1e-4);

    // zero field
    ModeSet zero;
    zero.n = 2;
    zero.m = 1;
    zero.domain = Domain::ball(10.0);
    zero.modes.push_back({[](double, const std::vector<double>&, std::vector<double>& dx) {
                              std::fill(dx.begin(), dx.end(), 0.0);
                          },
                          Digraph::self_loops_only(2), true});
    SwitchedSystem zsys(zero, SwitchingSignal(0.0, 2.0, {0.0}, {1}, 1.0));
    CHECK(dini_max_v(v, zsys, 1.0, {1.0, -1.0}) == doctest::Approx(0.0));
}

TEST_CASE("analytic and finite-difference Dini agree along a trajectory") {
    auto v = ScalarCertificate::norm_squared();
    auto sys = scalar_linear(4);
    auto traj = integrate(sys, {1.0, -0.5, 0.3, 0.9}, 0.0, 2.0, 1e-2);
    for (std::size_t s = 0; s < traj.size(); s += 17) {
        const auto& x = traj.states[s];
        // only where the argmax set is stable under tolerance perturbation
        const auto tight = argmax_agents(v, x, 4, 1, 1e-12);
        const auto loose = argmax_agents(v, x, 4, 1, 1e-6);
        if (tight != loose) continue;
        const double a = dini_max_v(v, sys, traj.times[s], x);
        const double fd = dini_max_v_fd(v, sys, traj.times[s], x, 1e-6);
        CHECK(std::abs(a - fd) < 1e-4);
    }
}

TEST_CASE("consensus_distance closed form") {
    CHECK(consensus_distance({1.0, -1.0}, 2, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(consensus_distance({2.0, 2.0, 2.0}, 3, 1) == doctest::Approx(0.0));
    // translation invariance
    const double a = consensus_distance({1.0, 0.5, -0.2, 0.9}, 2, 2);
    const double b = consensus_distance({1.0 + 5.0, 0.5 - 3.0, -0.2 + 5.0, 0.9 - 3.0}, 2, 2);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("consensus_distance matches grid search on random states") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rng.uniform_int(2, 4);
        const int m = rng.uniform_int(1, 2);
        std::vector<double> x;
        for (int c = 0; c < n * m; ++c) x.push_back(rng.uniform(-2.0, 2.0));
        CHECK(consensus_distance(x, n, m) ==
              doctest::Approx(consensus_distance_grid(x, n, m)).epsilon(1e-6));
    }
}

TEST_CASE("stability_radius analytic and bisection routes") {
    auto same = ScalarCertificate::norm_squared();  // beta1 = beta2 = r^2
    CHECK(stability_radius(same, 0.7) == doctest::Approx(0.7));
    CHECK(stability_radius(same, 0.0) == doctest::Approx(0.0));

    ScalarCertificate gap;  // beta1 = r^2, beta2 = 2 r^2 -> delta = eps/sqrt(2)
    gap.v = same.v;
    gap.beta1 = [](double r) { return r * r; };
    gap.beta2 = [](double r) { return 2.0 * r * r; };
    CHECK(stability_radius(gap, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
    gap.beta2_inv = [](double y) { return std::sqrt(y / 2.0); };
    CHECK(stability_radius(gap, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    ScalarCertificate none;
    none.v = same.v;
    CHECK_THROWS_AS(stability_radius(none, 0.5), std::invalid_argument);
}

TEST_CASE("check_assumption_v: clean on linear consensus, flags expansion") {
    auto v = ScalarCertificate::norm_squared();
    auto ms = make_linear_consensus(3, 1, {Digraph::complete(3), Digraph(3, {{1, 2}, {2, 3}})},
                                    WeightProfile::constant(1.0), Domain::ball(10.0));
    auto sig = random_signal(2, 0.2, 0.5, 0.0, 4.0, 31);
    SwitchedSystem sys(ms, sig);
    auto traj = integrate(sys, {1.0, -0.7, 0.2}, 0.0, 4.0, 1e-2);
    auto rep = check_assumption_v(v, sys, traj);
    CHECK(rep.ok());

    // max_v nonincreasing along the trajectory (up to integrator tolerance)
    for (std::size_t s = 1; s < rep.samples.size(); ++s)
        CHECK(rep.samples[s].max_v <= rep.samples[s - 1].max_v + 1e-9);

    // expanding field: Dini = 2 max_v > 0 everywhere off the origin
    ModeSet expand = ms;
    expand.modes.resize(1);
    expand.modes[0].field = [](double, const std::vector<double>& x, std::vector<double>& dx) {
        for (std::size_t c = 0; c < x.size(); ++c) dx[c] = x[c];
    };
    SwitchedSystem bad(expand, SwitchingSignal(0.0, 1.0, {0.0}, {1}, 1.0));
    auto btraj = integrate(bad, {1.0, -0.7, 0.2}, 0.0, 1.0, 1e-2);
    auto brep = check_assumption_v(v, bad, btraj);
    CHECK_FALSE(brep.ok());
    int dini_violations = 0;
    for (const auto& e : brep.violations)
        if (e.kind == "dini_v_positive") ++dini_violations;
    CHECK(dini_violations == static_cast<int>(btraj.size()));
}

TEST_CASE("check_assumption_v: all-equal start is vacuous") {
    auto v = ScalarCertificate::norm_squared();
    auto sys = scalar_linear(3, 2.0);
    auto traj = integrate(sys, {1.0, 1.0, 1.0}, 0.0, 2.0, 1e-2);
    auto rep = check_assumption_v(v, sys, traj);
    CHECK(rep.ok());
    for (const auto& row : rep.samples) CHECK(row.dini_v == doctest::Approx(0.0));
}

TEST_CASE("check_assumption_w: clean on linear consensus, flags a planted isolated mover") {
    auto w = PairCertificate::diff_norm_squared();
    auto ms = make_linear_consensus(3, 1, {Digraph::complete(3)}, WeightProfile::constant(1.0),
                                    Domain::ball(10.0));
    SwitchedSystem sys(ms, SwitchingSignal(0.0, 3.0, {0.0}, {1}, 1.0));
    auto traj = integrate(sys, {1.0, -0.7, 0.2}, 0.0, 3.0, 1e-2);
    CHECK(check_assumption_w(w, sys, traj).ok());

    // planted: two isolated groups at internal consensus, but the field
    // moves them apart anyway
    ModeSet bad;
    bad.n = 2;
    bad.m = 1;
    bad.domain = Domain::ball(10.0);
    bad.modes.push_back({[](double, const std::vector<double>&, std::vector<double>& dx) {
                             dx[0] = 1.0;
                             dx[1] = -1.0;
                         },
                         Digraph::self_loops_only(2), true});
    SwitchedSystem bsys(bad, SwitchingSignal(0.0, 1.0, {0.0}, {1}, 1.0));
    auto btraj = integrate(bsys, {0.5, -0.5}, 0.0, 1.0, 1e-2);
    auto brep = check_assumption_w(w, bsys, btraj);
    CHECK_FALSE(brep.ok());
    bool frozen = false;
    for (const auto& e : brep.violations)
        if (e.kind == "frozen_pair_moves") frozen = true;
    CHECK(frozen);
}

TEST_CASE("stability_radius containment: delta-ball starts stay in the eps-ball") {
    auto v = ScalarCertificate::norm_squared();
    const double eps = 0.5;
    const double delta = stability_radius(v, eps);
    CHECK(delta == doctest::Approx(eps));
    auto ms = make_linear_consensus(3, 2, {Digraph::complete(3), Digraph(3, {{1, 2}, {2, 3}, {3, 1}})},
                                    WeightProfile::constant(1.0), Domain::ball(eps));
    Rng rng(17);
    Domain start = Domain::ball(delta);
    for (int trial = 0; trial < 20; ++trial) {
        auto sig = random_signal(2, 0.2, 0.5, 0.0, 5.0, 100 + static_cast<std::uint64_t>(trial));
        SwitchedSystem sys(ms, std::move(sig));
        auto x0 = start.sample(3, 2, rng);
        auto traj = integrate(sys, std::move(x0), 0.0, 5.0, 1e-2);
        CHECK_FALSE(traj.domain_exit.has_value());
    }
}

TEST_CASE("strict_decrease_window on connected vs split processes") {
    auto v = ScalarCertificate::norm_squared();

    // uniformly strongly connected: strict decrease at every checkable switch
    auto gen = random_uniformly_connected_signal(3, 0.2, 0.4, 1.0, 0.0, 20.0,
                                                 Connectivity::Strong, 8);
    auto ms = make_linear_consensus(3, 1, gen.process.mode_graphs, WeightProfile::constant(1.0),
                                    Domain::ball(10.0));
    SwitchedSystem sys(ms, gen.process.signal);
    auto traj = integrate(sys, {1.0, -0.6, 0.1}, 0.0, 20.0, 1e-2);
    auto rep = monitor_trajectory(sys, traj, &v, nullptr);
    const double T = 3.0 * (gen.achieved_window + 2.0 * 0.2);
    auto verdict = strict_decrease_window(rep, sys, T);
    CHECK(verdict.kind == WindowVerdictKind::Pass);
    CHECK_FALSE(verdict.checks.empty());

    // permanently split graph: extremal agents isolated, max_v constant
    auto split = make_linear_consensus(2, 1, {Digraph::self_loops_only(2), Digraph::self_loops_only(2)},
                                       WeightProfile::constant(1.0), Domain::ball(10.0));
    auto ssig = random_signal(2, 0.2, 0.4, 0.0, 20.0, 9);
    SwitchedSystem ssys(split, ssig);
    auto straj = integrate(ssys, {1.0, -1.0}, 0.0, 20.0, 1e-2);
    auto srep = monitor_trajectory(ssys, straj, &v, nullptr);
    auto sverdict = strict_decrease_window(srep, ssys, T);
    CHECK(sverdict.kind == WindowVerdictKind::Fail);

    // state already at consensus: vacuous
    auto ctraj = integrate(ssys, {0.7, 0.7}, 0.0, 20.0, 1e-2);
    auto crep = monitor_trajectory(ssys, ctraj, &v, nullptr);
    CHECK(strict_decrease_window(crep, ssys, T).kind == WindowVerdictKind::Vacuous);

    // window longer than the horizon
    auto hverdict = strict_decrease_window(srep, ssys, 100.0);
    CHECK(hverdict.kind == WindowVerdictKind::InsufficientHorizon);
}
