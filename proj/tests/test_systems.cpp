#include <doctest.h>

#include <cmath>

#include "switchcon/lyapunov.hpp"
#include "switchcon/systems.hpp"

using namespace switchcon;

TEST_CASE("linear consensus field matches the hand-written oracle") {
    auto ms = make_linear_consensus(3, 2, {Digraph(3, {{1, 2}, {3, 2}, {2, 3}})},
                                    WeightProfile::constant(0.5), Domain::ball(5.0));
    std::vector<double> x{1.0, 0.0, -1.0, 2.0, 0.5, -0.5};
    std::vector<double> dx(6);
    ms.modes[0].field(0.0, x, dx);
    // agent 1 has no incoming edges
    CHECK(dx[0] == 0.0);
    CHECK(dx[1] == 0.0);
    // agent 2: 0.5 * ((x1 - x2) + (x3 - x2))
    CHECK(dx[2] == doctest::Approx(0.5 * ((1.0 - (-1.0)) + (0.5 - (-1.0)))));
    CHECK(dx[3] == doctest::Approx(0.5 * ((0.0 - 2.0) + (-0.5 - 2.0))));
    // agent 3: 0.5 * (x2 - x3)
    CHECK(dx[4] == doctest::Approx(0.5 * (-1.0 - 0.5)));
    CHECK(dx[5] == doctest::Approx(0.5 * (2.0 - (-0.5))));

    // consensus states are equilibria
    std::vector<double> eq{0.3, -0.2, 0.3, -0.2, 0.3, -0.2};
    ms.modes[0].field(0.0, eq, dx);
    for (double c : dx) CHECK(c == 0.0);

    CHECK(validate_locality(ms, 5, 3).ok());
}

TEST_CASE("sinusoidal weights stay inside [w_min, w_max] and respect locality") {
    auto w = WeightProfile::sinusoidal(1.0, 0.5, 3.0);
    CHECK_FALSE(w.is_constant());
    for (double s = 0.0; s <= 2.0; s += 0.01) {
        const double a = w.a(1, 2, s);
        CHECK(a >= w.w_min - 1e-12);
        CHECK(a <= w.w_max + 1e-12);
        CHECK(a > 0.0);
    }
    auto ms = make_linear_consensus(3, 1, {Digraph(3, {{1, 2}, {2, 3}})}, w, Domain::ball(5.0));
    CHECK_FALSE(ms.modes[0].time_invariant);
    CHECK(validate_locality(ms, 5, 3).ok());
}

TEST_CASE("scaled consensus: identity map reduces to the linear field") {
    auto graphs = std::vector<Digraph>{Digraph::complete(3)};
    auto lin = make_linear_consensus(3, 2, graphs, WeightProfile::constant(1.0), Domain::ball(1.0));
    auto sc = make_scaled_consensus(3, 2, graphs, WeightProfile::constant(1.0),
                                    ScaleMap::identity(1.0), ScaleVariant::ScaleDifferences);
    std::vector<double> x{0.3, -0.1, 0.2, 0.4, -0.3, 0.0};
    std::vector<double> a(6), b(6);
    lin.modes[0].field(0.0, x, a);
    sc.modes[0].field(0.0, x, b);
    for (std::size_t c = 0; c < 6; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-14));
}

TEST_CASE("scaled consensus variants on two scalar agents with g(r) = r^2") {
    // x = (0.2, 0.8), edge 2 -> 1: scale-differences gives h(0.6) = 0.36,
    // scale-states gives h(0.8) - h(0.2) = 0.60
    auto graphs = std::vector<Digraph>{Digraph(2, {{2, 1}})};
    auto scale = ScaleMap::power(2.0, 1.0);
    std::vector<double> x{0.2, 0.8}, dx(2);

    auto fd = make_scaled_consensus(2, 1, graphs, WeightProfile::constant(1.0), scale,
                                    ScaleVariant::ScaleDifferences);
    fd.modes[0].field(0.0, x, dx);
    CHECK(dx[0] == doctest::Approx(0.36));
    CHECK(dx[1] == 0.0);

    auto fs = make_scaled_consensus(2, 1, graphs, WeightProfile::constant(1.0), scale,
                                    ScaleVariant::ScaleStates);
    fs.modes[0].field(0.0, x, dx);
    CHECK(dx[0] == doctest::Approx(0.60));
    CHECK(dx[1] == 0.0);

    // h preserves direction and sign
    std::vector<double> neg{-0.2, -0.8};
    fd.modes[0].field(0.0, neg, dx);
    CHECK(dx[0] == doctest::Approx(-0.36));
}

TEST_CASE("scaled consensus reaches consensus inside the eta-ball") {
    auto graphs = std::vector<Digraph>{Digraph::complete(3)};
    auto ms = make_scaled_consensus(3, 2, graphs, WeightProfile::constant(1.0),
                                    ScaleMap::power(2.0, 1.0), ScaleVariant::ScaleDifferences);
    SwitchedSystem sys(ms, SwitchingSignal(0.0, 30.0, {0.0}, {1}, 1.0));
    auto traj = integrate(sys, {0.5, -0.3, -0.4, 0.2, 0.1, 0.4}, 0.0, 30.0, 1e-2);
    CHECK_FALSE(traj.domain_exit.has_value());
    // quadratic g flattens near consensus, so the decay is algebraic (~1/t),
    // not exponential; check monotone decrease plus a loose endpoint
    const double d0 = consensus_distance(traj.states.front(), 3, 2);
    const double d_mid = consensus_distance(traj.states[traj.size() / 2], 3, 2);
    const double d_end = consensus_distance(traj.states.back(), 3, 2);
    CHECK(d_mid < d0);
    CHECK(d_end < d_mid);
    CHECK(d_end < 0.05);
}

TEST_CASE("so3 kinematics matrix identities") {
    // L at the origin is the identity
    std::array<double, 3> zero{0.0, 0.0, 0.0};
    auto L0 = so3_kinematics_matrix(zero);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            CHECK(L0[static_cast<std::size_t>(3 * a + b)] == doctest::Approx(a == b ? 1.0 : 0.0));

    // L_y y = y exactly (yhat y = 0)
    std::array<double, 3> y{M_PI / 2.0, 0.0, 0.0};
    auto L = so3_kinematics_matrix(y);
    for (int a = 0; a < 3; ++a) {
        double s = 0.0;
        for (int b = 0; b < 3; ++b) s += L[static_cast<std::size_t>(3 * a + b)] * y[static_cast<std::size_t>(b)];
        CHECK(s == doctest::Approx(y[static_cast<std::size_t>(a)]).epsilon(1e-12));
    }

    // the small-radius series agrees with the closed form near the crossover:
    // for y = (r,0,0), L[4] = 1 - c(r) r^2
    for (double r : {0.5e-4, 0.99e-4}) {
        std::array<double, 3> small{r, 0.0, 0.0};
        auto Ls = so3_kinematics_matrix(small);
        const double closed = (1.0 - 0.5 * r / std::tan(0.5 * r)) / (r * r);
        CHECK(std::abs(Ls[4] - (1.0 - closed * r * r)) < 1e-14);
    }

    // c(1) against a separate numeric evaluation of (1 - (r/2)cot(r/2))/r^2
    std::array<double, 3> unit{1.0, 0.0, 0.0};
    auto L1 = so3_kinematics_matrix(unit);
    const double coeff = 1.0 - 0.5 / std::tan(0.5);  // hat^2 entry (2,2) = -1 for this axis
    CHECK(L1[8] == doctest::Approx(1.0 - coeff).epsilon(1e-12));
}

TEST_CASE("so3 field: norm derivative equals twice the projected drive") {
    auto ms = make_so3_axis_angle(3, {Digraph::complete(3)}, WeightProfile::constant(1.0),
                                  0.9 * M_PI);
    std::vector<double> x{0.4, -0.2, 0.1, -0.3, 0.5, 0.0, 0.1, 0.1, -0.6};
    std::vector<double> dx(9);
    ms.modes[0].field(0.0, x, dx);
    for (int i = 0; i < 3; ++i) {
        // omega_i = sum_j (x_j - x_i); d/dt ||x_i||^2 = 2 x_i . dx_i = 2 x_i . omega_i
        std::vector<double> omega(3, 0.0);
        for (int j = 0; j < 3; ++j)
            for (int c = 0; c < 3; ++c)
                omega[static_cast<std::size_t>(c)] += x[static_cast<std::size_t>(3 * j + c)] - x[static_cast<std::size_t>(3 * i + c)];
        double lhs = 0.0, rhs_v = 0.0;
        for (int c = 0; c < 3; ++c) {
            lhs += x[static_cast<std::size_t>(3 * i + c)] * dx[static_cast<std::size_t>(3 * i + c)];
            rhs_v += x[static_cast<std::size_t>(3 * i + c)] * omega[static_cast<std::size_t>(c)];
        }
        CHECK(lhs == doctest::Approx(rhs_v).epsilon(1e-12));
    }
    CHECK(validate_locality(ms, 5, 7).ok());
    CHECK_THROWS_AS(make_so3_axis_angle(2, {Digraph::complete(2)}, WeightProfile::constant(1.0), 3.5),
                    std::invalid_argument);
}

TEST_CASE("so3 network synchronizes under switching") {
    auto graphs = std::vector<Digraph>{Digraph::complete(3), Digraph(3, {{1, 2}, {2, 3}, {3, 1}})};
    auto ms = make_so3_axis_angle(3, graphs, WeightProfile::constant(1.0), 0.9 * M_PI);
    auto sig = random_signal(2, 0.2, 0.5, 0.0, 15.0, 4);
    SwitchedSystem sys(ms, sig);
    auto traj = integrate(sys, {0.5, -0.2, 0.1, -0.4, 0.3, 0.0, 0.2, 0.1, -0.5}, 0.0, 15.0, 1e-2);
    CHECK_FALSE(traj.domain_exit.has_value());
    CHECK(consensus_distance(traj.states.back(), 3, 3) < 1e-6);
}

TEST_CASE("epipole coupling: zero at equal angles, equals the angle gap on the diagonal line") {
    auto p = colinear_diagonal_positions(4);
    CHECK(epipole_omega(p[0], p[1], 0.07, 0.07, 1.0, 1.0) == doctest::Approx(0.0));
    // with alpha = beta = 1 the composition telescopes to theta_j - theta_i
    for (double ti : {-0.3, -0.05, 0.0, 0.2}) {
        for (double tj : {-0.25, 0.0, 0.1, 0.3}) {
            CHECK(epipole_omega(p[0], p[2], ti, tj, 1.0, 1.0) ==
                  doctest::Approx(tj - ti).epsilon(1e-12));
            // swapped pair order (negative relative displacement)
            CHECK(epipole_omega(p[2], p[0], ti, tj, 1.0, 1.0) ==
                  doctest::Approx(tj - ti).epsilon(1e-12));
        }
    }
    CHECK(epipole_omega(p[0], p[1], 0.05, -0.05, 1.0, 1.0) == doctest::Approx(-0.1));
}

TEST_CASE("epipole coupling keeps the sign of the angle gap for other calibrations") {
    auto p = colinear_diagonal_positions(3);
    for (double alpha : {0.5, 1.0, 2.0}) {
        for (double beta : {0.5, 1.0, 3.0}) {
            for (double ti = -0.3; ti <= 0.3; ti += 0.1) {
                for (double tj = -0.3; tj <= 0.3; tj += 0.1) {
                    if (std::abs(tj - ti) < 1e-9) continue;
                    const double om = epipole_omega(p[0], p[1], ti, tj, alpha, beta);
                    CHECK((tj - ti) * om > 0.0);
                }
            }
        }
    }
}

TEST_CASE("epipole network reaches consensus in the angle box") {
    const int n = 4;
    auto p = colinear_diagonal_positions(n);
    auto graphs = std::vector<Digraph>{Digraph::complete(n)};
    auto ms = make_epipole_network(n, p, graphs, WeightProfile::constant(1.0), 0.3);
    CHECK(validate_locality(ms, 5, 11).ok());
    SwitchedSystem sys(ms, SwitchingSignal(0.0, 20.0, {0.0}, {1}, 1.0));
    auto traj = integrate(sys, {0.25, -0.2, 0.1, -0.05}, 0.0, 20.0, 1e-2);
    CHECK_FALSE(traj.domain_exit.has_value());
    CHECK(consensus_distance(traj.states.back(), n, 1) < 1e-6);

    CHECK_THROWS_AS(make_epipole_network(n, p, graphs, WeightProfile::constant(1.0), 2.0),
                    std::invalid_argument);
    auto bad = p;
    bad[1] = bad[0];
    CHECK_THROWS_AS(make_epipole_network(n, bad, graphs, WeightProfile::constant(1.0), 0.3),
                    std::invalid_argument);
}

namespace {

std::pair<ModeSet, SwitchingSignal> two_mode_setup(double horizon) {
    auto ms = make_linear_consensus(2, 1, {Digraph(2, {{1, 2}}), Digraph(2, {{2, 1}})},
                                    WeightProfile::constant(1.0), Domain::ball(5.0));
    std::vector<double> times;
    std::vector<int> modes;
    int k = 0;
    for (double t = 0.0; t < horizon; t += 1.0, ++k) {
        times.push_back(t);
        modes.push_back(k % 2 + 1);
    }
    SwitchingSignal sig(0.0, horizon, std::move(times), std::move(modes), 1.0, 1.0);
    return {std::move(ms), std::move(sig)};
}

}  // namespace

TEST_CASE("smooth_transitions leaves a constant-mode signal's field unchanged") {
    auto ms = make_linear_consensus(2, 1, {Digraph::complete(2)}, WeightProfile::constant(1.0),
                                    Domain::ball(5.0));
    SwitchingSignal sig(0.0, 4.0, {0.0, 1.0, 2.5}, {1, 1, 1}, 1.0, 2.0);
    auto [oms, osig] = smooth_transitions(ms, sig, 0.3, BlendKind::Cosine);
    CHECK(osig.switch_times == sig.switch_times);  // no blends inserted
    SwitchedSystem orig(ms, sig), smoothed(oms, osig);
    for (double t : {0.0, 0.7, 1.0, 1.9, 3.3}) {
        auto a = rhs(orig, t, {1.0, -1.0});
        auto b = rhs(smoothed, t, {1.0, -1.0});
        for (std::size_t c = 0; c < a.size(); ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-14));
    }
}

TEST_CASE("smooth_transitions makes the right-hand side continuous at switches") {
    auto [ms, sig] = two_mode_setup(6.0);
    const double tau_b = 0.3;
    auto [oms, osig] = smooth_transitions(ms, sig, tau_b, BlendKind::Cosine);
    SwitchedSystem sys(oms, osig);
    const std::vector<double> x{0.8, -0.5};
    for (double tau : {1.0, 2.0, 3.0}) {
        // at the blend start the mix is all previous-mode
        auto before = rhs(sys, tau - 1e-12, x);
        auto at = rhs(sys, tau, x);
        for (std::size_t c = 0; c < x.size(); ++c) CHECK(std::abs(before[c] - at[c]) < 1e-10);
        // at the blend end the mix is all next-mode
        auto end = rhs(sys, tau + tau_b - 1e-9, x);
        auto after = rhs(sys, tau + tau_b, x);
        for (std::size_t c = 0; c < x.size(); ++c) CHECK(std::abs(end[c] - after[c]) < 1e-7);
        // cosine midpoint is the plain average of the two fields
        auto mid = rhs(sys, tau + tau_b / 2.0, x);
        SwitchedSystem plain(ms, sig);
        auto fa = rhs(plain, tau - 1e-12, x);
        auto fb = rhs(plain, tau, x);
        for (std::size_t c = 0; c < x.size(); ++c)
            CHECK(mid[c] == doctest::Approx(0.5 * (fa[c] + fb[c])).epsilon(1e-9));
    }
    // blend graphs carry the union of both endpoint edge sets
    const auto& bg = oms.modes.back().graph;
    CHECK(bg.has_edge(1, 2));
    CHECK(bg.has_edge(2, 1));
    // smoothed dynamics still reach consensus
    auto traj = integrate(sys, {0.8, -0.5}, 0.0, 6.0, 1e-3);
    CHECK(consensus_distance(traj.states.back(), 2, 1) < 1e-2);

    CHECK_THROWS_AS(smooth_transitions(ms, sig, 1.5, BlendKind::Linear), std::invalid_argument);
}

TEST_CASE("stabilization_embed runs the single-agent flow in the difference") {
    // original flow ydot = -y; the embedding feeds it y_1 - y_2
    std::vector<SingleAgentField> fields{[](double, std::span<const double> y, std::span<double> out) {
        out[0] = -y[0];
    }};
    auto ms = stabilization_embed(fields, 1, Domain::ball(5.0));
    SwitchedSystem sys(ms, SwitchingSignal(0.0, 3.0, {0.0}, {1}, 1.0));
    auto traj = integrate(sys, {0.8, 0.0}, 0.0, 1.0, 1e-3);
    CHECK(traj.states.back()[0] == doctest::Approx(0.8 * std::exp(-1.0)).epsilon(1e-6));
    for (const auto& x : traj.states) CHECK(x[1] == 0.0);  // the anchor agent never moves

    // the origin is an equilibrium of the embedded pair
    auto eq = integrate(sys, {0.0, 0.0}, 0.0, 1.0, 1e-2);
    for (const auto& x : eq.states) {
        CHECK(x[0] == 0.0);
        CHECK(x[1] == 0.0);
    }

    CHECK(validate_locality(ms, 5, 13).ok());

    std::vector<SingleAgentField> bad{[](double, std::span<const double> y, std::span<double> out) {
        out[0] = y[0] + 1.0;
    }};
    CHECK_THROWS_AS(stabilization_embed(bad, 1, Domain::ball(5.0)), std::invalid_argument);
}

TEST_CASE("apply_timeshift reproduces the original right-hand side pointwise") {
    // one time-varying mode with long dwells, then the bounded-gap rewrite
    ModeSet ms;
    ms.n = 2;
    ms.m = 1;
    ms.domain = Domain::ball(10.0);
    ms.modes.push_back({[](double s, const std::vector<double>& x, std::vector<double>& dx) {
                            dx[0] = std::sin(s) * (x[1] - x[0]);
                            dx[1] = (1.0 + 0.5 * std::cos(s)) * (x[0] - x[1]);
                        },
                        Digraph::complete(2), false});
    SwitchingSignal sig(0.0, 9.0, {0.0, 3.7}, {1, 1}, 1.0, 5.3);
    SwitchedSystem orig(ms, sig);

    auto ex = expand_timeshift(sig);
    auto shifted = apply_timeshift(ms, ex.modes);
    SwitchedSystem rewritten(shifted, ex.signal);

    const std::vector<double> x{0.9, -0.4};
    for (int q = 0; q <= 900; ++q) {
        const double t = 9.0 * q / 900.0;
        auto a = rhs(orig, t, x);
        auto b = rhs(rewritten, t, x);
        for (std::size_t c = 0; c < x.size(); ++c) CHECK(std::abs(a[c] - b[c]) <= 1e-12);
    }
}
