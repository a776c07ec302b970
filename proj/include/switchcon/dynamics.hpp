#ifndef SWITCHCON_DYNAMICS_HPP
#define SWITCHCON_DYNAMICS_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "switchcon/graph.hpp"
#include "switchcon/signal.hpp"

namespace switchcon {

/// f(s, x, dx): reset-clock time s, stacked state x in R^{mn}, output dx.
using VectorField =
    std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

/// Compact state region, a product of identical per-agent balls or boxes
/// containing the origin in its interior. Membership uses a small slack so
/// that trajectories hugging an invariant boundary are not flagged as exits
/// by integrator round-off.
struct Domain {
    enum class Kind { AgentBall, AgentBox };
    Kind kind = Kind::AgentBall;
    double radius = std::numeric_limits<double>::infinity();
    std::vector<double> lo, hi;  // per-coordinate bounds, size m (AgentBox)
    double slack = 1e-9;

    static Domain ball(double r) {
        if (!(r > 0.0)) throw std::invalid_argument("Domain: radius must be positive");
        Domain d;
        d.radius = r;
        return d;
    }

    static Domain box(std::vector<double> lo_, std::vector<double> hi_) {
        Domain d;
        d.kind = Kind::AgentBox;
        d.lo = std::move(lo_);
        d.hi = std::move(hi_);
        if (d.lo.size() != d.hi.size() || d.lo.empty())
            throw std::invalid_argument("Domain: bad box bounds");
        for (std::size_t c = 0; c < d.lo.size(); ++c)
            if (!(d.lo[c] < 0.0 && 0.0 < d.hi[c]))
                throw std::invalid_argument("Domain: origin must be interior");
        return d;
    }

    bool contains_agent(std::span<const double> xi) const {
        if (kind == Kind::AgentBall) {
            double s = 0.0;
            for (double c : xi) s += c * c;
            return std::sqrt(s) <= radius * (1.0 + slack) + slack;
        }
        for (std::size_t c = 0; c < xi.size(); ++c) {
            const double pad = slack * (1.0 + std::abs(lo[c]) + std::abs(hi[c]));
            if (xi[c] < lo[c] - pad || xi[c] > hi[c] + pad) return false;
        }
        return true;
    }

    bool contains(const std::vector<double>& x, int n, int m) const {
        for (int i = 0; i < n; ++i)
            if (!contains_agent(std::span<const double>(x.data() + i * m, static_cast<std::size_t>(m))))
                return false;
        return true;
    }

    /// A point with every agent uniform in the domain (ball via rejection).
    std::vector<double> sample(int n, int m, Rng& rng) const {
        std::vector<double> x(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < m; ++c) {
                if (kind == Kind::AgentBox) {
                    x[static_cast<std::size_t>(i * m + c)] = rng.uniform(lo[static_cast<std::size_t>(c)],
                                                                         hi[static_cast<std::size_t>(c)]);
                } else {
                    x[static_cast<std::size_t>(i * m + c)] = rng.uniform(-radius, radius);
                }
            }
        if (kind == Kind::AgentBall) {
            for (int i = 0; i < n; ++i) {
                auto agent = std::span<double>(x.data() + i * m, static_cast<std::size_t>(m));
                double s2 = 0.0;
                for (double c : agent) s2 += c * c;
                while (s2 > radius * radius) {
                    s2 = 0.0;
                    for (double& c : agent) {
                        c = rng.uniform(-radius, radius);
                        s2 += c * c;
                    }
                }
            }
        }
        return x;
    }
};

struct Mode {
    VectorField field;
    Digraph graph;
    bool time_invariant = false;
};

/// The finite mode family F together with its state dimensions and domain.
struct ModeSet {
    int m = 0;  // per-agent state dimension
    int n = 0;  // agent count
    std::vector<Mode> modes;
    Domain domain;

    void validate() const {
        if (m < 1 || n < 1 || modes.empty()) throw std::invalid_argument("ModeSet: empty");
        for (const auto& mode : modes)
            if (mode.graph.n != n) throw std::invalid_argument("ModeSet: graph agent count mismatch");
    }

    std::size_t dim() const { return static_cast<std::size_t>(m) * static_cast<std::size_t>(n); }

    std::span<const double> agent_state(const std::vector<double>& x, int i) const {
        return {x.data() + (i - 1) * m, static_cast<std::size_t>(m)};
    }
};

struct SwitchedSystem {
    ModeSet mode_set;
    SwitchingSignal signal;

    SwitchedSystem(ModeSet ms, SwitchingSignal sig)
        : mode_set(std::move(ms)), signal(std::move(sig)) {
        mode_set.validate();
        for (int id : signal.mode_ids)
            if (id > static_cast<int>(mode_set.modes.size()))
                throw std::invalid_argument("SwitchedSystem: signal references unknown mode");
    }

    GraphProcess graph_process() const {
        std::vector<Digraph> gs;
        gs.reserve(mode_set.modes.size());
        for (const auto& mode : mode_set.modes) gs.push_back(mode.graph);
        return GraphProcess(std::move(gs), signal);
    }

    const Digraph& active_graph(double t) const {
        return mode_set.modes[static_cast<std::size_t>(mode_at(signal, t)) - 1].graph;
    }
};

/// f(t,x) = f_tilde_{sigma(t)}(t - gamma_sigma(t), x).
inline void rhs(const SwitchedSystem& sys, double t, const std::vector<double>& x,
                std::vector<double>& dx) {
    const int k = mode_at(sys.signal, t);
    const double s = t - gamma(sys.signal, t);
    sys.mode_set.modes[static_cast<std::size_t>(k) - 1].field(s, x, dx);
}

inline std::vector<double> rhs(const SwitchedSystem& sys, double t, const std::vector<double>& x) {
    std::vector<double> dx(x.size());
    rhs(sys, t, x, dx);
    return dx;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<int> mode_ids;
    std::vector<std::size_t> switch_marks;  // sample indices at switch instants
    std::optional<double> domain_exit;

    std::size_t size() const { return times.size(); }

    /// Index of the last sample with time <= t.
    std::size_t index_at(double t) const {
        auto it = std::upper_bound(times.begin(), times.end(), t);
        if (it == times.begin()) throw std::out_of_range("Trajectory: time before first sample");
        return static_cast<std::size_t>(it - times.begin()) - 1;
    }
};

namespace detail {

inline bool all_finite(const std::vector<double>& x) {
    for (double c : x)
        if (!std::isfinite(c)) return false;
    return true;
}

/// One classic RK4 step of the active mode's field; s is the reset clock at
/// the start of the step.
inline void rk4_step(const VectorField& f, double s, double h, std::vector<double>& x,
                     std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3,
                     std::vector<double>& k4, std::vector<double>& tmp) {
    const std::size_t d = x.size();
    f(s, x, k1);
    for (std::size_t c = 0; c < d; ++c) tmp[c] = x[c] + 0.5 * h * k1[c];
    f(s + 0.5 * h, tmp, k2);
    for (std::size_t c = 0; c < d; ++c) tmp[c] = x[c] + 0.5 * h * k2[c];
    f(s + 0.5 * h, tmp, k3);
    for (std::size_t c = 0; c < d; ++c) tmp[c] = x[c] + h * k3[c];
    f(s + h, tmp, k4);
    for (std::size_t c = 0; c < d; ++c)
        x[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
}

}  // namespace detail

/// Fixed-step RK4 with the step sequence subdivided so that no step crosses
/// a switch time: integration lands exactly on each switch, then restarts
/// with the new mode and reset clock. Stops early with domain_exit set when
/// the state leaves the domain.
inline Trajectory integrate(const SwitchedSystem& sys, std::vector<double> x0, double t0,
                            double t_end, double step) {
    const auto& ms = sys.mode_set;
    if (x0.size() != ms.dim()) throw std::invalid_argument("integrate: bad state dimension");
    if (!(step > 0.0)) throw std::invalid_argument("integrate: step must be positive");
    if (!(t0 < t_end) || t0 < sys.signal.horizon_start || t_end > sys.signal.horizon_end)
        throw std::invalid_argument("integrate: time range outside horizon");
    if (!ms.domain.contains(x0, ms.n, ms.m)) throw std::invalid_argument("integrate: x0 outside domain");

    Trajectory traj;
    std::vector<double> x = std::move(x0);
    std::vector<double> k1(ms.dim()), k2(ms.dim()), k3(ms.dim()), k4(ms.dim()), tmp(ms.dim());

    auto record = [&](double t, int mode, bool is_switch) {
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.mode_ids.push_back(mode);
        if (is_switch) traj.switch_marks.push_back(traj.times.size() - 1);
    };

    double seg_start = t0;
    record(t0, mode_at(sys.signal, t0), false);
    while (seg_start < t_end) {
        const std::size_t k = sys.signal.interval_index(seg_start);
        const double tau_next = (k + 1 < sys.signal.interval_count())
                                    ? sys.signal.switch_times[k + 1]
                                    : sys.signal.horizon_end;
        const double seg_end = std::min(tau_next, t_end);
        const int mode_id = sys.signal.mode_ids[k];
        const auto& f = ms.modes[static_cast<std::size_t>(mode_id) - 1].field;
        const double tau_k = sys.signal.switch_times[k];
        const double len = seg_end - seg_start;
        const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / step - 1e-12)));
        const double h = len / static_cast<double>(steps);
        for (std::size_t p = 0; p < steps; ++p) {
            const double t = seg_start + h * static_cast<double>(p);
            detail::rk4_step(f, t - tau_k, h, x, k1, k2, k3, k4, tmp);
            const double t_new = (p + 1 == steps) ? seg_end : t + h;
            if (!detail::all_finite(x))
                throw std::runtime_error("integrate: non-finite state at t=" + std::to_string(t_new));
            const bool at_switch = (p + 1 == steps) && (seg_end == tau_next) && (seg_end < t_end);
            const int mode_rec = at_switch ? sys.signal.mode_ids[k + 1] : mode_id;
            record(t_new, mode_rec, at_switch);
            if (!ms.domain.contains(x, ms.n, ms.m)) {
                traj.domain_exit = t_new;
                return traj;
            }
        }
        seg_start = seg_end;
    }
    return traj;
}

struct LocalityViolation {
    int mode;
    int agent;
    int non_neighbor;
    double deviation;
};

struct LocalityReport {
    std::vector<LocalityViolation> violations;
    bool ok() const { return violations.empty(); }
};

/// Check that each agent's field component ignores non-neighbor states:
/// perturb random non-neighbor agents at random (s, x) points in the domain
/// and require agent i's component to be unchanged.
inline LocalityReport validate_locality(const ModeSet& ms, int samples, std::uint64_t seed,
                                        double tol = 1e-12, double s_max = 1.0) {
    ms.validate();
    if (samples < 1) throw std::invalid_argument("validate_locality: samples < 1");
    Rng rng(seed);
    LocalityReport rep;
    std::vector<double> dx(ms.dim()), dx2(ms.dim());
    for (std::size_t k = 0; k < ms.modes.size(); ++k) {
        const auto& mode = ms.modes[k];
        for (int i = 1; i <= ms.n; ++i) {
            const auto nbrs = neighbors(mode.graph, i);
            for (int j = 1; j <= ms.n; ++j) {
                if (nbrs.count(j)) continue;
                double worst = 0.0;
                for (int trial = 0; trial < samples; ++trial) {
                    auto x = ms.domain.sample(ms.n, ms.m, rng);
                    const double s = rng.uniform(0.0, s_max);
                    mode.field(s, x, dx);
                    // replace agent j's state by a fresh domain point
                    auto fresh = ms.domain.sample(1, ms.m, rng);
                    for (int c = 0; c < ms.m; ++c)
                        x[static_cast<std::size_t>((j - 1) * ms.m + c)] = fresh[static_cast<std::size_t>(c)];
                    mode.field(s, x, dx2);
                    for (int c = 0; c < ms.m; ++c) {
                        const auto idx = static_cast<std::size_t>((i - 1) * ms.m + c);
                        worst = std::max(worst, std::abs(dx2[idx] - dx[idx]));
                    }
                }
                if (worst > tol)
                    rep.violations.push_back({static_cast<int>(k) + 1, i, j, worst});
            }
        }
    }
    return rep;
}

struct InvarianceReport {
    int trials = 0;
    int exits = 0;
    std::vector<std::uint64_t> exit_seeds;
    bool ok() const { return exits == 0; }
};

/// Integrate from random starts inside a per-agent ball under fresh random
/// signals and report any exit from that ball.
inline InvarianceReport invariance_probe(const ModeSet& ms, double region, int trials,
                                         double horizon, double tau_d, double tau_u, double step,
                                         std::uint64_t seed) {
    ms.validate();
    Domain ball = Domain::ball(region);
    InvarianceReport rep;
    rep.trials = trials;
    for (int trial = 0; trial < trials; ++trial) {
        const auto trial_seed = seed + static_cast<std::uint64_t>(trial);
        Rng rng(trial_seed * 2654435761ULL + 1);
        auto sig = random_signal(static_cast<int>(ms.modes.size()), tau_d, tau_u, 0.0, horizon,
                                 trial_seed);
        ModeSet probe = ms;
        probe.domain = ball;  // exit from the ball terminates the run
        SwitchedSystem sys(std::move(probe), std::move(sig));
        auto x0 = ball.sample(ms.n, ms.m, rng);
        auto traj = integrate(sys, std::move(x0), 0.0, horizon, step);
        if (traj.domain_exit) {
            ++rep.exits;
            rep.exit_seeds.push_back(trial_seed);
        }
    }
    return rep;
}

}  // namespace switchcon

#endif  // SWITCHCON_DYNAMICS_HPP
