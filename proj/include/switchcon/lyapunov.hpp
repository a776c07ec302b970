#ifndef SWITCHCON_LYAPUNOV_HPP
#define SWITCHCON_LYAPUNOV_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "switchcon/dynamics.hpp"

namespace switchcon {

/// Scalar per-agent certificate V with optional analytic gradient and
/// optional class-K sandwich beta1 <= V <= beta2 (by radius).
struct ScalarCertificate {
    std::function<double(std::span<const double>)> v;
    std::function<void(std::span<const double>, std::span<double>)> grad_v;  // optional
    std::function<double(double)> beta1, beta2;                              // optional
    std::function<double(double)> beta2_inv;                                 // optional

    /// Gradient of v at y, analytic if supplied, else central differences
    /// with h = 1e-6 * (1 + ||y||).
    void gradient(std::span<const double> y, std::span<double> out) const {
        if (grad_v) {
            grad_v(y, out);
            return;
        }
        double norm = 0.0;
        for (double c : y) norm += c * c;
        const double h = 1e-6 * (1.0 + std::sqrt(norm));
        std::vector<double> p(y.begin(), y.end());
        for (std::size_t c = 0; c < y.size(); ++c) {
            p[c] = y[c] + h;
            const double up = v(p);
            p[c] = y[c] - h;
            const double dn = v(p);
            p[c] = y[c];
            out[c] = (up - dn) / (2.0 * h);
        }
    }

    static ScalarCertificate norm_squared() {
        ScalarCertificate c;
        c.v = [](std::span<const double> y) {
            double s = 0.0;
            for (double e : y) s += e * e;
            return s;
        };
        c.grad_v = [](std::span<const double> y, std::span<double> g) {
            for (std::size_t i = 0; i < y.size(); ++i) g[i] = 2.0 * y[i];
        };
        c.beta1 = c.beta2 = [](double r) { return r * r; };
        c.beta2_inv = [](double r) { return std::sqrt(r); };
        return c;
    }
};

/// Pair certificate W(x_i, x_j) >= 0 with W(x,x) = 0.
struct PairCertificate {
    std::function<double(std::span<const double>, std::span<const double>)> w;
    // optional analytic gradients in the first and second argument
    std::function<void(std::span<const double>, std::span<const double>, std::span<double>,
                       std::span<double>)>
        grad_w;

    void gradient(std::span<const double> a, std::span<const double> b, std::span<double> ga,
                  std::span<double> gb) const {
        if (grad_w) {
            grad_w(a, b, ga, gb);
            return;
        }
        auto fd = [&](std::span<const double> base, bool first, std::span<double> out) {
            double norm = 0.0;
            for (double c : base) norm += c * c;
            const double h = 1e-6 * (1.0 + std::sqrt(norm));
            std::vector<double> p(base.begin(), base.end());
            for (std::size_t c = 0; c < base.size(); ++c) {
                p[c] = base[c] + h;
                const double up = first ? w(p, b) : w(a, p);
                p[c] = base[c] - h;
                const double dn = first ? w(p, b) : w(a, p);
                p[c] = base[c];
                out[c] = (up - dn) / (2.0 * h);
            }
        };
        fd(a, true, ga);
        fd(b, false, gb);
    }

    static PairCertificate diff_norm_squared() {
        PairCertificate c;
        c.w = [](std::span<const double> a, std::span<const double> b) {
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) s += (b[i] - a[i]) * (b[i] - a[i]);
            return s;
        };
        c.grad_w = [](std::span<const double> a, std::span<const double> b, std::span<double> ga,
                      std::span<double> gb) {
            for (std::size_t i = 0; i < a.size(); ++i) {
                ga[i] = -2.0 * (b[i] - a[i]);
                gb[i] = 2.0 * (b[i] - a[i]);
            }
        };
        return c;
    }
};

namespace detail {

inline std::span<const double> agent(const std::vector<double>& x, int i, int m) {
    return {x.data() + (i - 1) * m, static_cast<std::size_t>(m)};
}

}  // namespace detail

/// f_{V,m}(x) = max_i V(x_i).
inline double max_v(const ScalarCertificate& cert, const std::vector<double>& x, int n, int m) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= n; ++i) best = std::max(best, cert.v(detail::agent(x, i, m)));
    return best;
}

/// f_{W,m,m}(x) = max over ordered pairs (i,j) of W(x_i, x_j).
inline double max_w(const PairCertificate& cert, const std::vector<double>& x, int n, int m) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            best = std::max(best, cert.w(detail::agent(x, i, m), detail::agent(x, j, m)));
    return best;
}

inline double default_argmax_tol(double max_value) {
    return 1e-9 * std::max(1.0, std::abs(max_value));
}

/// I_V: agents within tol of the maximum of V.
inline std::vector<int> argmax_agents(const ScalarCertificate& cert, const std::vector<double>& x,
                                      int n, int m, std::optional<double> tol = std::nullopt) {
    const double mv = max_v(cert, x, n, m);
    const double t = tol.value_or(default_argmax_tol(mv));
    std::vector<int> out;
    for (int i = 1; i <= n; ++i)
        if (cert.v(detail::agent(x, i, m)) >= mv - t) out.push_back(i);
    return out;
}

/// J_W: ordered pairs within tol of the maximum of W.
inline std::vector<std::pair<int, int>> argmax_pairs(const PairCertificate& cert,
                                                     const std::vector<double>& x, int n, int m,
                                                     std::optional<double> tol = std::nullopt) {
    const double mw = max_w(cert, x, n, m);
    const double t = tol.value_or(default_argmax_tol(mw));
    std::vector<std::pair<int, int>> out;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (cert.w(detail::agent(x, i, m), detail::agent(x, j, m)) >= mw - t)
                out.push_back({i, j});
    return out;
}

/// d/dt V(x_i) = grad V(x_i) . f_i(t, x).
inline double dv_dt(const ScalarCertificate& cert, const SwitchedSystem& sys, double t,
                    const std::vector<double>& x, int i) {
    const int m = sys.mode_set.m;
    auto dx = rhs(sys, t, x);
    std::vector<double> g(static_cast<std::size_t>(m));
    cert.gradient(detail::agent(x, i, m), g);
    double s = 0.0;
    for (int c = 0; c < m; ++c) s += g[static_cast<std::size_t>(c)] * dx[static_cast<std::size_t>((i - 1) * m + c)];
    return s;
}

inline double dw_dt(const PairCertificate& cert, const SwitchedSystem& sys, double t,
                    const std::vector<double>& x, int i, int j) {
    const int m = sys.mode_set.m;
    auto dx = rhs(sys, t, x);
    std::vector<double> ga(static_cast<std::size_t>(m)), gb(static_cast<std::size_t>(m));
    cert.gradient(detail::agent(x, i, m), detail::agent(x, j, m), ga, gb);
    double s = 0.0;
    for (int c = 0; c < m; ++c)
        s += ga[static_cast<std::size_t>(c)] * dx[static_cast<std::size_t>((i - 1) * m + c)] +
             gb[static_cast<std::size_t>(c)] * dx[static_cast<std::size_t>((j - 1) * m + c)];
    return s;
}

/// D+ f_{V,m} per the max-of-derivatives rule: the maximum of d/dt V(x_i)
/// over the argmax set.
inline double dini_max_v(const ScalarCertificate& cert, const SwitchedSystem& sys, double t,
                         const std::vector<double>& x, std::optional<double> tol = std::nullopt) {
    const auto& ms = sys.mode_set;
    double best = -std::numeric_limits<double>::infinity();
    for (int i : argmax_agents(cert, x, ms.n, ms.m, tol))
        best = std::max(best, dv_dt(cert, sys, t, x, i));
    return best;
}

inline double dini_max_w(const PairCertificate& cert, const SwitchedSystem& sys, double t,
                         const std::vector<double>& x, std::optional<double> tol = std::nullopt) {
    const auto& ms = sys.mode_set;
    double best = -std::numeric_limits<double>::infinity();
    for (auto [i, j] : argmax_pairs(cert, x, ms.n, ms.m, tol))
        best = std::max(best, dw_dt(cert, sys, t, x, i, j));
    return best;
}

/// Finite-difference cross-check: (f_{V,m}(x(t+eps)) - f_{V,m}(x(t))) / eps
/// along a short RK4 integration from (t, x).
inline double dini_max_v_fd(const ScalarCertificate& cert, const SwitchedSystem& sys, double t,
                            const std::vector<double>& x, double eps_d = 1e-6) {
    const auto& ms = sys.mode_set;
    const double t_end = std::min(t + eps_d, sys.signal.horizon_end);
    auto traj = integrate(sys, x, t, t_end, eps_d);
    const double before = max_v(cert, x, ms.n, ms.m);
    const double after = max_v(cert, traj.states.back(), ms.n, ms.m);
    return (after - before) / (t_end - t);
}

/// Euclidean distance from x to the consensus set, in closed form:
/// sqrt(sum_i ||x_i - mean||^2).
inline double consensus_distance(const std::vector<double>& x, int n, int m) {
    std::vector<double> mean(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < m; ++c) mean[static_cast<std::size_t>(c)] += x[static_cast<std::size_t>(i * m + c)];
    for (double& c : mean) c /= static_cast<double>(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < m; ++c) {
            const double d = x[static_cast<std::size_t>(i * m + c)] - mean[static_cast<std::size_t>(c)];
            s += d * d;
        }
    return std::sqrt(s);
}

/// delta = beta2^{-1}(beta1(eps)): starts with all agents in the delta-ball
/// stay in the eps-ball. Analytic inverse when supplied, else monotone
/// bisection on [0, eps] to 1e-12.
inline double stability_radius(const ScalarCertificate& cert, double eps) {
    if (!cert.beta1 || !cert.beta2) throw std::invalid_argument("stability_radius: beta1/beta2 required");
    if (eps < 0.0) throw std::invalid_argument("stability_radius: eps < 0");
    const double target = cert.beta1(eps);
    if (cert.beta2_inv) return cert.beta2_inv(target);
    double lo = 0.0, hi = eps;  // beta2 >= beta1 so delta <= eps
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (cert.beta2(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct MonitorMargins {
    double tol_decrease = 1e-9;   // allowed Dini excess above zero
    double margin_strict = 1e-12; // "strictly negative" threshold
    double tol_state = 1e-9;      // neighbor-difference threshold
    double tol_zero = 1e-9;       // field-norm threshold for frozen agents
    double tol_tie_strict = 1e-12;  // relative tie width for per-member checks
    double freeze_slope = 10.0;   // coupling-slope budget for sub-tol_state neighbor gaps
    int s_samples = 5;            // reset-clock samples for the "for all s" checks

    // an agent whose neighbors all agree within tol_state can still carry a
    // field of order (n-1) * slope * tol_state; budget for that
    double frozen_tol(int n) const {
        return tol_zero + freeze_slope * static_cast<double>(n) * tol_state;
    }
};

struct MonitorSample {
    double t = 0.0;
    int mode_id = 0;
    double max_v = 0.0;
    double max_w = 0.0;
    double dini_v = 0.0;
    double dini_w = 0.0;
    double dist = 0.0;
    std::vector<int> argmax_v;
    std::vector<std::pair<int, int>> argmax_w;
};

struct MonitorEntry {
    double t;
    std::string kind;
    std::string witness;
};

struct MonitorReport {
    std::vector<MonitorSample> samples;
    std::vector<MonitorEntry> violations;
    std::vector<MonitorEntry> warnings;
    bool has_v = false;
    bool has_w = false;
    bool ok() const { return violations.empty(); }
};

namespace detail {

inline bool agents_differ(const std::vector<double>& x, int i, int j, int m, double tol) {
    for (int c = 0; c < m; ++c)
        if (std::abs(x[static_cast<std::size_t>((i - 1) * m + c)] -
                     x[static_cast<std::size_t>((j - 1) * m + c)]) > tol)
            return true;
    return false;
}

inline double field_agent_norm(const SwitchedSystem& sys, int mode_id, double s,
                               const std::vector<double>& x, int i) {
    std::vector<double> dx(x.size());
    sys.mode_set.modes[static_cast<std::size_t>(mode_id) - 1].field(s, x, dx);
    double norm = 0.0;
    const int m = sys.mode_set.m;
    for (int c = 0; c < m; ++c) {
        const double v = dx[static_cast<std::size_t>((i - 1) * m + c)];
        norm += v * v;
    }
    return std::sqrt(norm);
}

/// max over sampled reset clocks in [0, s_max] of ||f_{k,i}(s, x)||.
inline double frozen_field_norm(const SwitchedSystem& sys, int mode_id,
                                const std::vector<double>& x, int i, int s_samples) {
    const double s_max = sys.signal.tau_u.value_or(sys.signal.tau_d);
    double worst = 0.0;
    for (int q = 0; q < s_samples; ++q) {
        const double s = s_max * static_cast<double>(q) / static_cast<double>(std::max(1, s_samples - 1));
        worst = std::max(worst, field_agent_norm(sys, mode_id, s, x, i));
    }
    return worst;
}

inline std::string fmt_time(double t) {
    std::ostringstream os;
    os << t;
    return os.str();
}

}  // namespace detail

/// Fill per-sample monitor values (max_v/max_w, argmax sets, Dini estimates,
/// consensus distance) for a trajectory.
inline MonitorReport monitor_trajectory(const SwitchedSystem& sys, const Trajectory& traj,
                                        const ScalarCertificate* v_cert,
                                        const PairCertificate* w_cert) {
    const auto& ms = sys.mode_set;
    MonitorReport rep;
    rep.has_v = v_cert != nullptr;
    rep.has_w = w_cert != nullptr;
    rep.samples.reserve(traj.size());
    for (std::size_t s = 0; s < traj.size(); ++s) {
        MonitorSample row;
        row.t = traj.times[s];
        row.mode_id = traj.mode_ids[s];
        const auto& x = traj.states[s];
        row.dist = consensus_distance(x, ms.n, ms.m);
        if (v_cert) {
            row.max_v = max_v(*v_cert, x, ms.n, ms.m);
            row.argmax_v = argmax_agents(*v_cert, x, ms.n, ms.m);
            row.dini_v = dini_max_v(*v_cert, sys, row.t, x);
        }
        if (w_cert) {
            row.max_w = max_w(*w_cert, x, ms.n, ms.m);
            row.argmax_w = argmax_pairs(*w_cert, x, ms.n, ms.m);
            row.dini_w = dini_max_w(*w_cert, sys, row.t, x);
        }
        rep.samples.push_back(std::move(row));
    }
    return rep;
}

/// Check the V-certificate monotonicity conditions along a trajectory:
/// (a) Dini of max-V nonpositive, (b) extremal agents with a differing
/// neighbor strictly decrease, (c) extremal agents with no differing
/// neighbor have (sampled-s) zero field. Violations are report entries.
inline MonitorReport check_assumption_v(const ScalarCertificate& cert, const SwitchedSystem& sys,
                                        const Trajectory& traj, MonitorMargins margins = {}) {
    const auto& ms = sys.mode_set;
    MonitorReport rep = monitor_trajectory(sys, traj, &cert, nullptr);
    for (std::size_t s = 0; s < traj.size(); ++s) {
        const auto& row = rep.samples[s];
        const auto& x = traj.states[s];
        const double t = row.t;
        if (row.dini_v > margins.tol_decrease)
            rep.violations.push_back({t, "dini_v_positive", "D+ = " + detail::fmt_time(row.dini_v)});
        const auto& graph = sys.mode_set.modes[static_cast<std::size_t>(row.mode_id) - 1].graph;
        // per-member strictness holds only for the exact argmax; members of
        // the wider tie band may transiently move toward the maximum
        const auto tight = argmax_agents(cert, x, ms.n, ms.m,
                                         margins.tol_tie_strict * std::max(1.0, std::abs(row.max_v)));
        for (int i : tight) {
            bool has_diff_neighbor = false;
            for (int j : neighbors(graph, i))
                if (j != i && detail::agents_differ(x, i, j, ms.m, margins.tol_state)) {
                    has_diff_neighbor = true;
                    break;
                }
            if (has_diff_neighbor) {
                const double d = dv_dt(cert, sys, t, x, i);
                if (d > margins.margin_strict)
                    rep.violations.push_back(
                        {t, "argmax_not_strict", "agent " + std::to_string(i) + " dV/dt = " + detail::fmt_time(d)});
                else if (d > -margins.margin_strict)
                    rep.warnings.push_back(
                        {t, "argmax_borderline", "agent " + std::to_string(i) + " dV/dt = " + detail::fmt_time(d)});
            } else {
                const double fn = detail::frozen_field_norm(sys, row.mode_id, x, i, margins.s_samples);
                if (fn > margins.frozen_tol(ms.n))
                    rep.violations.push_back(
                        {t, "frozen_agent_moves", "agent " + std::to_string(i) + " |f| = " + detail::fmt_time(fn)});
            }
        }
    }
    return rep;
}

/// Pair-certificate mirror of check_assumption_v, including the "only if"
/// direction: a strictly decreasing extremal pair must have a differing
/// neighbor on at least one side.
inline MonitorReport check_assumption_w(const PairCertificate& cert, const SwitchedSystem& sys,
                                        const Trajectory& traj, MonitorMargins margins = {}) {
    const auto& ms = sys.mode_set;
    MonitorReport rep = monitor_trajectory(sys, traj, nullptr, &cert);
    for (std::size_t s = 0; s < traj.size(); ++s) {
        const auto& row = rep.samples[s];
        const auto& x = traj.states[s];
        const double t = row.t;
        if (row.dini_w > margins.tol_decrease)
            rep.violations.push_back({t, "dini_w_positive", "D+ = " + detail::fmt_time(row.dini_w)});
        const auto& graph = sys.mode_set.modes[static_cast<std::size_t>(row.mode_id) - 1].graph;
        auto side_differs = [&](int a) {
            for (int k : neighbors(graph, a))
                if (k != a && detail::agents_differ(x, a, k, ms.m, margins.tol_state)) return true;
            return false;
        };
        // strictness only for the exact argmax pairs (see check_assumption_v)
        const auto tight = argmax_pairs(cert, x, ms.n, ms.m,
                                        margins.tol_tie_strict * std::max(1.0, std::abs(row.max_w)));
        for (auto [i, j] : tight) {
            const bool diff = side_differs(i) || side_differs(j);
            const double d = dw_dt(cert, sys, t, x, i, j);
            const std::string pair = "pair (" + std::to_string(i) + "," + std::to_string(j) + ")";
            if (diff) {
                if (d > margins.margin_strict)
                    rep.violations.push_back({t, "argmax_pair_not_strict", pair + " dW/dt = " + detail::fmt_time(d)});
                else if (d > -margins.margin_strict)
                    rep.warnings.push_back({t, "argmax_pair_borderline", pair + " dW/dt = " + detail::fmt_time(d)});
            } else {
                // no differing neighbor on either side: both fields must vanish
                const double fi = detail::frozen_field_norm(sys, row.mode_id, x, i, margins.s_samples);
                const double fj = detail::frozen_field_norm(sys, row.mode_id, x, j, margins.s_samples);
                if (fi > margins.frozen_tol(ms.n) || fj > margins.frozen_tol(ms.n))
                    rep.violations.push_back({t, "frozen_pair_moves", pair});
                // "only if": the pair must not be strictly decreasing
                if (d < -margins.margin_strict)
                    rep.violations.push_back({t, "isolated_pair_decreases", pair + " dW/dt = " + detail::fmt_time(d)});
            }
        }
    }
    return rep;
}

enum class WindowVerdictKind { Pass, Fail, InsufficientHorizon, Vacuous };

struct WindowDecrease {
    double tau;       // window start (a switch time)
    double before;    // max value at tau
    double after;     // max value at tau + T_window
    double decrease;  // before - after
};

struct WindowVerdict {
    WindowVerdictKind kind = WindowVerdictKind::Vacuous;
    std::vector<WindowDecrease> checks;
    std::vector<WindowDecrease> failures;
    bool pass() const {
        return kind == WindowVerdictKind::Pass || kind == WindowVerdictKind::Vacuous;
    }
};

namespace detail {

/// Linear interpolation of a monitored column at time t.
inline double interp_column(const MonitorReport& rep, double t, bool use_w) {
    const auto& rows = rep.samples;
    auto key = [&](const MonitorSample& r) { return use_w ? r.max_w : r.max_v; };
    if (t <= rows.front().t) return key(rows.front());
    if (t >= rows.back().t) return key(rows.back());
    std::size_t lo = 0, hi = rows.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (rows[mid].t <= t ? lo : hi) = mid;
    }
    const double a = rows[lo].t, b = rows[hi].t;
    const double u = (b > a) ? (t - a) / (b - a) : 0.0;
    return key(rows[lo]) * (1.0 - u) + key(rows[hi]) * u;
}

}  // namespace detail

/// Strict-decrease window monitor: at every switch time tau_k with the state
/// off the consensus set and tau_k + T_window inside the monitored range,
/// the max-certificate value at tau_k + T_window must be strictly below its
/// value at tau_k (by more than `margin`, default 0).
inline WindowVerdict strict_decrease_window(const MonitorReport& rep, const SwitchedSystem& sys,
                                            double T_window, double tol_consensus = 1e-6,
                                            double margin = 0.0, bool use_w = false) {
    if (rep.samples.empty()) throw std::invalid_argument("strict_decrease_window: empty report");
    WindowVerdict verdict;
    const double range_start = rep.samples.front().t;
    const double range_end = rep.samples.back().t;
    if (range_start + T_window > range_end) {
        verdict.kind = WindowVerdictKind::InsufficientHorizon;
        return verdict;
    }
    bool any = false, failed = false;
    for (double tau : sys.signal.switch_times) {
        if (tau < range_start || tau + T_window > range_end) continue;
        // consensus distance at tau (nearest sample at or before tau)
        const auto& rows = rep.samples;
        std::size_t lo = 0, hi = rows.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (rows[mid].t <= tau ? lo : hi) = mid;
        }
        if (rows[lo].dist <= tol_consensus) continue;  // vacuous at (near) consensus
        const double before = detail::interp_column(rep, tau, use_w);
        const double after = detail::interp_column(rep, tau + T_window, use_w);
        WindowDecrease chk{tau, before, after, before - after};
        verdict.checks.push_back(chk);
        any = true;
        if (!(before - after > margin)) {
            verdict.failures.push_back(chk);
            failed = true;
        }
    }
    verdict.kind = !any ? WindowVerdictKind::Vacuous
                        : (failed ? WindowVerdictKind::Fail : WindowVerdictKind::Pass);
    return verdict;
}

}  // namespace switchcon

#endif  // SWITCHCON_LYAPUNOV_HPP
