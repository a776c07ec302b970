#ifndef SWITCHCON_SYSTEMS_HPP
#define SWITCHCON_SYSTEMS_HPP

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "switchcon/dynamics.hpp"

namespace switchcon {

/// Per-edge weight a_ij(s) of reset-clock time; continuous, positive,
/// bounded on [0, tau_U].
struct WeightProfile {
    std::function<double(int, int, double)> a;  // (i, j, s) -> weight
    double w_min = 1.0;
    double w_max = 1.0;

    static WeightProfile constant(double w = 1.0) {
        if (!(w > 0.0)) throw std::invalid_argument("WeightProfile: weight must be positive");
        WeightProfile p;
        p.a = [w](int, int, double) { return w; };
        p.w_min = p.w_max = w;
        return p;
    }

    /// w_base * (1 + amp * sin(omega * s)), positive for amp < 1.
    static WeightProfile sinusoidal(double w_base, double amp, double omega) {
        if (!(w_base > 0.0) || !(std::abs(amp) < 1.0))
            throw std::invalid_argument("WeightProfile: need w_base > 0, |amp| < 1");
        WeightProfile p;
        p.a = [=](int i, int j, double s) {
            return w_base * (1.0 + amp * std::sin(omega * s + 0.1 * static_cast<double>(i + j)));
        };
        p.w_min = w_base * (1.0 - std::abs(amp));
        p.w_max = w_base * (1.0 + std::abs(amp));
        return p;
    }

    bool is_constant() const { return w_min == w_max; }
};

/// Direction-preserving rescale h(y) = g(||y||)/||y|| * y on the eta-ball,
/// with g strictly increasing and g(0) = 0.
struct ScaleMap {
    std::function<double(double)> g;
    double eta = 1.0;

    static ScaleMap identity(double eta = 1.0) {
        return {[](double r) { return r; }, eta};
    }

    static ScaleMap power(double exponent = 2.0, double eta = 1.0) {
        return {[exponent](double r) { return std::pow(r, exponent); }, eta};
    }

    void apply(std::span<const double> y, std::span<double> out) const {
        double r = 0.0;
        for (double c : y) r += c * c;
        r = std::sqrt(r);
        if (r == 0.0) {
            for (auto& c : out) c = 0.0;
            return;
        }
        const double scale = g(r) / r;
        for (std::size_t c = 0; c < y.size(); ++c) out[c] = scale * y[c];
    }
};

/// f_i = sum_{j in N_i} a_ij(s) (x_j - x_i), one mode per graph.
inline ModeSet make_linear_consensus(int n, int m, const std::vector<Digraph>& graphs,
                                     const WeightProfile& weights, Domain domain = Domain::ball(1e6)) {
    ModeSet ms;
    ms.n = n;
    ms.m = m;
    ms.domain = std::move(domain);
    for (const auto& graph : graphs) {
        Mode mode;
        mode.graph = graph;
        mode.time_invariant = weights.is_constant();
        mode.field = [n, m, graph, weights](double s, const std::vector<double>& x,
                                            std::vector<double>& dx) {
            std::fill(dx.begin(), dx.end(), 0.0);
            for (const auto& [j, i] : graph.edges) {
                if (j == i) continue;
                const double w = weights.a(i, j, s);
                for (int c = 0; c < m; ++c)
                    dx[static_cast<std::size_t>((i - 1) * m + c)] +=
                        w * (x[static_cast<std::size_t>((j - 1) * m + c)] -
                             x[static_cast<std::size_t>((i - 1) * m + c)]);
            }
        };
        ms.modes.push_back(std::move(mode));
    }
    ms.validate();
    return ms;
}

enum class ScaleVariant { ScaleDifferences, ScaleStates };

/// Nonlinearly scaled consensus on the per-agent eta-ball:
///   ScaleDifferences: f'_i  = sum a_ij(s) h(x_j - x_i)
///   ScaleStates:      f''_i = sum a_ij(s) (h(x_j) - h(x_i))
inline ModeSet make_scaled_consensus(int n, int m, const std::vector<Digraph>& graphs,
                                     const WeightProfile& weights, const ScaleMap& scale,
                                     ScaleVariant variant) {
    ModeSet ms;
    ms.n = n;
    ms.m = m;
    ms.domain = Domain::ball(scale.eta);
    for (const auto& graph : graphs) {
        Mode mode;
        mode.graph = graph;
        mode.time_invariant = weights.is_constant();
        mode.field = [n, m, graph, weights, scale, variant](double s, const std::vector<double>& x,
                                                            std::vector<double>& dx) {
            std::fill(dx.begin(), dx.end(), 0.0);
            std::vector<double> buf(static_cast<std::size_t>(m)), hi(static_cast<std::size_t>(m)),
                hj(static_cast<std::size_t>(m));
            for (const auto& [j, i] : graph.edges) {
                if (j == i) continue;
                const double w = weights.a(i, j, s);
                auto xi = std::span<const double>(x.data() + (i - 1) * m, static_cast<std::size_t>(m));
                auto xj = std::span<const double>(x.data() + (j - 1) * m, static_cast<std::size_t>(m));
                if (variant == ScaleVariant::ScaleDifferences) {
                    for (int c = 0; c < m; ++c) buf[static_cast<std::size_t>(c)] = xj[static_cast<std::size_t>(c)] - xi[static_cast<std::size_t>(c)];
                    scale.apply(buf, hi);
                    for (int c = 0; c < m; ++c)
                        dx[static_cast<std::size_t>((i - 1) * m + c)] += w * hi[static_cast<std::size_t>(c)];
                } else {
                    scale.apply(xi, hi);
                    scale.apply(xj, hj);
                    for (int c = 0; c < m; ++c)
                        dx[static_cast<std::size_t>((i - 1) * m + c)] +=
                            w * (hj[static_cast<std::size_t>(c)] - hi[static_cast<std::size_t>(c)]);
                }
            }
        };
        ms.modes.push_back(std::move(mode));
    }
    ms.validate();
    return ms;
}

/// Axis-angle kinematics matrix L_y = I + yhat/2 + c(||y||) yhat^2 with
/// c(r) = (1 - (r/2) cot(r/2)) / r^2, evaluated by series below r = 1e-4
/// (removable singularity at 0; L_0 = I).
inline std::array<double, 9> so3_kinematics_matrix(std::span<const double, 3> y) {
    const double r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
    const double r = std::sqrt(r2);
    double coeff;
    if (r < 1e-4) {
        coeff = 1.0 / 12.0 + r2 / 720.0;
    } else {
        coeff = (1.0 - 0.5 * r * std::cos(0.5 * r) / std::sin(0.5 * r)) / r2;
    }
    const double h0 = y[0], h1 = y[1], h2 = y[2];
    // yhat = [[0,-h2,h1],[h2,0,-h0],[-h1,h0,0]]
    std::array<double, 9> hat{0, -h2, h1, h2, 0, -h0, -h1, h0, 0};
    std::array<double, 9> hat2{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) hat2[static_cast<std::size_t>(3 * a + b)] += hat[static_cast<std::size_t>(3 * a + c)] * hat[static_cast<std::size_t>(3 * c + b)];
    std::array<double, 9> L{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const auto idx = static_cast<std::size_t>(3 * a + b);
            L[idx] = (a == b ? 1.0 : 0.0) + 0.5 * hat[idx] + coeff * hat2[idx];
        }
    return L;
}

/// SO(3) attitude synchronization in axis-angle coordinates:
/// xdot_i = L_{x_i} sum_{j in N_i} a_ij(s) (x_j - x_i), on (B_{r,3})^n, r < pi.
inline ModeSet make_so3_axis_angle(int n, const std::vector<Digraph>& graphs,
                                   const WeightProfile& weights, double r) {
    if (!(r > 0.0 && r < M_PI)) throw std::invalid_argument("make_so3_axis_angle: need 0 < r < pi");
    ModeSet ms;
    ms.n = n;
    ms.m = 3;
    ms.domain = Domain::ball(r);
    for (const auto& graph : graphs) {
        Mode mode;
        mode.graph = graph;
        mode.time_invariant = weights.is_constant();
        mode.field = [n, graph, weights](double s, const std::vector<double>& x,
                                         std::vector<double>& dx) {
            std::fill(dx.begin(), dx.end(), 0.0);
            std::vector<double> omega(3);
            for (int i = 1; i <= n; ++i) {
                std::fill(omega.begin(), omega.end(), 0.0);
                bool any = false;
                for (const auto& [j, k] : graph.edges) {
                    if (k != i || j == i) continue;
                    any = true;
                    const double w = weights.a(i, j, s);
                    for (int c = 0; c < 3; ++c)
                        omega[static_cast<std::size_t>(c)] += w * (x[static_cast<std::size_t>((j - 1) * 3 + c)] -
                                                                   x[static_cast<std::size_t>((i - 1) * 3 + c)]);
                }
                if (!any) continue;
                auto xi = std::span<const double, 3>(x.data() + (i - 1) * 3, 3);
                const auto L = so3_kinematics_matrix(xi);
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        dx[static_cast<std::size_t>((i - 1) * 3 + a)] += L[static_cast<std::size_t>(3 * a + b)] * omega[static_cast<std::size_t>(b)];
            }
        };
        ms.modes.push_back(std::move(mode));
    }
    ms.validate();
    return ms;
}

/// Epipole coupling term for a pair of fixed cameras at p_i, p_j with
/// rotations theta_i, theta_j: omega_ij = atan(e_ij/beta) - atan(e_ji/beta)
/// with e_ij = alpha tan(psi_ij), e_ji = alpha tan(psi_ij - theta_ij). The
/// tangent is branch-insensitive, so psi is taken from atan2.
inline double epipole_omega(const std::array<double, 2>& pi, const std::array<double, 2>& pj,
                            double theta_i, double theta_j, double alpha_cal, double beta) {
    const double dx = pj[0] - pi[0];
    const double dy = pj[1] - pi[1];
    const double c = std::cos(theta_i), s = std::sin(theta_i);
    const double rx = c * dx - s * dy;
    const double ry = s * dx + c * dy;
    const double psi = std::atan2(rx, ry);
    const double theta_ij = theta_j - theta_i;
    const double e_ij = alpha_cal * std::tan(psi);
    const double e_ji = alpha_cal * std::tan(psi - theta_ij);
    return std::atan(e_ij / beta) - std::atan(e_ji / beta);
}

/// Camera-network consensus on rotation angles (m = 1):
/// thetadot_i = sum_{j in N_i} a_ij(s) omega_ij, on D = [-theta_M, theta_M]^n.
inline ModeSet make_epipole_network(int n, const std::vector<std::array<double, 2>>& positions,
                                    const std::vector<Digraph>& graphs, const WeightProfile& weights,
                                    double theta_M, double alpha_cal = 1.0, double beta = 1.0) {
    if (static_cast<int>(positions.size()) != n)
        throw std::invalid_argument("make_epipole_network: positions size mismatch");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (positions[static_cast<std::size_t>(i)] == positions[static_cast<std::size_t>(j)])
                throw std::invalid_argument("make_epipole_network: coincident positions");
    if (!(theta_M > 0.0 && theta_M < M_PI / 2.0))
        throw std::invalid_argument("make_epipole_network: need 0 < theta_M < pi/2");
    ModeSet ms;
    ms.n = n;
    ms.m = 1;
    ms.domain = Domain::box({-theta_M}, {theta_M});
    for (const auto& graph : graphs) {
        Mode mode;
        mode.graph = graph;
        mode.time_invariant = weights.is_constant();
        mode.field = [positions, graph, weights, alpha_cal, beta](double s,
                                                                  const std::vector<double>& x,
                                                                  std::vector<double>& dx) {
            std::fill(dx.begin(), dx.end(), 0.0);
            for (const auto& [j, i] : graph.edges) {
                if (j == i) continue;
                const double om = epipole_omega(positions[static_cast<std::size_t>(i - 1)],
                                                positions[static_cast<std::size_t>(j - 1)],
                                                x[static_cast<std::size_t>(i - 1)],
                                                x[static_cast<std::size_t>(j - 1)], alpha_cal, beta);
                dx[static_cast<std::size_t>(i - 1)] += weights.a(i, j, s) * om;
            }
        };
        ms.modes.push_back(std::move(mode));
    }
    ms.validate();
    return ms;
}

/// Colinear camera positions at unit spacing along the (1,1)/sqrt(2)
/// direction, so that x_ijx/x_ijy = 1 at theta = 0 for every pair.
inline std::vector<std::array<double, 2>> colinear_diagonal_positions(int n) {
    std::vector<std::array<double, 2>> p;
    const double c = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i)
        p.push_back({static_cast<double>(i) * c, static_cast<double>(i) * c});
    return p;
}

enum class BlendKind { Linear, Cosine };

/// Replace each discontinuous switch by a blend interval of length tau_blend
/// during which the field is alpha(s) f_prev + (1 - alpha(s)) f_next with
/// alpha(0) = 1, alpha(tau_blend) = 0; the blend mode's graph is the edge
/// union of the two endpoint graphs. Only pairs adjacent in the signal are
/// materialized. Requires time-invariant input modes.
inline std::pair<ModeSet, SwitchingSignal> smooth_transitions(const ModeSet& ms,
                                                              const SwitchingSignal& signal,
                                                              double tau_blend, BlendKind blend) {
    ms.validate();
    for (const auto& mode : ms.modes)
        if (!mode.time_invariant)
            throw std::invalid_argument("smooth_transitions: modes must be time-invariant");
    if (!(tau_blend > 0.0 && tau_blend < signal.tau_d))
        throw std::invalid_argument("smooth_transitions: need 0 < tau_blend < tau_d");

    std::function<double(double)> alpha;
    if (blend == BlendKind::Linear)
        alpha = [tau_blend](double s) { return 1.0 - s / tau_blend; };
    else
        alpha = [tau_blend](double s) { return 0.5 + 0.5 * std::cos(s * M_PI / tau_blend); };

    ModeSet out = ms;
    std::map<std::pair<int, int>, int> blend_ids;
    auto blend_mode_id = [&](int prev, int next) {
        auto [it, inserted] = blend_ids.try_emplace({prev, next}, static_cast<int>(out.modes.size()) + 1);
        if (!inserted) return it->second;
        const auto& pm = ms.modes[static_cast<std::size_t>(prev) - 1];
        const auto& nm = ms.modes[static_cast<std::size_t>(next) - 1];
        std::set<std::pair<int, int>> edges = pm.graph.edges;
        edges.insert(nm.graph.edges.begin(), nm.graph.edges.end());
        Mode bm;
        bm.graph = Digraph(ms.n, std::move(edges));
        bm.time_invariant = false;
        bm.field = [fp = pm.field, fn = nm.field, alpha](double s, const std::vector<double>& x,
                                                         std::vector<double>& dx) {
            const double a = std::clamp(alpha(s), 0.0, 1.0);
            std::vector<double> d2(dx.size());
            fp(s, x, dx);
            fn(s, x, d2);
            for (std::size_t c = 0; c < dx.size(); ++c) dx[c] = a * dx[c] + (1.0 - a) * d2[c];
        };
        out.modes.push_back(std::move(bm));
        return it->second;
    };

    std::vector<double> times{signal.switch_times.front()};
    std::vector<int> modes{signal.mode_ids.front()};
    for (std::size_t k = 1; k < signal.interval_count(); ++k) {
        const int prev = signal.mode_ids[k - 1];
        const int next = signal.mode_ids[k];
        const double tau = signal.switch_times[k];
        if (prev != next) {
            times.push_back(tau);
            modes.push_back(blend_mode_id(prev, next));
            times.push_back(tau + tau_blend);
        } else {
            times.push_back(tau);
        }
        modes.push_back(next);
    }
    SwitchingSignal sig(signal.horizon_start, signal.horizon_end, std::move(times), std::move(modes),
                        std::min(tau_blend, signal.tau_d - tau_blend), signal.tau_u);
    return {std::move(out), std::move(sig)};
}

/// Single-state field on R^m (reset-clock time plus one m-vector).
using SingleAgentField = std::function<void(double, std::span<const double>, std::span<double>)>;

/// Embed a stabilization problem ydot = f'(t - gamma, y) as a two-agent
/// consensus system: ydot_1 = f'(s, y_1 - y_2), ydot_2 = 0, with
/// N_1 = {1,2}, N_2 = {2}. With y_2(t0) = 0, agent 1's trajectory is exactly
/// the original system's solution; pair consensus is stabilization of the
/// origin. Each field must vanish at the origin (checked by sampling s).
inline ModeSet stabilization_embed(const std::vector<SingleAgentField>& fields, int m,
                                   Domain agent_domain, double s_max = 1.0) {
    if (fields.empty() || m < 1) throw std::invalid_argument("stabilization_embed: empty input");
    std::vector<double> zero(static_cast<std::size_t>(m), 0.0), probe(static_cast<std::size_t>(m));
    for (const auto& f : fields)
        for (int q = 0; q <= 4; ++q) {
            f(s_max * static_cast<double>(q) / 4.0, zero, probe);
            for (double c : probe)
                if (std::abs(c) > 1e-12)
                    throw std::invalid_argument("stabilization_embed: field does not vanish at 0");
        }
    ModeSet ms;
    ms.n = 2;
    ms.m = m;
    ms.domain = std::move(agent_domain);
    const Digraph graph(2, {{2, 1}});  // N_1 = {1,2}, N_2 = {2}
    for (const auto& f : fields) {
        Mode mode;
        mode.graph = graph;
        mode.time_invariant = false;
        mode.field = [f, m](double s, const std::vector<double>& x, std::vector<double>& dx) {
            std::vector<double> diff(static_cast<std::size_t>(m));
            for (int c = 0; c < m; ++c)
                diff[static_cast<std::size_t>(c)] = x[static_cast<std::size_t>(c)] - x[static_cast<std::size_t>(m + c)];
            auto head = std::span<double>(dx.data(), static_cast<std::size_t>(m));
            f(s, diff, head);
            for (int c = 0; c < m; ++c) dx[static_cast<std::size_t>(m + c)] = 0.0;
        };
        ms.modes.push_back(std::move(mode));
    }
    ms.validate();
    return ms;
}

/// Expand a ModeSet alongside expand_timeshift on its signal:
/// new mode id k evaluates the original mode at reset clock s + offset_k.
inline ModeSet apply_timeshift(const ModeSet& ms, const std::vector<ShiftedMode>& table) {
    ModeSet out;
    out.n = ms.n;
    out.m = ms.m;
    out.domain = ms.domain;
    for (const auto& entry : table) {
        const auto& orig = ms.modes[static_cast<std::size_t>(entry.original_mode) - 1];
        Mode mode;
        mode.graph = orig.graph;
        mode.time_invariant = orig.time_invariant;
        mode.field = [f = orig.field, off = entry.offset](double s, const std::vector<double>& x,
                                                          std::vector<double>& dx) {
            f(s + off, x, dx);
        };
        out.modes.push_back(std::move(mode));
    }
    out.validate();
    return out;
}

}  // namespace switchcon

#endif  // SWITCHCON_SYSTEMS_HPP
