#ifndef SWITCHCON_GRAPH_HPP
#define SWITCHCON_GRAPH_HPP

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "switchcon/signal.hpp"

namespace switchcon {

/// Directed graph on agents {1..n}. An edge (j,i) means j is a neighbor of i:
/// information flows from j to i. Self-loops (i,i) are mandatory.
struct Digraph {
    int n = 0;
    std::set<std::pair<int, int>> edges;

    Digraph() = default;

    Digraph(int agents, std::set<std::pair<int, int>> e) : n(agents), edges(std::move(e)) {
        for (int i = 1; i <= n; ++i) edges.insert({i, i});
        for (const auto& [j, i] : edges)
            if (j < 1 || j > n || i < 1 || i > n)
                throw std::invalid_argument("Digraph: edge endpoint outside {1..n}");
    }

    static Digraph complete(int n) {
        std::set<std::pair<int, int>> e;
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) e.insert({j, i});
        return Digraph(n, std::move(e));
    }

    static Digraph self_loops_only(int n) { return Digraph(n, {}); }

    bool has_edge(int j, int i) const { return edges.count({j, i}) > 0; }
};

/// Neighbor set N_i = {j : (j,i) in E}; always contains i.
inline std::set<int> neighbors(const Digraph& g, int i) {
    if (i < 1 || i > g.n) throw std::out_of_range("neighbors: bad agent id");
    std::set<int> out;
    for (const auto& [j, k] : g.edges)
        if (k == i) out.insert(j);
    return out;
}

namespace detail {

/// Nodes reachable from src by directed paths (edge (j,i) steps j -> i).
inline std::vector<bool> reachable_from(const Digraph& g, int src) {
    std::vector<bool> seen(static_cast<std::size_t>(g.n) + 1, false);
    std::vector<int> stack{src};
    seen[static_cast<std::size_t>(src)] = true;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (const auto& [j, i] : g.edges)
            if (j == u && !seen[static_cast<std::size_t>(i)]) {
                seen[static_cast<std::size_t>(i)] = true;
                stack.push_back(i);
            }
    }
    return seen;
}

}  // namespace detail

/// True iff every node reaches every other node by a directed path.
inline bool is_strongly_connected(const Digraph& g) {
    for (int s = 1; s <= g.n; ++s) {
        auto seen = detail::reachable_from(g, s);
        for (int i = 1; i <= g.n; ++i)
            if (!seen[static_cast<std::size_t>(i)]) return false;
    }
    return true;
}

/// Smallest node from which all others are reachable (a center / root of a
/// spanning tree), or nullopt if none exists.
inline std::optional<int> is_quasi_strongly_connected(const Digraph& g) {
    for (int c = 1; c <= g.n; ++c) {
        auto seen = detail::reachable_from(g, c);
        bool all = true;
        for (int i = 1; i <= g.n && all; ++i) all = seen[static_cast<std::size_t>(i)];
        if (all) return c;
    }
    return std::nullopt;
}

/// A switching signal together with one digraph per mode.
struct GraphProcess {
    std::vector<Digraph> mode_graphs;  // index k-1 holds the graph of mode k
    SwitchingSignal signal;

    GraphProcess() = default;

    GraphProcess(std::vector<Digraph> graphs, SwitchingSignal sig)
        : mode_graphs(std::move(graphs)), signal(std::move(sig)) {
        if (mode_graphs.empty()) throw std::invalid_argument("GraphProcess: no mode graphs");
        const int n = mode_graphs.front().n;
        for (const auto& g : mode_graphs)
            if (g.n != n) throw std::invalid_argument("GraphProcess: inconsistent agent counts");
        for (int id : signal.mode_ids)
            if (id > static_cast<int>(mode_graphs.size()))
                throw std::invalid_argument("GraphProcess: signal references unknown mode");
    }

    int n() const { return mode_graphs.front().n; }

    const Digraph& graph_of_mode(int mode_id) const {
        return mode_graphs[static_cast<std::size_t>(mode_id) - 1];
    }
};

/// Union graph G([t1,t2)): edge union of all mode graphs active on [t1,t2).
inline Digraph union_graph(const GraphProcess& p, double t1, double t2) {
    if (!(t1 < t2)) throw std::invalid_argument("union_graph: empty or reversed interval");
    std::set<std::pair<int, int>> edges;
    std::size_t k = p.signal.interval_index(t1);
    while (k < p.signal.interval_count() && p.signal.switch_times[k] < t2) {
        const auto& g = p.graph_of_mode(p.signal.mode_ids[k]);
        edges.insert(g.edges.begin(), g.edges.end());
        ++k;
    }
    return Digraph(p.n(), std::move(edges));
}

enum class Connectivity { Strong, QuasiStrong };

inline bool passes_connectivity(const Digraph& g, Connectivity kind) {
    return kind == Connectivity::Strong ? is_strongly_connected(g)
                                        : is_quasi_strongly_connected(g).has_value();
}

struct ConnectivityVerdict {
    bool pass = false;
    std::optional<double> witness_start;  // first failing window start
    double checked_from = 0.0;
    double checked_to = 0.0;  // window starts examined in [checked_from, checked_to]
};

/// Check that G([t, t+window)) passes the connectivity test for every window
/// start in the horizon. The union over [t, t+window) is piecewise constant
/// in t between switch events, so checking starts at horizon_start and at
/// each switch time is exact. Windows extending past horizon_end are skipped.
inline ConnectivityVerdict verify_uniform_connectivity(const GraphProcess& p, double window,
                                                       Connectivity kind) {
    if (!(window > 0.0)) throw std::invalid_argument("verify_uniform_connectivity: window <= 0");
    ConnectivityVerdict v;
    v.checked_from = p.signal.horizon_start;
    v.checked_to = p.signal.horizon_end - window;
    v.pass = true;
    std::vector<double> starts{p.signal.horizon_start};
    for (double tau : p.signal.switch_times)
        if (tau > p.signal.horizon_start) starts.push_back(tau);
    for (double s : starts) {
        if (s + window > p.signal.horizon_end) break;  // truncated window: skipped
        if (!passes_connectivity(union_graph(p, s, s + window), kind)) {
            v.pass = false;
            v.witness_start = s;
            return v;
        }
    }
    return v;
}

/// Generated process plus the window it was certified with.
struct GeneratedProcess {
    GraphProcess process;
    double achieved_window;
};

/// Build a mode library and signal whose union graphs pass the requested
/// uniform connectivity at the given window. For Strong the library splits a
/// directed ring over n agents into groups cycled by the signal; for
/// QuasiStrong it splits a star rooted at agent 1 (whose union is never
/// strongly connected for n >= 3). Deterministic per seed.
inline GeneratedProcess random_uniformly_connected_signal(int n, double tau_d, double tau_u,
                                                          double window, double horizon_start,
                                                          double horizon_end, Connectivity kind,
                                                          std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("random_uniformly_connected_signal: n < 2");
    if (window < tau_u)
        throw std::invalid_argument("random_uniformly_connected_signal: window < tau_u");
    std::vector<std::pair<int, int>> cross;
    if (kind == Connectivity::Strong) {
        for (int i = 1; i <= n; ++i) cross.push_back({i, i % n + 1});  // directed ring
    } else {
        for (int j = 2; j <= n; ++j) cross.push_back({1, j});  // star rooted at 1
    }
    // Any window of length `window` contains g full consecutive dwells when
    // (g+1)*tau_u <= window, so g groups of ring/star edges suffice.
    int groups = static_cast<int>(std::floor(window / tau_u)) - 1;
    if (groups < 1) groups = 1;
    if (groups > static_cast<int>(cross.size())) groups = static_cast<int>(cross.size());
    std::vector<Digraph> mode_graphs;
    for (int g = 0; g < groups; ++g) {
        std::set<std::pair<int, int>> edges;
        for (std::size_t e = static_cast<std::size_t>(g); e < cross.size();
             e += static_cast<std::size_t>(groups))
            edges.insert(cross[e]);
        mode_graphs.push_back(Digraph(n, std::move(edges)));
    }
    Rng rng(seed);
    for (int attempt = 0; attempt < 20; ++attempt) {
        std::vector<double> times{horizon_start};
        std::vector<int> modes{1};
        double t = horizon_start;
        int next = 2;
        while (true) {
            t += rng.uniform(tau_d, tau_u);
            if (t > horizon_end) break;
            times.push_back(t);
            modes.push_back((next - 1) % groups + 1);
            ++next;
        }
        SwitchingSignal sig(horizon_start, horizon_end, std::move(times), std::move(modes),
                            tau_d, tau_u);
        GraphProcess p(mode_graphs, std::move(sig));
        if (verify_uniform_connectivity(p, window, kind).pass) return {std::move(p), window};
    }
    throw std::runtime_error("random_uniformly_connected_signal: generation failed");
}

}  // namespace switchcon

#endif  // SWITCHCON_GRAPH_HPP
