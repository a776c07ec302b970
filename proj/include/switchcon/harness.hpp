#ifndef SWITCHCON_HARNESS_HPP
#define SWITCHCON_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "switchcon/dynamics.hpp"
#include "switchcon/graph.hpp"
#include "switchcon/lyapunov.hpp"
#include "switchcon/signal.hpp"
#include "switchcon/systems.hpp"

namespace switchcon {

using json = nlohmann::json;

/// FNV-1a over the canonical config dump; identifies a run in manifests.
inline std::uint64_t config_hash(const json& cfg) {
    const std::string bytes = cfg.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct ExperimentConfig {
    json raw;

    static ExperimentConfig from_json(json j) {
        ExperimentConfig cfg;
        cfg.raw = std::move(j);
        cfg.validate();
        return cfg;
    }

    static ExperimentConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open " + path);
        json j;
        in >> j;
        return from_json(std::move(j));
    }

    void validate() const {
        if (!raw.contains("system") || !raw["system"].contains("name"))
            throw std::invalid_argument("config: missing system.name");
        if (!raw.contains("signal")) throw std::invalid_argument("config: missing signal");
        if (!raw.contains("seed")) throw std::invalid_argument("config: seed is mandatory");
        if (!raw.contains("step") || !(raw["step"].get<double>() > 0.0))
            throw std::invalid_argument("config: step must be positive");
        const double tol = raw.value("thresholds", json::object()).value("tol_consensus_rel", 1e-3);
        if (!(tol > 0.0)) throw std::invalid_argument("config: thresholds must be positive");
    }

    std::uint64_t seed() const { return raw["seed"].get<std::uint64_t>(); }
    double step() const { return raw["step"].get<double>(); }
    std::string system_name() const { return raw["system"]["name"].get<std::string>(); }
    double tol_consensus_rel() const {
        return raw.value("thresholds", json::object()).value("tol_consensus_rel", 1e-3);
    }
};

struct ExperimentSummary {
    bool consensus_reached = false;
    double dist_initial = 0.0;
    double dist_final = 0.0;
    double sustained_from = 0.0;  // start of the all-below-threshold suffix
    std::map<std::string, double> time_to_eta;
    std::string connectivity = "unchecked";
    std::string assumption_v = "unchecked";
    std::string assumption_w = "unchecked";
    std::string strict_decrease = "unchecked";
    std::optional<double> domain_exit;
    std::uint64_t seed = 0;
    std::uint64_t cfg_hash = 0;

    std::string to_text() const {
        std::ostringstream os;
        os << std::setprecision(17);
        os << "consensus_reached=" << (consensus_reached ? "true" : "false") << "\n";
        os << "dist_initial=" << dist_initial << "\n";
        os << "dist_final=" << dist_final << "\n";
        os << "sustained_from=" << sustained_from << "\n";
        for (const auto& [k, v] : time_to_eta) os << "time_to_" << k << "=" << v << "\n";
        os << "connectivity=" << connectivity << "\n";
        os << "assumption_v=" << assumption_v << "\n";
        os << "assumption_w=" << assumption_w << "\n";
        os << "strict_decrease=" << strict_decrease << "\n";
        os << "domain_exit=" << (domain_exit ? std::to_string(*domain_exit) : std::string("none")) << "\n";
        os << "seed=" << seed << "\n";
        os << "config_hash=" << cfg_hash << "\n";
        return os.str();
    }
};

struct ExperimentResult {
    SwitchedSystem system;
    Trajectory trajectory;
    MonitorReport monitor;
    ExperimentSummary summary;
    std::optional<double> certified_window;
};

namespace detail {

inline std::vector<Digraph> parse_graphs(const json& jgraphs, int n) {
    std::vector<Digraph> out;
    for (const auto& adj : jgraphs) {
        std::set<std::pair<int, int>> edges;
        for (const auto& e : adj) edges.insert({e[0].get<int>(), e[1].get<int>()});
        out.push_back(Digraph(n, std::move(edges)));
    }
    return out;
}

struct BuiltSignal {
    SwitchingSignal signal;
    std::optional<std::vector<Digraph>> generated_graphs;
    std::optional<double> certified_window;
    std::optional<Connectivity> kind;
};

inline BuiltSignal build_signal(const json& jsig, int n, std::uint64_t seed) {
    const auto horizon = jsig["horizon"];
    const double t0 = horizon[0].get<double>(), t1 = horizon[1].get<double>();
    if (jsig.contains("explicit")) {
        const auto& e = jsig["explicit"];
        std::optional<double> tau_u;
        if (e.contains("tau_u") && !e["tau_u"].is_null()) tau_u = e["tau_u"].get<double>();
        return {SwitchingSignal(t0, t1, e["switch_times"].get<std::vector<double>>(),
                                e["mode_ids"].get<std::vector<int>>(), e["tau_d"].get<double>(), tau_u),
                std::nullopt, std::nullopt, std::nullopt};
    }
    const auto& g = jsig["generator"];
    const std::string kind = g["kind"].get<std::string>();
    const double tau_d = g["tau_d"].get<double>();
    const double tau_u = g["tau_u"].get<double>();
    if (kind == "random") {
        return {random_signal(g["mode_count"].get<int>(), tau_d, tau_u, t0, t1, seed),
                std::nullopt, std::nullopt, std::nullopt};
    }
    const Connectivity conn = (kind == "strong") ? Connectivity::Strong : Connectivity::QuasiStrong;
    auto gen = random_uniformly_connected_signal(n, tau_d, tau_u, g["window"].get<double>(), t0, t1,
                                                 conn, seed);
    return {gen.process.signal, gen.process.mode_graphs, gen.achieved_window, conn};
}

inline std::vector<double> build_init(const json& jinit, const ModeSet& ms, std::uint64_t seed) {
    const std::string kind = jinit.value("kind", "random_ball");
    if (kind == "explicit") return jinit["x"].get<std::vector<double>>();
    Rng rng(seed ^ 0xabcdef1234567890ULL);
    if (kind == "random_ball") {
        Domain ball = Domain::ball(jinit["radius"].get<double>());
        return ball.sample(ms.n, ms.m, rng);
    }
    if (kind == "random_domain") return ms.domain.sample(ms.n, ms.m, rng);
    if (kind == "split_groups") {
        // group g of agents gets the common value values[g]
        const auto sizes = jinit["sizes"].get<std::vector<int>>();
        const auto values = jinit["values"].get<std::vector<std::vector<double>>>();
        std::vector<double> x;
        for (std::size_t g = 0; g < sizes.size(); ++g)
            for (int r = 0; r < sizes[g]; ++r)
                x.insert(x.end(), values[g].begin(), values[g].end());
        if (x.size() != ms.dim()) throw std::invalid_argument("init: split_groups dimension mismatch");
        return x;
    }
    throw std::invalid_argument("init: unknown kind " + kind);
}

}  // namespace detail

/// Build the configured ModeSet. Generated graphs (from a connectivity
/// generator) take precedence; otherwise system.graphs must list adjacency
/// pairs per mode.
inline ModeSet build_system(const json& jsys, const std::optional<std::vector<Digraph>>& generated) {
    const std::string name = jsys["name"].get<std::string>();
    const int n = jsys.value("n", 2);
    std::vector<Digraph> graphs;
    if (generated)
        graphs = *generated;
    else if (jsys.contains("graphs"))
        graphs = detail::parse_graphs(jsys["graphs"], n);

    const double weight = jsys.value("weight", 1.0);
    WeightProfile weights = WeightProfile::constant(weight);

    if (name == "linear") {
        const int m = jsys.value("m", 1);
        return make_linear_consensus(n, m, graphs, weights,
                                     Domain::ball(jsys.value("domain_radius", 1e6)));
    }
    if (name == "scaled") {
        const int m = jsys.value("m", 1);
        const auto variant = jsys.value("variant", "scale-states") == std::string("scale-differences")
                                 ? ScaleVariant::ScaleDifferences
                                 : ScaleVariant::ScaleStates;
        ScaleMap scale = ScaleMap::power(jsys.value("exponent", 2.0), jsys.value("eta", 1.0));
        return make_scaled_consensus(n, m, graphs, weights, scale, variant);
    }
    if (name == "so3") return make_so3_axis_angle(n, graphs, weights, jsys.value("radius", 0.9 * M_PI));
    if (name == "epipole") {
        return make_epipole_network(n, colinear_diagonal_positions(n), graphs, weights,
                                    jsys.value("theta_M", 0.1), jsys.value("alpha_cal", 1.0),
                                    jsys.value("beta", 1.0));
    }
    if (name == "stabilization") {
        const int m = jsys.value("m", 1);
        SingleAgentField f = [](double, std::span<const double> y, std::span<double> dy) {
            for (std::size_t c = 0; c < y.size(); ++c) dy[c] = -y[c];
        };
        return stabilization_embed({f}, m, Domain::ball(jsys.value("domain_radius", 1.0)));
    }
    throw std::invalid_argument("build_system: unknown system " + name);
}

/// Run one configured experiment: build, certify connectivity, integrate,
/// monitor, summarize. Fully deterministic per (config, seed).
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const json& raw = cfg.raw;
    const auto& jsys = raw["system"];
    const int n = jsys.value("n", 2);

    auto built = detail::build_signal(raw["signal"], n, cfg.seed());
    ModeSet ms = build_system(jsys, built.generated_graphs);
    SwitchedSystem sys(ms, built.signal);

    auto x0 = detail::build_init(raw.value("init", json{{"kind", "random_domain"}}), sys.mode_set,
                                 cfg.seed());
    const double t0 = sys.signal.horizon_start, t1 = sys.signal.horizon_end;
    Trajectory traj = integrate(sys, x0, t0, t1, cfg.step());

    const auto& certs = raw.value("certificates", json::object());
    std::optional<ScalarCertificate> v_cert;
    std::optional<PairCertificate> w_cert;
    if (certs.value("v", "") == std::string("norm_sq")) v_cert = ScalarCertificate::norm_squared();
    if (certs.value("w", "") == std::string("diff_norm_sq"))
        w_cert = PairCertificate::diff_norm_squared();

    ExperimentResult result{std::move(sys), std::move(traj), {}, {}, built.certified_window};
    const auto& rsys = result.system;
    const auto& rtraj = result.trajectory;

    if (v_cert && raw.value("check_assumptions", true))
        result.monitor = check_assumption_v(*v_cert, rsys, rtraj);
    else if (w_cert && raw.value("check_assumptions", true))
        result.monitor = check_assumption_w(*w_cert, rsys, rtraj);
    else
        result.monitor = monitor_trajectory(rsys, rtraj, v_cert ? &*v_cert : nullptr,
                                            w_cert ? &*w_cert : nullptr);
    if (v_cert && w_cert && raw.value("check_assumptions", true)) {
        auto wrep = check_assumption_w(*w_cert, rsys, rtraj);
        for (std::size_t s = 0; s < result.monitor.samples.size(); ++s) {
            result.monitor.samples[s].max_w = wrep.samples[s].max_w;
            result.monitor.samples[s].dini_w = wrep.samples[s].dini_w;
            result.monitor.samples[s].argmax_w = wrep.samples[s].argmax_w;
        }
        result.monitor.has_w = true;
        for (auto& e : wrep.violations) result.monitor.violations.push_back(std::move(e));
        for (auto& e : wrep.warnings) result.monitor.warnings.push_back(std::move(e));
        result.summary.assumption_w = wrep.violations.empty() ? "pass" : "fail";
    }

    auto& sum = result.summary;
    sum.seed = cfg.seed();
    sum.cfg_hash = config_hash(raw);
    sum.domain_exit = rtraj.domain_exit;
    if (v_cert && raw.value("check_assumptions", true))
        sum.assumption_v = result.monitor.ok() ? "pass" : "fail";
    if (w_cert && !v_cert && raw.value("check_assumptions", true))
        sum.assumption_w = result.monitor.ok() ? "pass" : "fail";

    // consensus verdict: relative sustained threshold
    const auto& rows = result.monitor.samples;
    sum.dist_initial = rows.front().dist;
    sum.dist_final = rows.back().dist;
    const double thr = cfg.tol_consensus_rel() * std::max(sum.dist_initial, 1e-300);
    std::size_t suffix = rows.size();
    while (suffix > 0 && rows[suffix - 1].dist < thr) --suffix;
    sum.consensus_reached = (sum.dist_initial == 0.0) || (suffix < rows.size());
    sum.sustained_from = (suffix < rows.size()) ? rows[suffix].t : t1;
    for (double eta : {1e-1, 1e-2, 1e-3}) {
        const double lvl = eta * std::max(sum.dist_initial, 1e-300);
        double hit = std::numeric_limits<double>::infinity();
        for (const auto& r : rows)
            if (r.dist < lvl) {
                hit = r.t;
                break;
            }
        std::ostringstream key;
        key << "eta_" << eta;
        sum.time_to_eta[key.str()] = hit;
    }

    // connectivity verdict over the actually-used graph process
    if (built.kind) {
        auto verdict = verify_uniform_connectivity(rsys.graph_process(), *built.certified_window,
                                                   *built.kind);
        sum.connectivity = verdict.pass ? "pass" : "fail";
    } else if (raw["signal"].contains("verify_window")) {
        const auto kind = raw["signal"].value("verify_kind", "strong") == std::string("strong")
                              ? Connectivity::Strong
                              : Connectivity::QuasiStrong;
        auto verdict = verify_uniform_connectivity(rsys.graph_process(),
                                                   raw["signal"]["verify_window"].get<double>(), kind);
        sum.connectivity = verdict.pass ? "pass" : "fail";
    }

    // strict-decrease window monitor, T = n (T_window + 2 tau_D)
    if (v_cert && built.certified_window) {
        const double T = static_cast<double>(rsys.mode_set.n) *
                         (*built.certified_window + 2.0 * rsys.signal.tau_d);
        auto verdict = strict_decrease_window(result.monitor, rsys, T);
        switch (verdict.kind) {
            case WindowVerdictKind::Pass: sum.strict_decrease = "pass"; break;
            case WindowVerdictKind::Fail: sum.strict_decrease = "fail"; break;
            case WindowVerdictKind::Vacuous: sum.strict_decrease = "vacuous"; break;
            case WindowVerdictKind::InsufficientHorizon:
                sum.strict_decrease = "insufficient_horizon";
                break;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// persistence

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::filesystem::create_directories(p.parent_path().empty() ? "." : p.parent_path());
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot open output file " + p.string());
    out << std::setprecision(17);
    return out;
}

}  // namespace detail

/// Per-sample trajectory CSV: t, mode_id, is_switch, then mn state columns.
inline void write_trajectory_csv(const ExperimentResult& r, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    const auto& ms = r.system.mode_set;
    out << "t,mode_id,is_switch";
    for (int i = 1; i <= ms.n; ++i)
        for (int c = 0; c < ms.m; ++c) out << ",x" << i << "_" << c;
    out << "\n";
    std::set<std::size_t> marks(r.trajectory.switch_marks.begin(), r.trajectory.switch_marks.end());
    for (std::size_t s = 0; s < r.trajectory.size(); ++s) {
        out << r.trajectory.times[s] << "," << r.trajectory.mode_ids[s] << "," << (marks.count(s) ? 1 : 0);
        for (double c : r.trajectory.states[s]) out << "," << c;
        out << "\n";
    }
}

/// Line-delimited structured-text trajectory (one JSON record per sample).
inline void write_trajectory_jsonl(const ExperimentResult& r, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    std::set<std::size_t> marks(r.trajectory.switch_marks.begin(), r.trajectory.switch_marks.end());
    for (std::size_t s = 0; s < r.trajectory.size(); ++s) {
        json rec{{"t", r.trajectory.times[s]},
                 {"mode_id", r.trajectory.mode_ids[s]},
                 {"is_switch", marks.count(s) > 0},
                 {"x", r.trajectory.states[s]}};
        out << rec.dump() << "\n";
    }
}

/// Monitor CSV: t, max_v, max_w, dist_to_A, dini_v, argmax ids.
inline void write_monitor_csv(const ExperimentResult& r, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "t,max_v,max_w,dist_to_A,dini_v,argmax_v\n";
    for (const auto& row : r.monitor.samples) {
        out << row.t << "," << row.max_v << "," << row.max_w << "," << row.dist << "," << row.dini_v << ",";
        for (std::size_t i = 0; i < row.argmax_v.size(); ++i)
            out << (i ? ";" : "") << row.argmax_v[i];
        out << "\n";
    }
}

inline void write_violations(const ExperimentResult& r, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    for (const auto& e : r.monitor.violations)
        out << "violation," << e.t << "," << e.kind << "," << e.witness << "\n";
    for (const auto& e : r.monitor.warnings)
        out << "warning," << e.t << "," << e.kind << "," << e.witness << "\n";
}

/// Plot-ready series: t, dist_to_A, max_v, max_w, mode_id plus the state
/// block (5 + mn columns), and a run manifest with config hash and seed.
inline void emit_plotdata(const ExperimentResult& r, const ExperimentConfig& cfg,
                          const std::filesystem::path& out_dir) {
    const auto& ms = r.system.mode_set;
    auto out = detail::open_out(out_dir / "plotdata.csv");
    out << "t,dist_to_A,max_v,max_w,mode_id";
    for (int i = 1; i <= ms.n; ++i)
        for (int c = 0; c < ms.m; ++c) out << ",x" << i << "_" << c;
    out << "\n";
    for (std::size_t s = 0; s < r.monitor.samples.size(); ++s) {
        const auto& row = r.monitor.samples[s];
        out << row.t << "," << row.dist << "," << row.max_v << "," << row.max_w << "," << row.mode_id;
        for (double c : r.trajectory.states[s]) out << "," << c;
        out << "\n";
    }
    json manifest{{"config_hash", r.summary.cfg_hash},
                  {"seed", r.summary.seed},
                  {"config", cfg.raw},
                  {"samples", r.monitor.samples.size()}};
    auto mf = detail::open_out(out_dir / "manifest.json");
    mf << manifest.dump(2) << "\n";
}

inline void write_all_outputs(const ExperimentResult& r, const ExperimentConfig& cfg,
                              const std::filesystem::path& out_dir) {
    write_trajectory_csv(r, out_dir / "trajectory.csv");
    write_trajectory_jsonl(r, out_dir / "trajectory.jsonl");
    write_monitor_csv(r, out_dir / "monitor.csv");
    write_violations(r, out_dir / "violations.csv");
    emit_plotdata(r, cfg, out_dir);
    auto sf = detail::open_out(out_dir / "summary.txt");
    sf << r.summary.to_text();
}

// ---------------------------------------------------------------------------
// sweeps

struct SweepCell {
    json axis_value;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    ExperimentSummary summary;
};

struct SweepTable {
    std::string axis;
    std::vector<SweepCell> cells;
};

namespace detail {

inline json* resolve_path(json& root, const std::string& dotted) {
    json* cur = &root;
    std::istringstream is(dotted);
    std::string part;
    while (std::getline(is, part, '.')) cur = &((*cur)[part]);
    return cur;
}

}  // namespace detail

/// Cross-product runs over axis values x seeds; per-cell failures are
/// recorded and the sweep continues.
inline SweepTable sweep(const ExperimentConfig& base, const std::string& axis,
                        const std::vector<json>& values, const std::vector<std::uint64_t>& seeds) {
    SweepTable table;
    table.axis = axis;
    for (const auto& value : values)
        for (std::uint64_t seed : seeds) {
            SweepCell cell;
            cell.axis_value = value;
            cell.seed = seed;
            try {
                json j = base.raw;
                *detail::resolve_path(j, axis) = value;
                j["seed"] = seed;
                cell.summary = run_experiment(ExperimentConfig::from_json(std::move(j))).summary;
            } catch (const std::exception& ex) {
                cell.failed = true;
                cell.error = ex.what();
            }
            table.cells.push_back(std::move(cell));
        }
    return table;
}

inline void write_sweep_csv(const SweepTable& t, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "axis_value,seed,failed,consensus_reached,dist_final,time_to_eta_0.001\n";
    for (const auto& c : t.cells) {
        out << c.axis_value.dump() << "," << c.seed << "," << (c.failed ? 1 : 0) << ","
            << (c.summary.consensus_reached ? 1 : 0) << "," << c.summary.dist_final << ",";
        auto it = c.summary.time_to_eta.find("eta_0.001");
        out << (it != c.summary.time_to_eta.end() ? it->second : std::numeric_limits<double>::quiet_NaN());
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// presets: self-testing fixtures with declared verdicts

inline const std::map<std::string, json>& presets() {
    static const std::map<std::string, json> table = [] {
        std::map<std::string, json> p;
        p["theorem2"] = json{
            {"name", "theorem2"},
            {"system", {{"name", "linear"}, {"n", 7}, {"m", 2}}},
            {"signal",
             {{"generator", {{"kind", "strong"}, {"tau_d", 0.1}, {"tau_u", 0.2}, {"window", 1.0}}},
              {"horizon", {0.0, 100.0}}}},
            {"init", {{"kind", "random_ball"}, {"radius", 1.0}}},
            {"step", 1e-3},
            {"seed", 1},
            {"certificates", {{"v", "norm_sq"}}},
            {"declared", {{"consensus", true}, {"connectivity", "pass"}, {"assumption_v", "pass"}}}};
        p["theorem3-quasi"] = json{
            {"name", "theorem3-quasi"},
            {"system", {{"name", "linear"}, {"n", 5}, {"m", 2}}},
            {"signal",
             {{"generator", {{"kind", "quasi"}, {"tau_d", 0.1}, {"tau_u", 0.2}, {"window", 1.0}}},
              {"horizon", {0.0, 40.0}}}},
            {"init", {{"kind", "random_ball"}, {"radius", 1.0}}},
            {"step", 1e-3},
            {"seed", 2},
            {"certificates", {{"w", "diff_norm_sq"}}},
            {"declared", {{"consensus", true}, {"connectivity", "pass"}, {"assumption_w", "pass"}}}};
        // two groups with no cross edges ever: consensus never happens
        p["split-graph"] = json{
            {"name", "split-graph"},
            {"system",
             {{"name", "linear"},
              {"n", 4},
              {"m", 1},
              {"graphs",
               {{{1, 2}, {2, 1}, {3, 4}, {4, 3}}, {{1, 2}, {3, 4}}}}}},
            {"signal",
             {{"generator", {{"kind", "random"}, {"mode_count", 2}, {"tau_d", 0.1}, {"tau_u", 0.2}}},
              {"horizon", {0.0, 20.0}}}},
            {"init", {{"kind", "split_groups"}, {"sizes", {2, 2}}, {"values", {{1.0}, {-1.0}}}}},
            {"step", 1e-3},
            {"seed", 3},
            {"certificates", {{"v", "norm_sq"}}},
            {"declared", {{"consensus", false}}}};
        p["so3"] = json{
            {"name", "so3"},
            {"system", {{"name", "so3"}, {"n", 5}, {"radius", 2.827433388230814}}},  // 0.9*pi
            {"signal",
             {{"generator", {{"kind", "strong"}, {"tau_d", 0.1}, {"tau_u", 0.2}, {"window", 1.0}}},
              {"horizon", {0.0, 200.0}}}},
            {"init", {{"kind", "random_domain"}}},
            {"step", 1e-3},
            {"seed", 4},
            {"certificates", {{"v", "norm_sq"}}},
            {"declared", {{"consensus", true}, {"assumption_v", "pass"}}}};
        p["epipole"] = json{
            {"name", "epipole"},
            {"system", {{"name", "epipole"}, {"n", 4}, {"theta_M", 0.1}}},
            {"signal",
             {{"generator", {{"kind", "quasi"}, {"tau_d", 0.1}, {"tau_u", 0.2}, {"window", 1.0}}},
              {"horizon", {0.0, 40.0}}}},
            {"init", {{"kind", "random_domain"}}},
            {"step", 1e-3},
            {"seed", 5},
            {"certificates", {{"w", "diff_norm_sq"}}},
            {"declared", {{"consensus", true}, {"assumption_w", "pass"}}}};
        p["scaled"] = json{
            {"name", "scaled"},
            {"system",
             {{"name", "scaled"}, {"n", 4}, {"m", 2}, {"variant", "scale-states"}, {"eta", 1.0}}},
            {"signal",
             {{"generator", {{"kind", "strong"}, {"tau_d", 0.1}, {"tau_u", 0.2}, {"window", 1.0}}},
              {"horizon", {0.0, 160.0}}}},
            {"init", {{"kind", "random_ball"}, {"radius", 0.5}}},
            {"step", 1e-3},
            {"seed", 6},
            {"certificates", {{"v", "norm_sq"}}},
            {"declared", {{"consensus", true}, {"assumption_v", "pass"}}}};
        p["stabilization"] = json{
            {"name", "stabilization"},
            {"system", {{"name", "stabilization"}, {"n", 2}, {"m", 1}, {"domain_radius", 1.0}}},
            {"signal",
             {{"generator", {{"kind", "random"}, {"mode_count", 1}, {"tau_d", 0.5}, {"tau_u", 1.0}}},
              {"horizon", {0.0, 20.0}}}},
            {"init", {{"kind", "explicit"}, {"x", {0.8, 0.0}}}},
            {"step", 1e-3},
            {"seed", 7},
            {"certificates", {{"w", "diff_norm_sq"}}},
            {"declared", {{"consensus", true}}}};
        return p;
    }();
    return table;
}

/// Compare a result against the preset's declared verdicts. Returns the
/// mismatching keys (empty = as declared).
inline std::vector<std::string> check_declared(const ExperimentConfig& cfg,
                                               const ExperimentSummary& sum) {
    std::vector<std::string> mismatches;
    if (!cfg.raw.contains("declared")) return mismatches;
    const auto& d = cfg.raw["declared"];
    if (d.contains("consensus") && d["consensus"].get<bool>() != sum.consensus_reached)
        mismatches.push_back("consensus");
    auto check_str = [&](const char* key, const std::string& actual) {
        if (d.contains(key) && d[key].get<std::string>() != actual) mismatches.push_back(key);
    };
    check_str("connectivity", sum.connectivity);
    check_str("assumption_v", sum.assumption_v);
    check_str("assumption_w", sum.assumption_w);
    check_str("strict_decrease", sum.strict_decrease);
    return mismatches;
}

}  // namespace switchcon

#endif  // SWITCHCON_HARNESS_HPP
