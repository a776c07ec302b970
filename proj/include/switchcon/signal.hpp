#ifndef SWITCHCON_SIGNAL_HPP
#define SWITCHCON_SIGNAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace switchcon {

/// Deterministic uniform generator. Hand-rolled mappings so that generated
/// sequences are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform integer in {lo, ..., hi}.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

/// Piecewise-constant, right-continuous mode schedule on a finite horizon
/// with a lower dwell bound and an optional upper dwell bound.
struct SwitchingSignal {
    double horizon_start = 0.0;
    double horizon_end = 0.0;
    std::vector<double> switch_times;  // tau_0 <= horizon_start < tau_1 < ... <= horizon_end
    std::vector<int> mode_ids;         // mode_ids[k] active on [tau_k, tau_{k+1})
    double tau_d = 0.0;
    std::optional<double> tau_u;

    SwitchingSignal() = default;

    SwitchingSignal(double start, double end, std::vector<double> times, std::vector<int> modes,
                    double lower_dwell, std::optional<double> upper_dwell = std::nullopt)
        : horizon_start(start),
          horizon_end(end),
          switch_times(std::move(times)),
          mode_ids(std::move(modes)),
          tau_d(lower_dwell),
          tau_u(upper_dwell) {
        validate();
    }

    /// Number of intervals (= number of stored switch times).
    std::size_t interval_count() const { return switch_times.size(); }

    void validate() const {
        if (!(horizon_start < horizon_end))
            throw std::invalid_argument("SwitchingSignal: empty horizon");
        if (switch_times.empty() || switch_times.size() != mode_ids.size())
            throw std::invalid_argument("SwitchingSignal: switch_times/mode_ids size mismatch");
        if (!(tau_d > 0.0)) throw std::invalid_argument("SwitchingSignal: tau_d must be positive");
        if (tau_u && *tau_u < tau_d)
            throw std::invalid_argument("SwitchingSignal: tau_u < tau_d");
        if (switch_times.front() > horizon_start)
            throw std::invalid_argument("SwitchingSignal: tau_0 must be <= horizon_start");
        if (switch_times.back() > horizon_end)
            throw std::invalid_argument("SwitchingSignal: switch time beyond horizon");
        const double slack = 1e-9 * tau_d;
        for (std::size_t k = 0; k + 1 < switch_times.size(); ++k) {
            const double gap = switch_times[k + 1] - switch_times[k];
            if (!(gap > 0.0)) throw std::invalid_argument("SwitchingSignal: non-increasing switch times");
            if (gap < tau_d - slack)
                throw std::invalid_argument("SwitchingSignal: dwell below tau_d");
            if (tau_u && gap > *tau_u + slack)
                throw std::invalid_argument("SwitchingSignal: dwell above tau_u");
        }
        for (int id : mode_ids)
            if (id < 1) throw std::invalid_argument("SwitchingSignal: mode ids are 1-based");
    }

    /// Index k of the interval [tau_k, tau_{k+1}) containing t; the last
    /// interval is closed at horizon_end. Comparisons are exact.
    std::size_t interval_index(double t) const {
        if (t < horizon_start || t > horizon_end)
            throw std::out_of_range("SwitchingSignal: time outside horizon");
        auto it = std::upper_bound(switch_times.begin(), switch_times.end(), t);
        return static_cast<std::size_t>(it - switch_times.begin()) - 1;
    }
};

/// sigma(t): the mode active at t, right-continuous at each switch.
inline int mode_at(const SwitchingSignal& s, double t) { return s.mode_ids[s.interval_index(t)]; }

/// gamma_sigma(t): the largest switch time <= t. The reset clock is t - gamma.
inline double gamma(const SwitchingSignal& s, double t) { return s.switch_times[s.interval_index(t)]; }

/// Length of the interval containing index k (last interval runs to horizon_end).
inline double interval_length(const SwitchingSignal& s, std::size_t k) {
    const double hi = (k + 1 < s.switch_times.size()) ? s.switch_times[k + 1] : s.horizon_end;
    return hi - s.switch_times[k];
}

/// Impose an upper dwell bound on an unbounded signal over a time-invariant
/// mode family by splitting long intervals into equal pieces. Preserves
/// mode_at pointwise.
inline SwitchingSignal normalize_bounded(const SwitchingSignal& s, double tau_u_target) {
    if (s.tau_u) throw std::invalid_argument("normalize_bounded: signal already has an upper bound");
    if (tau_u_target < 2.0 * s.tau_d)
        throw std::invalid_argument("normalize_bounded: tau_u_target < 2*tau_d");
    std::vector<double> times;
    std::vector<int> modes;
    for (std::size_t k = 0; k < s.interval_count(); ++k) {
        const double a = s.switch_times[k];
        const double len = interval_length(s, k);
        if (len <= tau_u_target) {
            times.push_back(a);
            modes.push_back(s.mode_ids[k]);
            continue;
        }
        // smallest piece count giving equal lengths in [tau_d, tau_u_target)
        const auto pieces = static_cast<std::size_t>(std::floor(len / tau_u_target)) + 1;
        const double piece = len / static_cast<double>(pieces);
        for (std::size_t p = 0; p < pieces; ++p) {
            times.push_back(a + piece * static_cast<double>(p));
            modes.push_back(s.mode_ids[k]);
        }
    }
    return SwitchingSignal(s.horizon_start, s.horizon_end, std::move(times), std::move(modes),
                           s.tau_d, tau_u_target);
}

/// One entry of the time-shift relabel table: new mode id k (1-based index
/// into the table) stands for the original mode evaluated at reset clock
/// s + offset.
struct ShiftedMode {
    int original_mode;
    double offset;
};

struct TimeShiftExpansion {
    SwitchingSignal signal;          // tau_u = 2*tau_d
    std::vector<ShiftedMode> modes;  // new mode id -> (original mode, offset)
};

/// Rewrite a bounded signal so that tau_u = 2*tau_d, cutting each interval
/// into floor(len/tau_d)-1 pieces of length tau_d plus a final piece of
/// length in [tau_d, 2*tau_d), and relabeling each piece to a time-shifted
/// copy of its original mode. The composed right-hand side is unchanged:
/// the piece starting at offset j*tau_d sees reset clock s and evaluates
/// the original mode at s + j*tau_d.
inline TimeShiftExpansion expand_timeshift(const SwitchingSignal& s) {
    if (!s.tau_u) throw std::invalid_argument("expand_timeshift: signal must have tau_u");
    std::vector<double> times;
    std::vector<int> modes;
    std::vector<ShiftedMode> table;
    std::map<std::pair<int, long>, int> seen;  // (orig mode, offset step) -> new id
    auto shifted_id = [&](int orig, long step) {
        auto [it, inserted] = seen.try_emplace({orig, step}, static_cast<int>(table.size()) + 1);
        if (inserted) table.push_back({orig, static_cast<double>(step) * s.tau_d});
        return it->second;
    };
    for (std::size_t k = 0; k < s.interval_count(); ++k) {
        const double a = s.switch_times[k];
        const double len = interval_length(s, k);
        auto full = static_cast<long>(std::floor(len / s.tau_d)) - 1;
        if (full < 0) full = 0;
        for (long j = 0; j <= full; ++j) {
            times.push_back(a + static_cast<double>(j) * s.tau_d);
            modes.push_back(shifted_id(s.mode_ids[k], j));
        }
    }
    SwitchingSignal out(s.horizon_start, s.horizon_end, std::move(times), std::move(modes),
                        s.tau_d, 2.0 * s.tau_d);
    return {std::move(out), std::move(table)};
}

/// Seeded signal with dwells uniform in [tau_d, tau_u] and uniform mode draws.
inline SwitchingSignal random_signal(int mode_count, double tau_d, double tau_u,
                                     double horizon_start, double horizon_end, std::uint64_t seed) {
    if (!(tau_d > 0.0) || tau_u < tau_d)
        throw std::invalid_argument("random_signal: need 0 < tau_d <= tau_u");
    if (!(horizon_start < horizon_end)) throw std::invalid_argument("random_signal: empty horizon");
    if (mode_count < 1) throw std::invalid_argument("random_signal: mode_count < 1");
    Rng rng(seed);
    std::vector<double> times{horizon_start};
    std::vector<int> modes{rng.uniform_int(1, mode_count)};
    double t = horizon_start;
    while (true) {
        t += rng.uniform(tau_d, tau_u);
        if (t > horizon_end) break;
        times.push_back(t);
        modes.push_back(rng.uniform_int(1, mode_count));
    }
    return SwitchingSignal(horizon_start, horizon_end, std::move(times), std::move(modes),
                           tau_d, tau_u);
}

}  // namespace switchcon

#endif  // SWITCHCON_SIGNAL_HPP
