#pragma once

// Slow, obviously-correct reference implementations used by the unit and
// acceptance tests. Nothing here is shared with the library code paths.

#include "eyetap/harness.hpp"
#include "eyetap/signal.hpp"
#include "eyetap/techniques.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <vector>

namespace oracle {

using namespace eyetap;

/// Scans the binarized level sequence for maximal runs; levels must lie on a frame_ms grid.
inline std::vector<PulseEvent> pulses(const std::vector<LevelSample>& levels, const DetectorConfig& cfg) {
    std::vector<PulseEvent> out;
    const std::size_t n = levels.size();
    Millis quiet_until = std::numeric_limits<Millis>::min();
    std::size_t i = 0;
    while (i < n) {
        if (levels[i].t < quiet_until || levels[i].dbfs < cfg.threshold_dbfs) {
            ++i;
            continue;
        }
        std::size_t j = i;
        double peak = levels[i].dbfs;
        while (j + 1 < n && levels[j + 1].dbfs >= cfg.threshold_dbfs) {
            ++j;
            peak = std::max(peak, levels[j].dbfs);
        }
        const Millis onset = levels[i].t;
        const Millis offset = levels[j].t + cfg.frame_ms;
        if (offset - onset >= cfg.min_pulse_ms && offset - onset <= cfg.max_pulse_ms) {
            out.push_back({onset, offset, peak});
            quiet_until = offset + cfg.refractory_ms;
        }
        i = j + 1;
    }
    return out;
}

/// Indices of the samples at which dwell selections fire.
inline std::vector<std::size_t> dwell_fires(const std::vector<GazeSample>& s, const HitTest& hit, Millis threshold) {
    std::vector<std::size_t> out;
    auto target = [&](std::size_t k) { return s[k].valid ? hit(s[k].pos()) : std::nullopt; };
    std::size_t i = 0;
    while (i < s.size()) {
        const auto tgt = target(i);
        if (!tgt) {
            ++i;
            continue;
        }
        std::size_t j = i;
        bool fired = false;
        while (j < s.size() && target(j) == tgt) {
            if (s[j].t - s[i].t >= threshold) {
                out.push_back(j);
                fired = true;
                break;
            }
            ++j;
        }
        i = fired ? j + 1 : j;
    }
    return out;
}

/// Longest time span of a maximal run of consecutive samples on one target.
inline Millis max_residence(const std::vector<GazeSample>& s, const HitTest& hit) {
    Millis best = -1;
    auto target = [&](std::size_t k) { return s[k].valid ? hit(s[k].pos()) : std::nullopt; };
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto tgt = target(i);
        if (!tgt) continue;
        std::size_t j = i;
        while (j + 1 < s.size() && target(j + 1) == tgt) ++j;
        best = std::max(best, s[j].t - s[i].t);
    }
    return best;
}

/// Minimum over every monotone warp path, enumerated recursively.
inline double dtw_enumerate(const std::vector<double>& a, const std::vector<double>& b) {
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
        acc += std::fabs(a[i] - b[j]);
        if (i + 1 == a.size() && j + 1 == b.size()) {
            best = std::min(best, acc);
            return;
        }
        if (i + 1 < a.size()) walk(i + 1, j, acc);
        if (j + 1 < b.size()) walk(i, j + 1, acc);
        if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, acc);
    };
    walk(0, 0, 0.0);
    return best;
}

/// Plain memoized recursion over (i, j), for sequences too long to enumerate.
inline double dtw_memo(const std::vector<double>& a, const std::vector<double>& b) {
    std::map<std::pair<std::size_t, std::size_t>, double> memo;
    std::function<double(std::size_t, std::size_t)> best = [&](std::size_t i, std::size_t j) -> double {
        if (auto it = memo.find({i, j}); it != memo.end()) return it->second;
        double prev = 0.0;
        if (i > 0 || j > 0) {
            prev = std::numeric_limits<double>::infinity();
            if (i > 0) prev = std::min(prev, best(i - 1, j));
            if (j > 0) prev = std::min(prev, best(i, j - 1));
            if (i > 0 && j > 0) prev = std::min(prev, best(i - 1, j - 1));
        }
        return memo[{i, j}] = prev + std::fabs(a[i] - b[j]);
    };
    return best(a.size() - 1, b.size() - 1);
}

/// Cost of a given warp path, after checking it is a valid monotone path.
inline std::optional<double> path_cost_of(const std::vector<double>& a, const std::vector<double>& b,
                                          const std::vector<std::pair<std::size_t, std::size_t>>& path) {
    if (path.empty() || path.front() != std::pair<std::size_t, std::size_t>{0, 0} ||
        path.back() != std::pair<std::size_t, std::size_t>{a.size() - 1, b.size() - 1})
        return std::nullopt;
    double c = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (k > 0) {
            const auto di = path[k].first - path[k - 1].first;
            const auto dj = path[k].second - path[k - 1].second;
            if (di > 1 || dj > 1 || di + dj == 0) return std::nullopt;
        }
        c += std::fabs(a[path[k].first] - b[path[k].second]);
    }
    return c;
}

/// Insertion sort by (t, kind, stream, position in stream).
inline std::vector<MergedEvent> merge(const std::vector<std::vector<InputEvent>>& streams) {
    struct Keyed {
        MergedEvent e;
        std::size_t pos;
    };
    std::vector<Keyed> v;
    for (std::size_t s = 0; s < streams.size(); ++s)
        for (std::size_t i = 0; i < streams[s].size(); ++i) v.push_back({{streams[s][i], s}, i});
    auto less = [](const Keyed& x, const Keyed& y) {
        if (x.e.event.t != y.e.event.t) return x.e.event.t < y.e.event.t;
        if (x.e.event.kind != y.e.event.kind) return x.e.event.kind < y.e.event.kind;
        if (x.e.stream != y.e.stream) return x.e.stream < y.e.stream;
        return x.pos < y.pos;
    };
    for (std::size_t i = 1; i < v.size(); ++i)
        for (std::size_t j = i; j > 0 && less(v[j], v[j - 1]); --j) std::swap(v[j], v[j - 1]);
    std::vector<MergedEvent> out;
    for (auto& k : v) out.push_back(k.e);
    return out;
}

}  // namespace oracle
