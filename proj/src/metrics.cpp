#include "eyetap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

namespace eyetap {

DtwResult dtw(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InvalidInput("dtw: empty sequence");
    const std::size_t n = a.size(), m = b.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    // Rolling cost rows plus one byte per cell for backtracking: 0 diag, 1 up (i-1), 2 left (j-1).
    std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
    std::vector<std::uint8_t> step(n * m);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = inf;
        for (std::size_t j = 1; j <= m; ++j) {
            const double c = std::abs(a[i - 1] - b[j - 1]);
            double best = prev[j - 1];
            std::uint8_t dir = 0;
            if (prev[j] < best) {
                best = prev[j];
                dir = 1;
            }
            if (cur[j - 1] < best) {
                best = cur[j - 1];
                dir = 2;
            }
            cur[j] = c + best;
            step[(i - 1) * m + (j - 1)] = dir;
        }
        std::swap(prev, cur);
    }

    DtwResult out;
    out.cost = prev[m];
    std::size_t i = n - 1, j = m - 1;
    out.path.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            switch (step[i * m + j]) {
                case 0: --i; --j; break;
                case 1: --i; break;
                default: --j; break;
            }
        }
        out.path.emplace_back(i, j);
    }
    std::reverse(out.path.begin(), out.path.end());
    return out;
}

std::vector<Point> resample_polyline(std::span<const Point> waypoints, std::size_t count) {
    if (waypoints.empty() || count == 0) return {};
    std::vector<double> cum{0.0};
    for (std::size_t i = 1; i < waypoints.size(); ++i) cum.push_back(cum.back() + distance(waypoints[i - 1], waypoints[i]));
    const double total = cum.back();
    std::vector<Point> out;
    out.reserve(count);
    std::size_t seg = 1;
    for (std::size_t k = 0; k < count; ++k) {
        if (count == 1 || total == 0.0) {
            out.push_back(waypoints.front());
            continue;
        }
        const double s = total * static_cast<double>(k) / static_cast<double>(count - 1);
        while (seg + 1 < cum.size() && cum[seg] < s) ++seg;
        const double len = cum[seg] - cum[seg - 1];
        const double u = len > 0.0 ? (s - cum[seg - 1]) / len : 0.0;
        out.push_back(waypoints[seg - 1] + (waypoints[seg] - waypoints[seg - 1]) * std::clamp(u, 0.0, 1.0));
    }
    return out;
}

PathCostResult path_cost(std::span<const GazeSample> pointer_path, std::span<const Point> targets_in_order,
                         double rate_hz) {
    if (pointer_path.empty()) throw InvalidInput("path_cost: empty pointer path");
    if (targets_in_order.size() < 2) throw InvalidInput("path_cost: need at least two targets");
    if (!(rate_hz > 0.0)) throw InvalidInput("path_cost: rate must be positive");

    const double span_ms = static_cast<double>(pointer_path.back().t - pointer_path.front().t);
    const auto count = static_cast<std::size_t>(std::floor(span_ms * rate_hz / 1000.0)) + 1;
    const auto ideal = resample_polyline(targets_in_order, std::max<std::size_t>(count, 2));

    std::vector<double> px, py, ix, iy;
    for (const auto& s : pointer_path) {
        px.push_back(s.x);
        py.push_back(s.y);
    }
    for (const auto& p : ideal) {
        ix.push_back(p.x);
        iy.push_back(p.y);
    }
    const auto dx = dtw(px, ix);
    const auto dy = dtw(py, iy);
    PathCostResult r;
    r.dtw_x = dx.cost;
    r.dtw_y = dy.cost;
    r.path_len_x = dx.path.size();
    r.path_len_y = dy.path.size();
    r.combined = (r.dtw_x / static_cast<double>(r.path_len_x) + r.dtw_y / static_cast<double>(r.path_len_y)) / 2.0;
    return r;
}

std::string_view to_string(TpVariant v) { return v == TpVariant::univariate ? "univariate" : "bivariate"; }

double nominal_id(double distance, double width) { return std::log2(distance / width + 1.0); }

namespace {

Point task_axis(const TrialOutcome& t) {
    const Point d = t.target - t.start;
    const double len = norm(d);
    return len > 0.0 ? d * (1.0 / len) : Point{1.0, 0.0};
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

double sd_univariate(std::span<const TrialOutcome> trials) {
    std::vector<double> dev;
    for (const auto& t : trials) dev.push_back(dot(t.endpoint - t.target, task_axis(t)));
    return sample_sd(dev);
}

double sd_bivariate(std::span<const Point> endpoints) {
    if (endpoints.size() < 2) return 0.0;
    Point mean;
    for (const auto& p : endpoints) mean = mean + p;
    mean = mean * (1.0 / static_cast<double>(endpoints.size()));
    double ss = 0.0;
    for (const auto& p : endpoints) {
        const Point d = p - mean;
        ss += d.x * d.x + d.y * d.y;
    }
    return std::sqrt(ss / static_cast<double>(endpoints.size() - 1));
}

ThroughputResult throughput(std::span<const TrialOutcome> trials, TpVariant variant) {
    std::map<std::pair<double, double>, std::vector<TrialOutcome>> groups;
    for (const auto& t : trials) groups[{t.distance, t.width}].push_back(t);

    ThroughputResult r;
    r.variant = variant;
    double tp_sum = 0.0;
    int used = 0;
    for (const auto& [key, group] : groups) {
        ConditionThroughput c;
        c.distance = key.first;
        c.width = key.second;
        c.n = static_cast<int>(group.size());
        double de = 0.0, mt = 0.0;
        std::vector<Point> ends;
        for (const auto& t : group) {
            de += variant == TpVariant::univariate ? dot(t.endpoint - t.from, task_axis(t)) : distance(t.endpoint, t.from);
            mt += static_cast<double>(t.movement_time);
            // Deviations pool trials aimed at different targets of one condition.
            ends.push_back(t.endpoint - t.target);
        }
        c.de = de / c.n;
        c.mt_ms = mt / c.n;
        c.sd = variant == TpVariant::univariate ? sd_univariate(group) : sd_bivariate(ends);
        if (c.n < 2 || !(c.sd > 0.0) || !(c.mt_ms > 0.0)) {
            c.excluded = true;
        } else {
            c.we = kEffectiveWidthFactor * c.sd;
            c.ide = std::log2(std::max(c.de, 0.0) / c.we + 1.0);
            c.tp = c.ide / (c.mt_ms / 1000.0);
            tp_sum += c.tp;
            ++used;
        }
        r.per_condition.push_back(c);
    }
    r.mean_tp = used > 0 ? tp_sum / used : 0.0;
    return r;
}

double error_rate(std::span<const TrialOutcome> trials) {
    if (trials.empty()) throw InvalidInput("error_rate: no trials");
    std::size_t misses = 0;
    for (const auto& t : trials) misses += t.hit ? 0 : 1;
    return static_cast<double>(misses) / static_cast<double>(trials.size());
}

Heatmap error_heatmap(std::span<const Point> error_locations, int cols, int rows, const ScreenSpec& screen) {
    if (cols <= 0 || rows <= 0) throw InvalidInput("error_heatmap: grid must be non-empty");
    Heatmap h;
    h.cols = cols;
    h.rows = rows;
    h.counts.assign(static_cast<std::size_t>(cols * rows), 0);
    for (const auto& raw : error_locations) {
        const Point p = screen.clamp(raw);
        const int c = std::min(cols - 1, static_cast<int>(p.x * cols / screen.width));
        const int r = std::min(rows - 1, static_cast<int>(p.y * rows / screen.height));
        ++h.counts[static_cast<std::size_t>(r * cols + c)];
        (p.x < screen.width / 2.0 ? h.left : h.right) += 1;
        (p.y < screen.height / 2.0 ? h.top : h.bottom) += 1;
        ++h.total;
    }
    return h;
}

void TlxScales::validate() const {
    for (double v : values()) {
        if (!(v >= 0.0 && v <= 100.0)) throw InvalidInput("TLX scale outside [0, 100]");
    }
}

double tlx_overall(const TlxScales& scales) {
    scales.validate();
    double sum = 0.0;
    for (double v : scales.values()) sum += v;
    return sum / 6.0;
}

}  // namespace eyetap
