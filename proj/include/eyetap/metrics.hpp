#pragma once

// Measures computed from recorded sessions: DTW path cost, Fitts throughput
// (uni- and bivariate effective width), error rate, error heatmap and raw TLX.

#include "eyetap/common.hpp"
#include "eyetap/inputsim.hpp"
#include "eyetap/tasks.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace eyetap {

struct DtwResult {
    double cost = 0.0;
    /// One optimal alignment, (i, j) pairs from (0, 0) to (n-1, m-1).
    std::vector<std::pair<std::size_t, std::size_t>> path;
};

/// Unconstrained DTW with |a_i - b_j| local cost and match/insert/delete steps.
/// Throws InvalidInput when either sequence is empty.
DtwResult dtw(std::span<const double> a, std::span<const double> b);

struct PathCostResult {
    double dtw_x = 0.0;
    double dtw_y = 0.0;
    std::size_t path_len_x = 0;
    std::size_t path_len_y = 0;
    /// Mean of the per-axis costs, each normalised by its warp-path length (pixels).
    double combined = 0.0;
};

/// `count` points evenly spaced by arc length along the polyline through `waypoints`.
std::vector<Point> resample_polyline(std::span<const Point> waypoints, std::size_t count);

/**
 * Compares a recorded pointer path with the straight polyline through the
 * targets (in selection order), resampled at rate_hz over the same time span
 * at constant speed. X and Y are warped separately.
 */
PathCostResult path_cost(std::span<const GazeSample> pointer_path, std::span<const Point> targets_in_order,
                         double rate_hz);

enum class TpVariant { univariate, bivariate };

std::string_view to_string(TpVariant v);

struct ConditionThroughput {
    double distance = 0.0;
    double width = 0.0;
    int n = 0;
    double sd = 0.0;
    double de = 0.0;   // effective distance, px
    double we = 0.0;   // effective width, px
    double ide = 0.0;  // bits
    double mt_ms = 0.0;
    double tp = 0.0;   // bits/s
    bool excluded = false;
};

struct ThroughputResult {
    TpVariant variant = TpVariant::univariate;
    std::vector<ConditionThroughput> per_condition;
    /// Unweighted mean over non-excluded conditions.
    double mean_tp = 0.0;
};

constexpr double kEffectiveWidthFactor = 4.133;

double nominal_id(double distance, double width);
/// Sample SD of signed endpoint deviation along the start -> target axis.
double sd_univariate(std::span<const TrialOutcome> trials);
/// sqrt(sum((x - mean_x)^2 + (y - mean_y)^2) / (n - 1)).
double sd_bivariate(std::span<const Point> endpoints);

/// Groups trials by (distance, width); conditions with < 2 trials or zero SD are flagged excluded.
ThroughputResult throughput(std::span<const TrialOutcome> trials, TpVariant variant);

/// Fraction of trials with hit == false. Throws InvalidInput on an empty list.
double error_rate(std::span<const TrialOutcome> trials);

struct Heatmap {
    int cols = 0;
    int rows = 0;
    std::vector<int> counts;  // row-major
    int left = 0;
    int right = 0;
    int top = 0;
    int bottom = 0;
    int total = 0;

    int at(int col, int row) const { return counts[static_cast<std::size_t>(row * cols + col)]; }
};

Heatmap error_heatmap(std::span<const Point> error_locations, int cols, int rows, const ScreenSpec& screen);

struct TlxScales {
    double mental = 0.0;
    double physical = 0.0;
    double temporal = 0.0;
    double performance = 0.0;
    double effort = 0.0;
    double frustration = 0.0;

    friend bool operator==(const TlxScales&, const TlxScales&) = default;
    std::array<double, 6> values() const { return {mental, physical, temporal, performance, effort, frustration}; }
    void validate() const;
};

/// Raw (unweighted) TLX: mean of the six scales, each in [0, 100].
double tlx_overall(const TlxScales& scales);

}  // namespace eyetap
