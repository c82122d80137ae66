#pragma once

#include <optional>
#include <span>
#include <vector>

namespace reliafit {

struct EvalMetrics {
    double rmse = 0.0;
    double adj_r_square = 0.0;
    std::optional<double> mre_percent; // only when the actual total is known
    int n = 0;
    int p_free = 0;
};

/// sqrt(SSE / (n - p_free)) — degrees-of-freedom adjusted.
double rmse(std::span<const double> observed, std::span<const double> predicted, int p_free);

/// 1 - (SSE/(n-p_free)) / (SST/(n-1)), SST about the observed mean.
double adj_r_square(std::span<const double> observed, std::span<const double> predicted,
                    int p_free);

/// 100 * |estimated - actual| / actual, in percent.
double mre(double estimated_total, double actual_total);

/// Ascending RMSE; ties within 1e-9 broken by descending adjusted R²;
/// remaining ties keep declaration order. Returns indices into `items`.
struct RankEntry {
    double rmse;
    double adj_r_square;
    int n;
};
std::vector<int> rank_models(std::span<const RankEntry> items);

} // namespace reliafit
