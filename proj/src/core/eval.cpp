#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "errors.hpp"

namespace reliafit {

namespace {

double sse_of(std::span<const double> observed, std::span<const double> predicted) {
    double sse = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double r = observed[i] - predicted[i];
        sse += r * r;
    }
    return sse;
}

void check_lengths(std::span<const double> observed, std::span<const double> predicted,
                   int p_free, const char* who) {
    if (observed.size() != predicted.size())
        throw Error(Errc::contract, std::string(who) + ": observed/predicted lengths differ");
    if (p_free < 1) throw Error(Errc::contract, std::string(who) + ": p_free must be positive");
    if (observed.size() <= static_cast<std::size_t>(p_free))
        throw Error(Errc::contract, std::string(who) + ": need n > p_free, got n=" +
                                        std::to_string(observed.size()) +
                                        " p_free=" + std::to_string(p_free));
}

} // namespace

double rmse(std::span<const double> observed, std::span<const double> predicted, int p_free) {
    check_lengths(observed, predicted, p_free, "rmse");
    const int dof = static_cast<int>(observed.size()) - p_free;
    return std::sqrt(sse_of(observed, predicted) / dof);
}

double adj_r_square(std::span<const double> observed, std::span<const double> predicted,
                    int p_free) {
    check_lengths(observed, predicted, p_free, "adj_r_square");
    const std::size_t n = observed.size();
    const double mean = std::accumulate(observed.begin(), observed.end(), 0.0) / n;
    double sst = 0.0;
    for (double y : observed) sst += (y - mean) * (y - mean);
    if (sst == 0.0)
        throw Error(Errc::degenerate, "adj_r_square: observations are constant (SST = 0)");
    const double sse = sse_of(observed, predicted);
    return 1.0 - (sse / (n - p_free)) / (sst / (n - 1));
}

double mre(double estimated_total, double actual_total) {
    if (!(actual_total > 0.0))
        throw Error(Errc::domain, "mre: actual total must be positive, got " +
                                      std::to_string(actual_total));
    return 100.0 * std::abs(estimated_total - actual_total) / actual_total;
}

std::vector<int> rank_models(std::span<const RankEntry> items) {
    if (items.empty()) throw Error(Errc::precondition, "rank_models: no results to rank");
    for (std::size_t i = 1; i < items.size(); ++i)
        if (items[i].n != items[0].n)
            throw Error(Errc::contract, "rank_models: results come from differing series "
                                        "(mismatched n)");
    std::vector<int> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (std::abs(items[a].rmse - items[b].rmse) > 1e-9) return items[a].rmse < items[b].rmse;
        return items[a].adj_r_square > items[b].adj_r_square;
    });
    return order;
}

} // namespace reliafit
