#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eval.hpp"
#include "ingest.hpp"

namespace reliafit {

/// Rayleigh is Weibull with shape fixed to 2; the S-shaped model is Gamma
/// with shape fixed to 2.
enum class DistKind { weibull, gamma, rayleigh, sshaped };

const char* dist_kind_name(DistKind kind);
std::optional<DistKind> dist_kind_from_name(std::string_view name);

/// Weibull: a = scale, b = shape. Gamma: a = shape, b = scale.
struct DistParams {
    double a = 1.0;
    double b = 1.0;
};

struct ParamEstimate {
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct CurvePoint {
    double t = 0.0;
    double fitted_cum = 0.0;
};

/// A fitted cumulative-failure model Y(t) = C * F(t; a, b).
struct FittedDistModel {
    DistKind kind = DistKind::weibull;
    ParamEstimate a;
    ParamEstimate b;
    ParamEstimate c_total; // estimated total defects C
    double t_max = 0.0;    // period of peak failure rate
    double proportion_at_tmax = 0.0;
    double sse = 0.0;
    bool converged = false;
    int iterations = 0;
    EvalMetrics metrics;
    std::vector<CurvePoint> fitted_curve; // one point per series period
};

/// Density f(t; a, b) of the selected family. The constrained kinds insist on
/// their fixed shape value.
double dist_pdf(DistKind kind, double t, DistParams params);

/// Distribution function F(t; a, b); F(0) = 0.
double dist_cdf(DistKind kind, double t, DistParams params);

/// Peak of the density: Weibull a*((b-1)/b)^(1/b) for b > 1, Gamma b*(a-1)
/// for a > 1, otherwise 0 (mode at the origin).
double mode_time(DistKind kind, DistParams params);

/// F evaluated at the density peak — the fraction of total defects uncovered
/// by the time the failure rate is highest.
double proportion_at_mode(DistKind kind, DistParams params);

/// Least-squares fit of cumulative counts to C * F(t; a, b) over the series
/// periods (t = 1-based period index). Constrained kinds freeze their shape.
FittedDistModel fit_cumulative(const FailureSeries& series, DistKind kind);

/// Number of free parameters the kind fits (3, or 2 for constrained kinds).
int dist_free_params(DistKind kind);

/// Display helpers used by reports: proportions to the nearest 0.5
/// percentage point ("47.5%", "38.5%"), parameters to two decimals.
std::string format_proportion_percent(double proportion);
std::string format_param_2dp(double value);

} // namespace reliafit
