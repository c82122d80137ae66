#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "ingest.hpp"

namespace reliafit {

enum class SrgmKind { power_law, musa_basic, musa_okumoto };
enum class Truncation { time, failure };
enum class EstimationMethod { mle, nls };

const char* srgm_kind_name(SrgmKind kind);
std::optional<SrgmKind> srgm_kind_from_name(std::string_view name);

struct GofVerdict {
    double statistic = 0.0; // Cramér–von Mises C²_M
    int m = 0;
    double significance = 0.0;
    double critical_value = 0.0;
    bool passed = false;
};

/// Fitted reliability-growth model. Parameter slots by kind:
/// power_law -> (lambda, beta); musa_basic -> (lambda0, nu0);
/// musa_okumoto -> (lambda0, theta).
struct SrgmFit {
    SrgmKind kind = SrgmKind::power_law;
    EstimationMethod method = EstimationMethod::mle;
    double lambda = 0.0;
    double beta = 0.0;
    double lambda0 = 0.0;
    double nu0 = 0.0;
    double theta = 0.0;
    // power-law bookkeeping needed by the goodness-of-fit test
    Truncation truncation = Truncation::time;
    double total_time = 0.0;
    int n_events = 0;
    // curve-fit bookkeeping
    bool converged = true;
    double sse = 0.0;
    std::optional<GofVerdict> gof;
};

/// Closed-form Crow-AMSAA maximum likelihood for N(t) = lambda * t^beta.
/// Time truncation uses T = observation end; failure truncation uses T = t_n.
SrgmFit fit_power_law_mle(const EventTimeline& timeline, Truncation truncation);

/// Least-squares fit of the Musa mean-value curves to grouped cumulative
/// counts. A parameter driven into its bound leaves converged = false.
SrgmFit fit_curve_srgm(const FailureSeries& series, SrgmKind kind);

/// Mean cumulative failures at time t for a fitted model; 0 at t = 0.
double srgm_mean_value(const SrgmFit& fit, double t);

/// C²_M = 1/(12m) + sum_i (z_i^beta_bar - (2i-1)/(2m))², z ascending in (0,1].
double cvm_statistic(std::vector<double> z, double beta_bar);

/// Cramér–von Mises goodness-of-fit verdict for a power-law fit, with the
/// unbiased shape (m-1)/m * beta-hat and critical values from the embedded
/// Monte-Carlo-calibrated table (significance in {0.01, 0.05, 0.10, 0.20}).
GofVerdict cvm_gof(const EventTimeline& timeline, const SrgmFit& fit,
                   double significance = 0.05);

/// Critical value for (m, significance), interpolated in 1/m between table
/// rows; m above the table range uses the largest tabulated m.
double cvm_critical_value(int m, double significance);

/// Null-distribution quantiles of the statistic for one m, simulated from the
/// time-truncated pivotal form. Returns critical values for significances
/// {0.01, 0.05, 0.10, 0.20}. Deterministic in (m, replicates, seed); this is
/// exactly what generated the shipped table (see tools/cvm_calibrate).
std::array<double, 4> calibrate_cvm_quantiles(int m, int replicates, std::uint64_t seed);

/// Significance levels the table carries, ascending.
std::array<double, 4> cvm_supported_significances();

} // namespace reliafit
