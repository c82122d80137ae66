#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "distfit.hpp"
#include "ingest.hpp"
#include "rng.hpp"

namespace reliafit {

enum class SimKind { power_law_process, grouped_dist, two_burst };
enum class NoiseKind { none, poisson };

struct BurstSpec {
    DistKind kind = DistKind::weibull;
    DistParams params;
};

/// Parsed simulation spec (see schemas and README for the JSON layout).
struct SimSpec {
    SimKind kind = SimKind::grouped_dist;
    std::uint64_t seed = 1;
    NoiseKind noise = NoiseKind::poisson;
    std::string app_id = "simapp";
    std::string version = "1.0";
    std::int64_t origin = 1600905600; // 2020-09-24T00:00:00Z
    // power_law_process
    double lambda = 1.0;
    double beta = 1.0;
    double horizon_hours = 100.0;
    // grouped_dist / two_burst
    BurstSpec burst_a;
    BurstSpec burst_b;
    double weight = 0.5;
    double c_total = 50.0;
    int periods = 10;
};

/// Parse + validate the SimSpec JSON document. Validation failures name the
/// offending field.
SimSpec parse_sim_spec(std::string_view json_text);

/// Poisson draw from the seeded stream: inversion below mean 30, transformed
/// rejection (PTRS) above. Deterministic per stream state.
long long poisson_sample(SplitMix64& rng, double mean);

/// NHPP power-law event times by inversion: t_k = (S_k / lambda)^(1/beta)
/// with S_k a unit-rate Poisson arrival sequence, truncated at T.
EventTimeline sample_power_law_times(double lambda, double beta, double horizon,
                                     std::uint64_t seed);

/// Grouped counts with expectation c_total * (F(i) - F(i-1)) per period;
/// noise=none keeps the exact real-valued expectations.
FailureSeries sample_grouped_counts(DistKind kind, DistParams params, double c_total,
                                    int periods, NoiseKind noise, std::uint64_t seed);

/// Two-component mixture of per-period expectations, Poisson-sampled.
FailureSeries sample_two_burst(const BurstSpec& spec_a, const BurstSpec& spec_b, double weight,
                               double c_total, int periods, std::uint64_t seed);

/// Expected per-period counts of the two-burst mixture (test hook).
std::vector<double> two_burst_expected_counts(const BurstSpec& spec_a, const BurstSpec& spec_b,
                                              double weight, double c_total, int periods);

/// Per-event expansion of a grouped series: count k in period i becomes k
/// events at (i-1) + j/(k+1), j = 1..k; horizon = last period index. Counts
/// must be whole numbers.
EventTimeline expand_series_timeline(const FailureSeries& series);

/// Run the spec and render the result in the ingest CSV schema. Grouped kinds
/// emit day-granularity events; noiseless real-valued counts are placed at
/// distribution quantiles (event k at F^{-1}((k-1/2)/C)).
std::string simulate_to_csv(const SimSpec& spec);

} // namespace reliafit
