#include "simgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "numerics.hpp"
#include "time_utils.hpp"

namespace reliafit {

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw Error(Errc::config, "invalid simulation spec: field \"" + field + "\" " + why);
}

double require_positive(const nlohmann::json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_number()) bad_field(field, "must be a number");
    const double v = j[field].get<double>();
    if (!(v > 0.0) || !std::isfinite(v)) bad_field(field, "must be positive and finite");
    return v;
}

BurstSpec parse_burst(const nlohmann::json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_object()) bad_field(field, "must be an object");
    const auto& b = j[field];
    BurstSpec spec;
    if (!b.contains("dist") || !b["dist"].is_string()) bad_field(field + ".dist", "must be a string");
    const auto kind = dist_kind_from_name(b["dist"].get<std::string>());
    if (!kind)
        bad_field(field + ".dist", "must be one of weibull, gamma, rayleigh, sshaped");
    spec.kind = *kind;
    spec.params.a = require_positive(b, "a");
    spec.params.b = require_positive(b, "b");
    if (spec.kind == DistKind::rayleigh && spec.params.b != 2.0)
        bad_field(field + ".b", "must equal 2 for rayleigh");
    if (spec.kind == DistKind::sshaped && spec.params.a != 2.0)
        bad_field(field + ".a", "must equal 2 for sshaped");
    return spec;
}

} // namespace

SimSpec parse_sim_spec(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::config, std::string("invalid simulation spec: not valid JSON (") +
                                      e.what() + ")");
    }
    if (!j.is_object()) throw Error(Errc::config, "invalid simulation spec: expected an object");

    SimSpec spec;
    if (!j.contains("kind") || !j["kind"].is_string()) bad_field("kind", "must be a string");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "power_law_process") spec.kind = SimKind::power_law_process;
    else if (kind == "grouped_dist") spec.kind = SimKind::grouped_dist;
    else if (kind == "two_burst") spec.kind = SimKind::two_burst;
    else bad_field("kind", "must be power_law_process, grouped_dist, or two_burst");

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) bad_field("seed", "must be a nonnegative integer");
        spec.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("noise")) {
        if (!j["noise"].is_string()) bad_field("noise", "must be \"none\" or \"poisson\"");
        const std::string noise = j["noise"].get<std::string>();
        if (noise == "none") spec.noise = NoiseKind::none;
        else if (noise == "poisson") spec.noise = NoiseKind::poisson;
        else bad_field("noise", "must be \"none\" or \"poisson\"");
    }
    if (j.contains("app_id")) {
        if (!j["app_id"].is_string() || j["app_id"].get<std::string>().empty())
            bad_field("app_id", "must be a non-empty string");
        spec.app_id = j["app_id"].get<std::string>();
    }
    if (j.contains("version")) {
        if (!j["version"].is_string() || j["version"].get<std::string>().empty())
            bad_field("version", "must be a non-empty string");
        spec.version = j["version"].get<std::string>();
    }
    if (j.contains("origin")) {
        if (!j["origin"].is_string()) bad_field("origin", "must be an ISO 8601 UTC string");
        std::int64_t epoch = 0;
        if (!parse_iso8601_utc(j["origin"].get<std::string>(), epoch))
            bad_field("origin", "must parse as YYYY-MM-DDTHH:MM:SSZ");
        spec.origin = epoch;
    }

    switch (spec.kind) {
        case SimKind::power_law_process:
            spec.lambda = require_positive(j, "lambda");
            spec.beta = require_positive(j, "beta");
            spec.horizon_hours = require_positive(j, "horizon_hours");
            break;
        case SimKind::grouped_dist: {
            // grouped_dist carries dist/a/b at the top level
            if (!j.contains("dist") || !j["dist"].is_string())
                bad_field("dist", "must be a string");
            const auto dk = dist_kind_from_name(j["dist"].get<std::string>());
            if (!dk) bad_field("dist", "must be one of weibull, gamma, rayleigh, sshaped");
            spec.burst_a.kind = *dk;
            spec.burst_a.params.a = require_positive(j, "a");
            spec.burst_a.params.b = require_positive(j, "b");
            if (spec.burst_a.kind == DistKind::rayleigh && spec.burst_a.params.b != 2.0)
                bad_field("b", "must equal 2 for rayleigh");
            if (spec.burst_a.kind == DistKind::sshaped && spec.burst_a.params.a != 2.0)
                bad_field("a", "must equal 2 for sshaped");
            spec.c_total = require_positive(j, "c_total");
            if (!j.contains("periods") || !j["periods"].is_number_integer())
                bad_field("periods", "must be an integer");
            spec.periods = j["periods"].get<int>();
            if (spec.periods < 4) bad_field("periods", "must be at least 4");
            break;
        }
        case SimKind::two_burst: {
            spec.burst_a = parse_burst(j, "burst_a");
            spec.burst_b = parse_burst(j, "burst_b");
            if (!j.contains("weight") || !j["weight"].is_number())
                bad_field("weight", "must be a number");
            spec.weight = j["weight"].get<double>();
            if (!(spec.weight > 0.0 && spec.weight < 1.0))
                bad_field("weight", "must lie strictly between 0 and 1");
            spec.c_total = require_positive(j, "c_total");
            if (!j.contains("periods") || !j["periods"].is_number_integer())
                bad_field("periods", "must be an integer");
            spec.periods = j["periods"].get<int>();
            if (spec.periods < 4) bad_field("periods", "must be at least 4");
            spec.noise = NoiseKind::poisson; // mixture counts are always sampled
            break;
        }
    }
    return spec;
}

long long poisson_sample(SplitMix64& rng, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw Error(Errc::domain, "poisson_sample: mean must be nonnegative and finite");
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
        // Inversion by sequential search.
        const double u = rng.next_double();
        double p = std::exp(-mean);
        double cdf = p;
        long long k = 0;
        while (u >= cdf && k < 10000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }
    // Hörmann's PTRS transformed rejection.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        const double u = rng.next_double() - 0.5;
        const double v = rng.next_double();
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<long long>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const long long k = static_cast<long long>(kf);
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kf * log_mean - mean - ln_gamma(kf + 1.0))
            return k;
    }
}

EventTimeline sample_power_law_times(double lambda, double beta, double horizon,
                                     std::uint64_t seed) {
    if (!(lambda > 0.0)) throw Error(Errc::domain, "sample_power_law_times: lambda must be > 0");
    if (!(beta > 0.0)) throw Error(Errc::domain, "sample_power_law_times: beta must be > 0");
    if (!(horizon > 0.0)) throw Error(Errc::domain, "sample_power_law_times: horizon must be > 0");

    SplitMix64 rng(seed);
    EventTimeline tl;
    tl.observation_end_hours = horizon;
    double arrival = 0.0; // unit-rate Poisson arrival S_k
    for (;;) {
        arrival += -std::log1p(-rng.next_double()); // Exp(1)
        const double t = std::pow(arrival / lambda, 1.0 / beta);
        if (t > horizon) break;
        tl.elapsed_hours.push_back(t);
    }
    return tl;
}

namespace {

std::vector<double> expected_counts(DistKind kind, DistParams params, double c_total,
                                    int periods) {
    std::vector<double> mu(periods);
    double prev = 0.0;
    for (int i = 1; i <= periods; ++i) {
        const double f = dist_cdf(kind, static_cast<double>(i), params);
        mu[i - 1] = c_total * (f - prev);
        prev = f;
    }
    return mu;
}

FailureSeries series_from_counts(std::vector<double> counts) {
    FailureSeries s;
    s.app_id = "simapp";
    s.version = "1.0";
    s.granularity = Granularity::day;
    s.origin = 0;
    s.period_index.resize(counts.size());
    s.cumulative.resize(counts.size());
    double run = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        s.period_index[i] = static_cast<int>(i) + 1;
        run += counts[i];
        s.cumulative[i] = run;
    }
    s.counts = std::move(counts);
    return s;
}

} // namespace

FailureSeries sample_grouped_counts(DistKind kind, DistParams params, double c_total,
                                    int periods, NoiseKind noise, std::uint64_t seed) {
    if (!(c_total > 0.0)) throw Error(Errc::domain, "sample_grouped_counts: c_total must be > 0");
    if (periods < 4) throw Error(Errc::domain, "sample_grouped_counts: periods must be >= 4");
    auto mu = expected_counts(kind, params, c_total, periods);
    if (noise == NoiseKind::poisson) {
        SplitMix64 rng(seed);
        for (double& m : mu) m = static_cast<double>(poisson_sample(rng, m));
    }
    return series_from_counts(std::move(mu));
}

std::vector<double> two_burst_expected_counts(const BurstSpec& spec_a, const BurstSpec& spec_b,
                                              double weight, double c_total, int periods) {
    if (!(weight > 0.0 && weight < 1.0))
        throw Error(Errc::domain, "two_burst: weight must lie strictly between 0 and 1");
    const auto mu_a = expected_counts(spec_a.kind, spec_a.params, c_total, periods);
    const auto mu_b = expected_counts(spec_b.kind, spec_b.params, c_total, periods);
    std::vector<double> mu(periods);
    for (int i = 0; i < periods; ++i) mu[i] = weight * mu_a[i] + (1.0 - weight) * mu_b[i];
    return mu;
}

FailureSeries sample_two_burst(const BurstSpec& spec_a, const BurstSpec& spec_b, double weight,
                               double c_total, int periods, std::uint64_t seed) {
    if (!(c_total > 0.0)) throw Error(Errc::domain, "sample_two_burst: c_total must be > 0");
    if (periods < 4) throw Error(Errc::domain, "sample_two_burst: periods must be >= 4");
    auto mu = two_burst_expected_counts(spec_a, spec_b, weight, c_total, periods);
    SplitMix64 rng(seed);
    for (double& m : mu) m = static_cast<double>(poisson_sample(rng, m));
    return series_from_counts(std::move(mu));
}

EventTimeline expand_series_timeline(const FailureSeries& series) {
    EventTimeline tl;
    for (std::size_t i = 0; i < series.counts.size(); ++i) {
        const double c = series.counts[i];
        if (c != std::floor(c) || c < 0.0)
            throw Error(Errc::contract,
                        "per-event expansion requires whole per-period counts, got " +
                            std::to_string(c));
        const long long k = static_cast<long long>(c);
        const double base = static_cast<double>(series.period_index[i] - 1);
        for (long long jj = 1; jj <= k; ++jj)
            tl.elapsed_hours.push_back(base + static_cast<double>(jj) / (static_cast<double>(k) + 1.0));
    }
    tl.observation_end_hours =
        series.period_index.empty() ? 0.0 : static_cast<double>(series.period_index.back());
    return tl;
}

namespace {

double dist_quantile(DistKind kind, DistParams params, double p) {
    if (kind == DistKind::weibull || kind == DistKind::rayleigh)
        return params.a * std::pow(-std::log1p(-p), 1.0 / params.b);
    // gamma family: bisection on the CDF
    double lo = 0.0, hi = params.b * (params.a + 1.0);
    while (dist_cdf(kind, hi, params) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (dist_cdf(kind, mid, params) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

// Clamp a second offset into its owning day so calendar regrouping
// reproduces the generator's periods exactly.
std::int64_t day_clamped_seconds(double period_time) {
    const int period = static_cast<int>(std::ceil(period_time - 1e-12));
    std::int64_t sec = std::llround(period_time * 86400.0);
    const std::int64_t lo = static_cast<std::int64_t>(period - 1) * 86400;
    const std::int64_t hi = static_cast<std::int64_t>(period) * 86400 - 1;
    return std::clamp(sec, lo, hi);
}

void append_event_rows(std::vector<FailureEvent>& events, const SimSpec& spec,
                       std::int64_t offset_seconds) {
    FailureEvent ev;
    ev.app_id = spec.app_id;
    ev.version = spec.version;
    ev.timestamp = offset_seconds;
    events.push_back(std::move(ev));
}

} // namespace

std::string simulate_to_csv(const SimSpec& spec) {
    std::vector<FailureEvent> events;
    // Grouped kinds emit day-granularity periods anchored at UTC midnight.
    const std::int64_t day_origin = (spec.origin / 86400) * 86400;

    switch (spec.kind) {
        case SimKind::power_law_process: {
            const EventTimeline tl =
                sample_power_law_times(spec.lambda, spec.beta, spec.horizon_hours, spec.seed);
            for (double h : tl.elapsed_hours)
                append_event_rows(events, spec, spec.origin + std::llround(h * 3600.0));
            break;
        }
        case SimKind::grouped_dist: {
            if (spec.noise == NoiseKind::poisson) {
                const FailureSeries s =
                    sample_grouped_counts(spec.burst_a.kind, spec.burst_a.params, spec.c_total,
                                          spec.periods, NoiseKind::poisson, spec.seed);
                for (std::size_t i = 0; i < s.counts.size(); ++i) {
                    const long long k = static_cast<long long>(s.counts[i]);
                    for (long long jj = 1; jj <= k; ++jj) {
                        const double pt = static_cast<double>(s.period_index[i] - 1) +
                                          static_cast<double>(jj) / (static_cast<double>(k) + 1.0);
                        append_event_rows(events, spec, day_origin + day_clamped_seconds(pt));
                    }
                }
            } else {
                // Quantile placement keeps per-period counts within one event
                // of the real-valued expectations.
                const double f_end =
                    dist_cdf(spec.burst_a.kind, static_cast<double>(spec.periods),
                             spec.burst_a.params);
                for (long long k = 1;; ++k) {
                    const double p = (static_cast<double>(k) - 0.5) / spec.c_total;
                    if (p >= f_end) break;
                    const double pt = dist_quantile(spec.burst_a.kind, spec.burst_a.params, p);
                    append_event_rows(events, spec, day_origin + day_clamped_seconds(pt));
                }
            }
            break;
        }
        case SimKind::two_burst: {
            const FailureSeries s = sample_two_burst(spec.burst_a, spec.burst_b, spec.weight,
                                                     spec.c_total, spec.periods, spec.seed);
            for (std::size_t i = 0; i < s.counts.size(); ++i) {
                const long long k = static_cast<long long>(s.counts[i]);
                for (long long jj = 1; jj <= k; ++jj) {
                    const double pt = static_cast<double>(s.period_index[i] - 1) +
                                      static_cast<double>(jj) / (static_cast<double>(k) + 1.0);
                    append_event_rows(events, spec, day_origin + day_clamped_seconds(pt));
                }
            }
            break;
        }
    }
    if (events.empty())
        throw Error(Errc::degenerate,
                    "simulation produced no events; enlarge c_total/lambda or the horizon");
    return events_to_csv(events);
}

} // namespace reliafit
