#include "srgm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>

#include "errors.hpp"
#include "numerics.hpp"
#include "rng.hpp"

namespace reliafit {

const char* srgm_kind_name(SrgmKind kind) {
    switch (kind) {
        case SrgmKind::power_law: return "power_law";
        case SrgmKind::musa_basic: return "musa_basic";
        case SrgmKind::musa_okumoto: return "musa_okumoto";
    }
    return "?";
}

std::optional<SrgmKind> srgm_kind_from_name(std::string_view name) {
    if (name == "power_law") return SrgmKind::power_law;
    if (name == "musa_basic") return SrgmKind::musa_basic;
    if (name == "musa_okumoto") return SrgmKind::musa_okumoto;
    return std::nullopt;
}

SrgmFit fit_power_law_mle(const EventTimeline& timeline, Truncation truncation) {
    const auto& t = timeline.elapsed_hours;
    const int n = static_cast<int>(t.size());
    if (n < 2)
        throw Error(Errc::precondition,
                    "power-law MLE needs at least 2 events, got " + std::to_string(n));

    const double T =
        truncation == Truncation::time ? timeline.observation_end_hours : t.back();
    const int m = truncation == Truncation::time ? n : n - 1;
    double log_sum = 0.0;
    for (int i = 0; i < m; ++i) log_sum += std::log(T / t[i]); // t_i == T contributes 0
    if (!(log_sum > 0.0))
        throw Error(Errc::degenerate, "power-law MLE degenerate: sum of ln(T/t_i) is not positive");

    SrgmFit fit;
    fit.kind = SrgmKind::power_law;
    fit.method = EstimationMethod::mle;
    fit.beta = static_cast<double>(n) / log_sum;
    fit.lambda = static_cast<double>(n) / std::pow(T, fit.beta);
    fit.truncation = truncation;
    fit.total_time = T;
    fit.n_events = n;
    return fit;
}

namespace {

constexpr double kMusaLower = 1e-9;

struct MusaSetup {
    NlsProblem problem;
    std::vector<double> upper;
};

MusaSetup musa_problem(const FailureSeries& series, SrgmKind kind) {
    MusaSetup setup;
    NlsProblem& prob = setup.problem;
    if (kind == SrgmKind::musa_basic) {
        prob.model = [](std::span<const double> p, double t) {
            return p[1] * -std::expm1(-p[0] * t / p[1]); // nu0 (1 - e^{-lambda0 t / nu0})
        };
    } else {
        prob.model = [](std::span<const double> p, double t) {
            return std::log1p(p[0] * p[1] * t) / p[1]; // (1/theta) ln(lambda0 theta t + 1)
        };
    }
    prob.t_values.assign(series.period_index.begin(), series.period_index.end());
    prob.y_values = series.cumulative;

    const double last_cum = series.cumulative.back();
    const double rate0 = std::max(series.counts.front(), 0.5);
    if (kind == SrgmKind::musa_basic) {
        const double nu_cap = 1e3 * std::max(1.0, last_cum);
        prob.initial_params = {rate0, 1.2 * last_cum};
        prob.lower_bounds = {kMusaLower, kMusaLower};
        prob.upper_bounds = {1e9, nu_cap};
    } else {
        prob.initial_params = {rate0, 1.0};
        prob.lower_bounds = {kMusaLower, kMusaLower};
        prob.upper_bounds = {1e9, 1e6};
    }
    setup.upper = prob.upper_bounds;
    return setup;
}

} // namespace

SrgmFit fit_curve_srgm(const FailureSeries& series, SrgmKind kind) {
    if (kind == SrgmKind::power_law)
        throw Error(Errc::contract, "fit_curve_srgm handles musa_basic and musa_okumoto only");
    if (series.period_index.size() < 3)
        throw Error(Errc::precondition, "musa curve fit needs at least 3 periods, series has " +
                                            std::to_string(series.period_index.size()));
    double total = 0.0;
    for (double c : series.counts) total += c;
    if (!(total > 0.0))
        throw Error(Errc::degenerate, "degenerate input: series has all-zero counts");

    MusaSetup setup = musa_problem(series, kind);
    NlsResult r = nls_fit(setup.problem);
    if (!r.converged) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "best so far p1=%.6g p2=%.6g sse=%.6g", r.params[0],
                      r.params[1], r.sse);
        throw Error(Errc::nonconvergence,
                    std::string(srgm_kind_name(kind)) + " fit did not converge: " + buf);
    }

    SrgmFit fit;
    fit.kind = kind;
    fit.method = EstimationMethod::nls;
    fit.lambda0 = r.params[0];
    if (kind == SrgmKind::musa_basic)
        fit.nu0 = r.params[1];
    else
        fit.theta = r.params[1];
    fit.sse = r.sse;
    fit.n_events = static_cast<int>(series.period_index.size());
    // A parameter pinned to its bound means the family cannot represent the
    // data (e.g. linear growth drives nu0 to the cap): flag, don't throw.
    fit.converged = true;
    for (std::size_t j = 0; j < r.params.size(); ++j) {
        if (r.params[j] >= 0.999 * setup.upper[j] || r.params[j] <= kMusaLower * 1.001)
            fit.converged = false;
    }
    return fit;
}

double srgm_mean_value(const SrgmFit& fit, double t) {
    if (!(t >= 0.0))
        throw Error(Errc::domain, "srgm_mean_value: t must be nonnegative, got " +
                                      std::to_string(t));
    if (t == 0.0) return 0.0;
    switch (fit.kind) {
        case SrgmKind::power_law: return fit.lambda * std::pow(t, fit.beta);
        case SrgmKind::musa_basic: return fit.nu0 * -std::expm1(-fit.lambda0 * t / fit.nu0);
        case SrgmKind::musa_okumoto:
            return std::log1p(fit.lambda0 * fit.theta * t) / fit.theta;
    }
    return 0.0;
}

double cvm_statistic(std::vector<double> z, double beta_bar) {
    const int m = static_cast<int>(z.size());
    if (m < 1) throw Error(Errc::contract, "cvm_statistic: empty sample");
    std::sort(z.begin(), z.end());
    double stat = 1.0 / (12.0 * m);
    for (int i = 0; i < m; ++i) {
        const double d = std::pow(z[i], beta_bar) - (2.0 * i + 1.0) / (2.0 * m);
        stat += d * d;
    }
    return stat;
}

// ---------------------------------------------------------------------------
// Critical-value table (embedded from data/cvm_critical.csv at build time)
// ---------------------------------------------------------------------------

namespace {

#include "cvm_table.inc"

struct CvmTable {
    // significance -> (m -> critical value), m ascending
    std::map<double, std::map<int, double>> by_significance;
};

const CvmTable& cvm_table() {
    static const CvmTable table = [] {
        CvmTable t;
        std::istringstream in(kCvmCriticalCsv);
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (header) {
                header = false;
                continue; // m,significance,critical_value
            }
            int m = 0;
            double sig = 0.0, crit = 0.0;
            if (std::sscanf(line.c_str(), "%d,%lf,%lf", &m, &sig, &crit) != 3)
                throw Error(Errc::config, "embedded cvm_critical.csv is malformed: " + line);
            t.by_significance[sig][m] = crit;
        }
        if (t.by_significance.empty())
            throw Error(Errc::config, "embedded cvm_critical.csv is empty");
        return t;
    }();
    return table;
}

} // namespace

std::array<double, 4> cvm_supported_significances() { return {0.01, 0.05, 0.10, 0.20}; }

double cvm_critical_value(int m, double significance) {
    const auto& table = cvm_table();
    const auto it = table.by_significance.find(significance);
    if (it == table.by_significance.end()) {
        std::string levels;
        for (const auto& [sig, _] : table.by_significance) {
            if (!levels.empty()) levels += ", ";
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%.2f", sig);
            levels += buf;
        }
        throw Error(Errc::config, "unsupported significance " + std::to_string(significance) +
                                      "; supported levels: " + levels);
    }
    const auto& rows = it->second;
    if (m < rows.begin()->first)
        throw Error(Errc::precondition,
                    "goodness-of-fit test needs m >= " + std::to_string(rows.begin()->first));
    if (m >= rows.rbegin()->first) return rows.rbegin()->second;
    const auto hi = rows.lower_bound(m);
    if (hi->first == m) return hi->second;
    const auto lo = std::prev(hi);
    // critical values flatten out as m grows; interpolate linearly in 1/m
    const double x = 1.0 / m;
    const double x0 = 1.0 / lo->first, x1 = 1.0 / hi->first;
    const double w = (x - x0) / (x1 - x0);
    return lo->second + w * (hi->second - lo->second);
}

GofVerdict cvm_gof(const EventTimeline& timeline, const SrgmFit& fit, double significance) {
    if (fit.kind != SrgmKind::power_law)
        throw Error(Errc::contract, "cvm_gof applies to power-law fits");
    const auto& t = timeline.elapsed_hours;
    const int n = static_cast<int>(t.size());
    if (n != fit.n_events)
        throw Error(Errc::contract, "cvm_gof: fit was not produced from this timeline");
    const int m = fit.truncation == Truncation::time ? n : n - 1;
    if (m < 3)
        throw Error(Errc::precondition,
                    "goodness-of-fit test needs m >= 3 events, got " + std::to_string(m));

    const double beta_bar = (static_cast<double>(m) - 1.0) / m * fit.beta;
    std::vector<double> z(t.begin(), t.begin() + m);
    for (double& v : z) v /= fit.total_time;

    GofVerdict verdict;
    verdict.statistic = cvm_statistic(std::move(z), beta_bar);
    verdict.m = m;
    verdict.significance = significance;
    verdict.critical_value = cvm_critical_value(m, significance);
    verdict.passed = verdict.statistic <= verdict.critical_value;
    return verdict;
}

std::array<double, 4> calibrate_cvm_quantiles(int m, int replicates, std::uint64_t seed) {
    if (m < 2) throw Error(Errc::domain, "calibrate_cvm_quantiles: m must be >= 2");
    if (replicates < 100)
        throw Error(Errc::domain, "calibrate_cvm_quantiles: too few replicates");

    // Under H0 the transformed times z_i^beta are uniform order statistics and
    // beta-hat / beta = m / sum(-ln U); the statistic is pivotal, so the null
    // can be simulated from uniforms alone.
    SplitMix64 rng(seed);
    std::vector<double> stats(replicates);
    std::vector<double> u(m);
    for (int r = 0; r < replicates; ++r) {
        double neg_log_sum = 0.0;
        for (int i = 0; i < m; ++i) {
            double v = rng.next_double();
            while (v <= 0.0) v = rng.next_double();
            u[i] = v;
            neg_log_sum -= std::log(v);
        }
        const double beta_ratio = static_cast<double>(m) / neg_log_sum;
        const double beta_bar = (static_cast<double>(m) - 1.0) / m * beta_ratio;
        stats[r] = cvm_statistic(u, beta_bar);
    }
    std::sort(stats.begin(), stats.end());

    const auto quantile = [&](double q) {
        const double rank = q * (replicates - 1);
        const std::size_t lo = static_cast<std::size_t>(rank);
        const double frac = rank - static_cast<double>(lo);
        if (lo + 1 >= stats.size()) return stats.back();
        return stats[lo] + frac * (stats[lo + 1] - stats[lo]);
    };
    const auto sigs = cvm_supported_significances();
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < sigs.size(); ++i) out[i] = quantile(1.0 - sigs[i]);
    return out;
}

} // namespace reliafit
