#include "distfit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "errors.hpp"
#include "numerics.hpp"

namespace reliafit {

const char* dist_kind_name(DistKind kind) {
    switch (kind) {
        case DistKind::weibull: return "weibull";
        case DistKind::gamma: return "gamma";
        case DistKind::rayleigh: return "rayleigh";
        case DistKind::sshaped: return "sshaped";
    }
    return "?";
}

std::optional<DistKind> dist_kind_from_name(std::string_view name) {
    if (name == "weibull") return DistKind::weibull;
    if (name == "gamma") return DistKind::gamma;
    if (name == "rayleigh") return DistKind::rayleigh;
    if (name == "sshaped") return DistKind::sshaped;
    return std::nullopt;
}

int dist_free_params(DistKind kind) {
    return (kind == DistKind::rayleigh || kind == DistKind::sshaped) ? 2 : 3;
}

namespace {

bool weibull_family(DistKind kind) {
    return kind == DistKind::weibull || kind == DistKind::rayleigh;
}

void check_params(DistKind kind, DistParams p) {
    if (!(p.a > 0.0) || !(p.b > 0.0))
        throw Error(Errc::domain, std::string(dist_kind_name(kind)) +
                                      ": parameters must be positive (a=" + std::to_string(p.a) +
                                      ", b=" + std::to_string(p.b) + ")");
    if (kind == DistKind::rayleigh && p.b != 2.0)
        throw Error(Errc::contract, "rayleigh requires shape b = 2, got " + std::to_string(p.b));
    if (kind == DistKind::sshaped && p.a != 2.0)
        throw Error(Errc::contract, "sshaped requires shape a = 2, got " + std::to_string(p.a));
}

} // namespace

double dist_pdf(DistKind kind, double t, DistParams params) {
    check_params(kind, params);
    if (!(t > 0.0))
        throw Error(Errc::domain, "dist_pdf: t must be positive, got " + std::to_string(t));
    if (weibull_family(kind)) {
        const double z = t / params.a;
        return (params.b / params.a) * std::pow(z, params.b - 1.0) *
               std::exp(-std::pow(z, params.b));
    }
    const double a = params.a, b = params.b;
    return std::exp((a - 1.0) * std::log(t) - t / b - a * std::log(b) - ln_gamma(a));
}

double dist_cdf(DistKind kind, double t, DistParams params) {
    check_params(kind, params);
    if (!(t >= 0.0))
        throw Error(Errc::domain, "dist_cdf: t must be nonnegative, got " + std::to_string(t));
    if (t == 0.0) return 0.0;
    if (weibull_family(kind)) return -std::expm1(-std::pow(t / params.a, params.b));
    return reg_inc_gamma_p(params.a, t / params.b);
}

double mode_time(DistKind kind, DistParams params) {
    check_params(kind, params);
    if (weibull_family(kind)) {
        if (params.b <= 1.0) return 0.0;
        return params.a * std::pow((params.b - 1.0) / params.b, 1.0 / params.b);
    }
    if (params.a <= 1.0) return 0.0;
    return params.b * (params.a - 1.0);
}

double proportion_at_mode(DistKind kind, DistParams params) {
    const double tm = mode_time(kind, params);
    if (tm == 0.0) return 0.0;
    return dist_cdf(kind, tm, params);
}

namespace {

// a, b, C layout used by the cumulative fit.
constexpr int kIdxA = 0;
constexpr int kIdxB = 1;
constexpr int kIdxC = 2;

NlsProblem make_problem(const FailureSeries& series, DistKind kind,
                        std::vector<double> init) {
    NlsProblem prob;
    const bool wbl = weibull_family(kind);
    prob.model = [wbl](std::span<const double> p, double t) {
        const double a = p[kIdxA], b = p[kIdxB], c = p[kIdxC];
        if (wbl) return c * -std::expm1(-std::pow(t / a, b));
        return c * reg_inc_gamma_p(a, t / b);
    };
    prob.t_values.assign(series.period_index.begin(), series.period_index.end());
    prob.y_values = series.cumulative;
    prob.initial_params = std::move(init);
    prob.lower_bounds = {1e-8, 1e-8, 1e-8};
    prob.upper_bounds = {1e9, 1e3, 1e12};
    prob.fixed_mask = {false, false, false};
    if (kind == DistKind::rayleigh) prob.fixed_mask[kIdxB] = true; // Weibull shape = 2
    if (kind == DistKind::sshaped) prob.fixed_mask[kIdxA] = true;  // Gamma shape = 2
    return prob;
}

std::vector<double> default_init(const FailureSeries& series, DistKind kind) {
    // Place the initial density mode near the observed burst of failures.
    const double c0 = 1.2 * series.cumulative.back();
    int burst = 0;
    for (std::size_t i = 1; i < series.counts.size(); ++i)
        if (series.counts[i] > series.counts[burst]) burst = static_cast<int>(i);
    double t_star = series.period_index[burst];
    bool flat = true;
    for (std::size_t i = 1; i < series.counts.size(); ++i)
        if (series.counts[i] != series.counts[0]) flat = false;
    if (flat) t_star = series.period_index[series.period_index.size() / 2]; // median fallback
    t_star = std::max(t_star, 0.5);

    if (weibull_family(kind)) return {t_star, 2.0, c0};
    return {2.0, t_star / 2.0, c0};
}

ParamEstimate make_estimate(double value, const std::vector<ConfidenceInterval>& cis,
                            int param_index) {
    for (const auto& ci : cis)
        if (ci.param_index == param_index) return {value, ci.low, ci.high};
    return {value, value, value}; // frozen parameter: zero-width interval
}

} // namespace

FittedDistModel fit_cumulative(const FailureSeries& series, DistKind kind) {
    const int p_free = dist_free_params(kind);
    const int n = static_cast<int>(series.period_index.size());
    if (n < p_free + 1)
        throw Error(Errc::precondition,
                    std::string(dist_kind_name(kind)) + " fit needs at least " +
                        std::to_string(p_free + 1) + " periods, series has " + std::to_string(n));
    bool any_nonzero = false;
    for (double c : series.counts)
        if (c > 0.0) any_nonzero = true;
    if (!any_nonzero)
        throw Error(Errc::degenerate, "degenerate input: series has all-zero counts");

    // The free-shape fits are additionally started from the constrained
    // optimum so the nested-model SSE ordering holds.
    std::vector<std::vector<double>> starts;
    starts.push_back(default_init(series, kind));
    if (kind == DistKind::weibull || kind == DistKind::gamma) {
        const DistKind constrained =
            kind == DistKind::weibull ? DistKind::rayleigh : DistKind::sshaped;
        try {
            const FittedDistModel base = fit_cumulative(series, constrained);
            starts.push_back({base.a.value, base.b.value, base.c_total.value});
        } catch (const Error&) {
            // constrained start unavailable; the default start remains
        }
    }

    NlsOptions options;
    NlsResult best;
    bool have_best = false;
    std::string last_error;
    for (auto& init : starts) {
        try {
            NlsResult r = nls_fit(make_problem(series, kind, std::move(init)), options);
            if (!have_best || (r.converged && !best.converged) ||
                (r.converged == best.converged && r.sse < best.sse)) {
                best = std::move(r);
                have_best = true;
            }
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    if (!have_best)
        throw Error(Errc::degenerate,
                    std::string(dist_kind_name(kind)) + " fit failed: " + last_error);
    if (!best.converged) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "best so far a=%.6g b=%.6g C=%.6g sse=%.6g after %d iterations",
                      best.params[kIdxA], best.params[kIdxB], best.params[kIdxC], best.sse,
                      best.iterations);
        throw Error(Errc::nonconvergence,
                    std::string(dist_kind_name(kind)) + " fit did not converge: " + buf);
    }

    const auto cis = confidence_intervals(best, 0.95);
    FittedDistModel model;
    model.kind = kind;
    model.a = make_estimate(best.params[kIdxA], cis, kIdxA);
    model.b = make_estimate(best.params[kIdxB], cis, kIdxB);
    model.c_total = make_estimate(best.params[kIdxC], cis, kIdxC);
    model.sse = best.sse;
    model.converged = best.converged;
    model.iterations = best.iterations;

    const DistParams params{best.params[kIdxA], best.params[kIdxB]};
    model.t_max = mode_time(kind, params);
    model.proportion_at_tmax = model.t_max == 0.0 ? 0.0 : dist_cdf(kind, model.t_max, params);

    std::vector<double> predicted(n);
    model.fitted_curve.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double t = series.period_index[i];
        predicted[i] = best.params[kIdxC] * dist_cdf(kind, t, params);
        model.fitted_curve.push_back({t, predicted[i]});
    }
    model.metrics.n = n;
    model.metrics.p_free = p_free;
    model.metrics.rmse = rmse(series.cumulative, predicted, p_free);
    model.metrics.adj_r_square = adj_r_square(series.cumulative, predicted, p_free);
    return model;
}

std::string format_proportion_percent(double proportion) {
    const long long half_points = std::llround(proportion * 200.0);
    char buf[32];
    if (half_points % 2 == 0)
        std::snprintf(buf, sizeof(buf), "%lld%%", half_points / 2);
    else
        std::snprintf(buf, sizeof(buf), "%.1f%%", static_cast<double>(half_points) / 2.0);
    return buf;
}

std::string format_param_2dp(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

} // namespace reliafit
