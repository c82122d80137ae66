#include "report.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "time_utils.hpp"
#include "version.hpp"

namespace reliafit {

double round_sig(double value, int digits) {
    if (value == 0.0) return 0.0;
    if (!std::isfinite(value)) return value;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
    return std::strtod(buf, nullptr);
}

std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

namespace {

std::string sanitize_component(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
        out += ok ? c : '_';
    }
    return out;
}

std::string format_number(double v, const char* fmt = "%.6g") {
    char buf[48];
    if (v == std::floor(v) && std::abs(v) < 1e15)
        std::snprintf(buf, sizeof(buf), "%.0f", v);
    else
        std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

nlohmann::json estimate_json(const ParamEstimate& e) {
    return nlohmann::json{{"value", round_sig(e.value)},
                          {"ci_low", round_sig(e.ci_low)},
                          {"ci_high", round_sig(e.ci_high)}};
}

nlohmann::json dist_fit_json(const FittedDistModel& m) {
    nlohmann::json j;
    j["model"] = dist_kind_name(m.kind);
    j["a"] = estimate_json(m.a);
    j["b"] = estimate_json(m.b);
    j["c_total"] = estimate_json(m.c_total);
    j["t_max"] = round_sig(m.t_max);
    j["proportion_at_tmax"] = round_sig(m.proportion_at_tmax);
    j["proportion_display"] = format_proportion_percent(m.proportion_at_tmax);
    j["rmse"] = round_sig(m.metrics.rmse);
    j["adj_r_square"] = round_sig(m.metrics.adj_r_square);
    j["sse"] = round_sig(m.sse);
    j["n"] = m.metrics.n;
    j["p_free"] = m.metrics.p_free;
    return j;
}

nlohmann::json srgm_fit_json(const SrgmFit& f) {
    nlohmann::json j;
    j["model"] = srgm_kind_name(f.kind);
    j["method"] = f.method == EstimationMethod::mle ? "mle" : "nls";
    j["converged"] = f.converged;
    switch (f.kind) {
        case SrgmKind::power_law:
            j["lambda"] = round_sig(f.lambda);
            j["beta"] = round_sig(f.beta);
            j["truncation"] = f.truncation == Truncation::time ? "time" : "failure";
            j["n_events"] = f.n_events;
            break;
        case SrgmKind::musa_basic:
            j["lambda0"] = round_sig(f.lambda0);
            j["nu0"] = round_sig(f.nu0);
            break;
        case SrgmKind::musa_okumoto:
            j["lambda0"] = round_sig(f.lambda0);
            j["theta"] = round_sig(f.theta);
            break;
    }
    if (f.gof) {
        j["gof"] = nlohmann::json{{"statistic", round_sig(f.gof->statistic)},
                                  {"critical_value", round_sig(f.gof->critical_value)},
                                  {"m", f.gof->m},
                                  {"significance", round_sig(f.gof->significance)},
                                  {"passed", f.gof->passed}};
    }
    return j;
}

std::string curve_csv(const FailureSeries& series, const FittedDistModel& model) {
    std::string out = "t,observed_cum,fitted_cum\n";
    for (std::size_t i = 0; i < model.fitted_curve.size(); ++i) {
        out += format_number(model.fitted_curve[i].t);
        out += ',';
        out += format_number(series.cumulative[i], "%.17g"); // exact echo of the input
        out += ',';
        out += format_number(model.fitted_curve[i].fitted_cum);
        out += '\n';
    }
    return out;
}

// Minimal static plot of observed points and fitted curves.
std::string curves_svg(const FailureSeries& series, const std::vector<FittedDistModel>& fits) {
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    const double width = 640, height = 400, ml = 60, mr = 20, mt = 36, mb = 44;
    double y_max = 1.0;
    for (double v : series.cumulative) y_max = std::max(y_max, v);
    for (const auto& f : fits)
        for (const auto& p : f.fitted_curve) y_max = std::max(y_max, p.fitted_cum);
    const double t_max = static_cast<double>(series.period_index.back());
    const auto sx = [&](double t) { return ml + (t / t_max) * (width - ml - mr); };
    const auto sy = [&](double y) { return height - mb - (y / y_max) * (height - mt - mb); };
    char buf[256];
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
           "viewBox=\"0 0 640 400\">\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.0f\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
                  "%s %s — cumulative failures (%s periods)</text>\n",
                  ml, series.app_id.c_str(), series.version.c_str(),
                  granularity_name(series.granularity));
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  ml, height - mb, width - mr, height - mb);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  ml, mt, ml, height - mb);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
                  "text-anchor=\"middle\">t</text>\n",
                  (ml + width - mr) / 2, height - 8);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\">"
                  "%s</text>\n",
                  6.0, mt - 6, format_number(y_max).c_str());
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  width - mr, height - mb + 16, format_number(t_max).c_str());
    svg += buf;
    int color = 0;
    double legend_y = mt + 6;
    for (const auto& f : fits) {
        std::string points;
        for (const auto& p : f.fitted_curve) {
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", sx(p.t), sy(p.fitted_cum));
            points += buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" "
                      "points=\"%s\"/>\n",
                      kColors[color % 4], points.c_str());
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
                      "fill=\"%s\">%s</text>\n",
                      width - mr - 110, legend_y, kColors[color % 4], dist_kind_name(f.kind));
        svg += buf;
        legend_y += 14;
        ++color;
    }
    for (std::size_t i = 0; i < series.cumulative.size(); ++i) {
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"black\"/>\n",
                      sx(series.period_index[i]), sy(series.cumulative[i]));
        svg += buf;
    }
    svg += "</svg>\n";
    return svg;
}

struct VersionJobResult {
    nlohmann::json entry;
    std::vector<NamedArtifact> artifacts;
    std::vector<std::string> warnings;
    bool nonconverged = false;
};

VersionJobResult run_version_job(const std::vector<FailureEvent>& events, const std::string& app,
                                 const std::string& version, const FitJobOptions& options,
                                 const std::string& file_prefix) {
    VersionJobResult out;
    const FailureSeries series = build_series(events, app, version, options.granularity);

    std::vector<FittedDistModel> fits;
    for (DistKind kind : options.models) {
        const std::string where =
            "app=" + app + " version=" + version + " model=" + dist_kind_name(kind);
        try {
            fits.push_back(fit_cumulative(series, kind));
        } catch (const Error& e) {
            switch (e.code()) {
                case Errc::precondition:
                    out.warnings.push_back("fit-skipped " + where + ": " + e.what());
                    break;
                case Errc::nonconvergence:
                    out.warnings.push_back("fit-nonconverged " + where + ": " + e.what());
                    out.nonconverged = true;
                    break;
                default:
                    out.warnings.push_back("fit-degenerate " + where + ": " + e.what());
                    break;
            }
        }
    }

    nlohmann::json entry;
    entry["app"] = app;
    entry["version"] = version;
    entry["granularity"] = granularity_name(series.granularity);
    entry["n_periods"] = static_cast<int>(series.period_index.size());
    entry["dist_fits"] = nlohmann::json::array();
    entry["srgm_fits"] = nlohmann::json::array();
    for (const auto& f : fits) entry["dist_fits"].push_back(dist_fit_json(f));

    entry["ranking"] = nlohmann::json::array();
    if (!fits.empty()) {
        std::vector<RankEntry> rank_input;
        rank_input.reserve(fits.size());
        for (const auto& f : fits)
            rank_input.push_back({f.metrics.rmse, f.metrics.adj_r_square, f.metrics.n});
        for (int idx : rank_models(rank_input))
            entry["ranking"].push_back(dist_kind_name(fits[idx].kind));
    }
    out.entry = std::move(entry);

    const std::string stem = file_prefix + sanitize_component(version);
    for (const auto& f : fits)
        out.artifacts.push_back(
            {stem + "_" + dist_kind_name(f.kind) + ".csv", curve_csv(series, f)});
    if (options.want_svg && !fits.empty())
        out.artifacts.push_back({stem + "_curves.svg", curves_svg(series, fits)});
    return out;
}

} // namespace

RunOutput run_fit_pipeline(std::string_view input_bytes, EventFormat format,
                           const FitJobOptions& options) {
    const auto events = parse_events(input_bytes, format);

    std::vector<std::pair<std::string, std::string>> jobs;
    for (auto& [app, version] : list_app_versions(events)) {
        if (options.app && app != *options.app) continue;
        if (options.version && version != *options.version) continue;
        jobs.emplace_back(app, version);
    }
    if (jobs.empty()) {
        std::string what = "empty selection: no events match";
        if (options.app) what += " app \"" + *options.app + "\"";
        if (options.version) what += " version \"" + *options.version + "\"";
        throw Error(Errc::precondition, what);
    }
    bool multi_app = false;
    for (const auto& j : jobs)
        if (j.first != jobs.front().first) multi_app = true;

    std::vector<VersionJobResult> results(jobs.size());
    const int thread_count =
        std::clamp(options.threads, 1, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
    if (thread_count <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const std::string prefix = multi_app ? sanitize_component(jobs[i].first) + "_" : "";
            results[i] = run_version_job(events, jobs[i].first, jobs[i].second, options, prefix);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                const std::string prefix =
                    multi_app ? sanitize_component(jobs[i].first) + "_" : "";
                results[i] =
                    run_version_job(events, jobs[i].first, jobs[i].second, options, prefix);
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < thread_count; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    RunOutput out;
    nlohmann::json report;
    report["tool_version"] = "reliafit " RELIAFIT_VERSION_STRING;
    report["input_digest"] = fnv1a64_hex(input_bytes);
    report["per_version"] = nlohmann::json::array();
    nlohmann::json warnings = nlohmann::json::array();
    for (auto& r : results) {
        report["per_version"].push_back(std::move(r.entry));
        for (auto& a : r.artifacts) out.artifacts.push_back(std::move(a));
        for (auto& w : r.warnings) {
            warnings.push_back(w);
            out.warnings.push_back(std::move(w));
        }
        out.any_nonconverged = out.any_nonconverged || r.nonconverged;
    }
    report["warnings"] = std::move(warnings);
    out.report_json = report.dump(2) + "\n";
    return out;
}

RunOutput run_srgm_report(std::string_view input_bytes, const SrgmFit& fit,
                          const SrgmJobOptions& options, int n_periods);

SrgmRunOutput run_srgm_pipeline(std::string_view input_bytes, EventFormat format,
                                const SrgmJobOptions& options) {
    const auto events = parse_events(input_bytes, format);
    SrgmRunOutput out;
    int n_periods = 0;

    if (options.model == SrgmKind::power_law) {
        std::int64_t latest = 0;
        bool any = false;
        for (const auto& e : events) {
            if (e.app_id == options.app && e.version == options.version) {
                latest = any ? std::max(latest, e.timestamp) : e.timestamp;
                any = true;
            }
        }
        if (!any)
            throw Error(Errc::precondition, "empty selection: no events for app \"" +
                                                options.app + "\" version \"" + options.version +
                                                "\"");
        const Truncation trunc =
            options.observation_end ? Truncation::time : Truncation::failure;
        const std::int64_t end = options.observation_end.value_or(latest);
        const EventTimeline timeline = event_timeline(events, options.app, options.version, end);
        out.fit = fit_power_law_mle(timeline, trunc);
        if (options.gof) {
            out.fit.gof = cvm_gof(timeline, out.fit, options.significance);
            out.gof_rejected = !out.fit.gof->passed;
        }
    } else {
        const FailureSeries series =
            build_series(events, options.app, options.version, options.granularity);
        n_periods = static_cast<int>(series.period_index.size());
        out.fit = fit_curve_srgm(series, options.model);
        if (options.gof)
            throw Error(Errc::contract,
                        "goodness-of-fit verdict is defined for the power_law model");
    }

    // printable block
    char buf[256];
    std::string text = std::string(srgm_kind_name(out.fit.kind)) + " fit for " + options.app +
                       " " + options.version + "\n";
    switch (out.fit.kind) {
        case SrgmKind::power_law:
            std::snprintf(buf, sizeof(buf),
                          "  lambda = %.6g\n  beta   = %.6g\n  events = %d (%s-truncated, T = "
                          "%.6g h)\n",
                          out.fit.lambda, out.fit.beta, out.fit.n_events,
                          out.fit.truncation == Truncation::time ? "time" : "failure",
                          out.fit.total_time);
            break;
        case SrgmKind::musa_basic:
            std::snprintf(buf, sizeof(buf),
                          "  lambda0 = %.6g\n  nu0     = %.6g\n  converged = %s\n",
                          out.fit.lambda0, out.fit.nu0, out.fit.converged ? "yes" : "no");
            break;
        case SrgmKind::musa_okumoto:
            std::snprintf(buf, sizeof(buf),
                          "  lambda0 = %.6g\n  theta   = %.6g\n  converged = %s\n",
                          out.fit.lambda0, out.fit.theta, out.fit.converged ? "yes" : "no");
            break;
    }
    text += buf;
    if (out.fit.gof) {
        std::snprintf(buf, sizeof(buf),
                      "  gof: C2_M = %.6g, critical(%g, m=%d) = %.6g -> %s\n",
                      out.fit.gof->statistic, out.fit.gof->significance, out.fit.gof->m,
                      out.fit.gof->critical_value, out.fit.gof->passed ? "PASS" : "FAIL");
        text += buf;
    }
    out.text_summary = std::move(text);

    nlohmann::json entry;
    entry["app"] = options.app;
    entry["version"] = options.version;
    entry["granularity"] = granularity_name(options.granularity);
    entry["n_periods"] = n_periods;
    entry["dist_fits"] = nlohmann::json::array();
    entry["srgm_fits"] = nlohmann::json::array({srgm_fit_json(out.fit)});
    entry["ranking"] = nlohmann::json::array();
    nlohmann::json report;
    report["tool_version"] = "reliafit " RELIAFIT_VERSION_STRING;
    report["input_digest"] = fnv1a64_hex(input_bytes);
    report["per_version"] = nlohmann::json::array({std::move(entry)});
    report["warnings"] = nlohmann::json::array();
    out.report_json = report.dump(2) + "\n";
    return out;
}

std::string summarize_events(const std::vector<FailureEvent>& events) {
    std::int64_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (i == 0) {
            lo = hi = events[i].timestamp;
        } else {
            lo = std::min(lo, events[i].timestamp);
            hi = std::max(hi, events[i].timestamp);
        }
    }
    std::string text = std::to_string(events.size()) + " events, " +
                       format_iso8601_utc(lo) + " .. " + format_iso8601_utc(hi) + "\n";
    for (const auto& [app, version] : list_app_versions(events)) {
        std::size_t count = 0;
        for (const auto& e : events)
            if (e.app_id == app && e.version == version) ++count;
        text += "  " + app + " " + version + ": " + std::to_string(count) + " events\n";
    }
    return text;
}

} // namespace reliafit
