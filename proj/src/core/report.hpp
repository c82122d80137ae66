#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "distfit.hpp"
#include "ingest.hpp"
#include "srgm.hpp"

namespace reliafit {

/// Round to `digits` significant decimal digits (report floats use 6).
double round_sig(double value, int digits = 6);

/// FNV-1a 64-bit content hash, 16 lowercase hex characters.
std::string fnv1a64_hex(std::string_view bytes);

struct FitJobOptions {
    std::optional<std::string> app;     // restrict to one application
    std::optional<std::string> version; // restrict to one version; empty = all
    Granularity granularity = Granularity::week;
    std::vector<DistKind> models = {DistKind::weibull, DistKind::gamma, DistKind::rayleigh,
                                    DistKind::sshaped};
    bool want_svg = false;
    int threads = 1;
};

struct NamedArtifact {
    std::string name; // file name relative to the output directory
    std::string content;
};

struct RunOutput {
    std::string report_json; // stable, key-sorted document
    std::vector<NamedArtifact> artifacts;
    std::vector<std::string> warnings;
    bool any_nonconverged = false;
};

/// Full fit pipeline: parse -> group -> fit every requested model per
/// version -> rank -> render report + curve artifacts. Model failures become
/// warnings, not errors; only unusable input throws.
RunOutput run_fit_pipeline(std::string_view input_bytes, EventFormat format,
                           const FitJobOptions& options);

struct SrgmJobOptions {
    std::string app;
    std::string version;
    Granularity granularity = Granularity::week; // grouping for the Musa fits
    SrgmKind model = SrgmKind::power_law;
    bool gof = false;
    double significance = 0.05;
    // power-law horizon; set -> time-truncated, unset -> failure-truncated
    std::optional<std::int64_t> observation_end;
};

struct SrgmRunOutput {
    SrgmFit fit;
    std::string report_json;
    std::string text_summary; // printable parameter/verdict block
    bool gof_rejected = false;
};

SrgmRunOutput run_srgm_pipeline(std::string_view input_bytes, EventFormat format,
                                const SrgmJobOptions& options);

/// Human-readable input summary used by `reliafit validate`.
std::string summarize_events(const std::vector<FailureEvent>& events);

} // namespace reliafit
