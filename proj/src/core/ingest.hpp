#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reliafit {

enum class EventFormat { csv, json_lines };
enum class Granularity { day, week, month };

const char* granularity_name(Granularity g);
std::optional<Granularity> granularity_from_name(std::string_view name);

/// One crash record.
struct FailureEvent {
    std::string app_id;
    std::string version;
    std::int64_t timestamp = 0; // UTC seconds since epoch
    std::optional<std::string> device;
    std::optional<std::string> region;
};

/// Per-version grouped time series. Counts stay as doubles so that synthetic
/// noiseless series (real-valued expected counts) share the type; series built
/// from events always carry whole numbers.
struct FailureSeries {
    std::string app_id;
    std::string version;
    Granularity granularity = Granularity::day;
    std::int64_t origin = 0;       // UTC start of the first period
    std::vector<int> period_index; // 1-based, strictly increasing
    std::vector<double> counts;
    std::vector<double> cumulative;
};

/// Strictly increasing event offsets in hours plus the observation horizon.
struct EventTimeline {
    std::vector<double> elapsed_hours;
    double observation_end_hours = 0.0;
};

/// Parse CSV (header `app_id,version,timestamp,device,region`) or JSON-lines
/// (same field names, one object per line). Events come back in file order.
std::vector<FailureEvent> parse_events(std::string_view source, EventFormat format);

/// Componentwise dotted-numeric order with lexicographic suffix fallback.
bool version_less(std::string_view lhs, std::string_view rhs);

/// Stable sort under version_less.
std::vector<std::string> sort_versions(std::vector<std::string> versions);

/// Group matching events into calendar-anchored periods (UTC midnight /
/// Monday midnight / first of month). Interior zero periods are retained.
FailureSeries build_series(const std::vector<FailureEvent>& events, std::string_view app_id,
                           std::string_view version, Granularity granularity);

/// Elapsed-hours timeline for the matching events. A leading zero offset is
/// replaced by `epsilon_hours`, and exact ties are separated by successive
/// epsilon increments so ordering is strict.
EventTimeline event_timeline(const std::vector<FailureEvent>& events, std::string_view app_id,
                             std::string_view version, std::int64_t observation_end,
                             double epsilon_hours = 1e-6);

/// Distinct (app_id, version) pairs, apps lexicographic, versions in
/// version_less order.
std::vector<std::pair<std::string, std::string>> list_app_versions(
    const std::vector<FailureEvent>& events);

/// Events rendered in the ingest CSV schema (quoted where needed).
std::string events_to_csv(const std::vector<FailureEvent>& events);

} // namespace reliafit
