#include "ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "time_utils.hpp"

namespace reliafit {

const char* granularity_name(Granularity g) {
    switch (g) {
        case Granularity::day: return "day";
        case Granularity::week: return "week";
        case Granularity::month: return "month";
    }
    return "?";
}

std::optional<Granularity> granularity_from_name(std::string_view name) {
    if (name == "day") return Granularity::day;
    if (name == "week") return Granularity::week;
    if (name == "month") return Granularity::month;
    return std::nullopt;
}

namespace {

// RFC-4180-ish field splitter: double quotes wrap fields, "" escapes a quote.
// Device identifiers routinely contain commas, so this is not optional.
std::vector<std::string> split_csv_row(std::string_view line, long line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted)
        throw ParseError("line " + std::to_string(line_no) + ": unterminated quoted field",
                         line_no, "row");
    fields.push_back(std::move(cur));
    return fields;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

FailureEvent make_event(std::string app, std::string version, const std::string& ts,
                        std::optional<std::string> device, std::optional<std::string> region,
                        long line_no) {
    if (app.empty())
        throw ParseError("line " + std::to_string(line_no) + ": empty app_id", line_no, "app_id");
    if (version.empty())
        throw ParseError("line " + std::to_string(line_no) + ": empty version", line_no,
                         "version");
    std::int64_t epoch = 0;
    if (!parse_iso8601_utc(ts, epoch))
        throw ParseError("line " + std::to_string(line_no) + ": invalid timestamp \"" + ts +
                             "\" (expected YYYY-MM-DDTHH:MM:SSZ)",
                         line_no, "timestamp");
    FailureEvent ev;
    ev.app_id = std::move(app);
    ev.version = std::move(version);
    ev.timestamp = epoch;
    ev.device = std::move(device);
    ev.region = std::move(region);
    return ev;
}

std::vector<FailureEvent> parse_csv(std::string_view source) {
    std::vector<FailureEvent> events;
    long line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos <= source.size()) {
        std::size_t nl = source.find('\n', pos);
        std::string_view line =
            source.substr(pos, nl == std::string_view::npos ? source.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? source.size() + 1 : nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "app_id,version,timestamp,device,region")
                throw ParseError("line 1: expected header "
                                 "\"app_id,version,timestamp,device,region\"",
                                 1, "header");
            header_seen = true;
            continue;
        }
        auto fields = split_csv_row(line, line_no);
        if (fields.size() < 3 || fields.size() > 5)
            throw ParseError("line " + std::to_string(line_no) + ": expected 3-5 fields, got " +
                                 std::to_string(fields.size()),
                             line_no, "row");
        fields.resize(5); // trailing empties allowed
        auto opt = [](std::string& s) -> std::optional<std::string> {
            if (s.empty()) return std::nullopt;
            return std::move(s);
        };
        events.push_back(make_event(std::move(fields[0]), std::move(fields[1]), fields[2],
                                    opt(fields[3]), opt(fields[4]), line_no));
    }
    if (!header_seen) throw Error(Errc::empty_input, "no events: input is empty");
    if (events.empty()) throw Error(Errc::empty_input, "no events: input has a header only");
    return events;
}

std::vector<FailureEvent> parse_json_lines(std::string_view source) {
    std::vector<FailureEvent> events;
    long line_no = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
        std::size_t nl = source.find('\n', pos);
        std::string_view line =
            source.substr(pos, nl == std::string_view::npos ? source.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? source.size() + 1 : nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() +
                                 ")",
                             line_no, "row");
        }
        if (!obj.is_object())
            throw ParseError("line " + std::to_string(line_no) + ": expected a JSON object",
                             line_no, "row");
        auto str_field = [&](const char* name, bool required) -> std::optional<std::string> {
            if (!obj.contains(name) || obj[name].is_null()) {
                if (required)
                    throw ParseError("line " + std::to_string(line_no) + ": missing field \"" +
                                         name + "\"",
                                     line_no, name);
                return std::nullopt;
            }
            if (!obj[name].is_string())
                throw ParseError("line " + std::to_string(line_no) + ": field \"" + name +
                                     "\" must be a string",
                                 line_no, name);
            return obj[name].get<std::string>();
        };
        auto app = str_field("app_id", true);
        auto version = str_field("version", true);
        auto ts = str_field("timestamp", true);
        events.push_back(make_event(std::move(*app), std::move(*version), *ts,
                                    str_field("device", false), str_field("region", false),
                                    line_no));
    }
    if (events.empty()) throw Error(Errc::empty_input, "no events: input is empty");
    return events;
}

} // namespace

std::vector<FailureEvent> parse_events(std::string_view source, EventFormat format) {
    return format == EventFormat::csv ? parse_csv(source) : parse_json_lines(source);
}

namespace {

// One dotted component, split into an optional numeric prefix and a suffix.
struct VersionComponent {
    bool has_number = false;
    std::string_view digits; // leading zeros stripped
    std::string_view suffix;
};

VersionComponent parse_component(std::string_view text) {
    VersionComponent c;
    std::size_t i = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i > 0) {
        c.has_number = true;
        std::string_view digits = text.substr(0, i);
        std::size_t z = 0;
        while (z + 1 < digits.size() && digits[z] == '0') ++z;
        c.digits = digits.substr(z);
    }
    c.suffix = text.substr(i);
    return c;
}

// -1 / 0 / +1, numbers compared as stripped digit strings (no overflow).
int compare_component(std::string_view a, std::string_view b) {
    const VersionComponent ca = parse_component(a);
    const VersionComponent cb = parse_component(b);
    if (ca.has_number != cb.has_number) return ca.has_number ? -1 : 1;
    if (ca.has_number) {
        if (ca.digits.size() != cb.digits.size())
            return ca.digits.size() < cb.digits.size() ? -1 : 1;
        if (const int c = ca.digits.compare(cb.digits)) return c < 0 ? -1 : 1;
    }
    if (const int c = ca.suffix.compare(cb.suffix)) return c < 0 ? -1 : 1;
    return 0;
}

} // namespace

bool version_less(std::string_view lhs, std::string_view rhs) {
    std::size_t i = 0, j = 0;
    while (true) {
        const bool lend = i > lhs.size(); // past the final component
        const bool rend = j > rhs.size();
        if (lend || rend) return lend && !rend; // missing components sort first
        std::size_t li = lhs.find('.', i);
        std::size_t rj = rhs.find('.', j);
        if (li == std::string_view::npos) li = lhs.size();
        if (rj == std::string_view::npos) rj = rhs.size();
        const int c = compare_component(lhs.substr(i, li - i), rhs.substr(j, rj - j));
        if (c != 0) return c < 0;
        i = li + 1;
        j = rj + 1;
    }
}

std::vector<std::string> sort_versions(std::vector<std::string> versions) {
    std::stable_sort(versions.begin(), versions.end(),
                     [](const std::string& a, const std::string& b) { return version_less(a, b); });
    return versions;
}

namespace {

std::vector<std::int64_t> matching_timestamps(const std::vector<FailureEvent>& events,
                                              std::string_view app_id, std::string_view version) {
    std::vector<std::int64_t> ts;
    for (const auto& e : events)
        if (e.app_id == app_id && e.version == version) ts.push_back(e.timestamp);
    return ts;
}

// Period anchoring. Day/week periods have fixed length; month periods are
// calendar months, so indices come from civil-date arithmetic.
std::int64_t anchor_origin(std::int64_t first_ts, Granularity g) {
    std::int64_t days = first_ts / 86400;
    if (first_ts < 0 && first_ts % 86400 != 0) --days;
    switch (g) {
        case Granularity::day: return days * 86400;
        case Granularity::week: return (days - weekday_from_days(days)) * 86400;
        case Granularity::month: {
            int y, m, d;
            civil_from_days(days, y, m, d);
            return days_from_civil(y, m, 1) * 86400;
        }
    }
    return 0;
}

int period_of(std::int64_t ts, std::int64_t origin, Granularity g) {
    switch (g) {
        case Granularity::day: return static_cast<int>((ts - origin) / 86400) + 1;
        case Granularity::week: return static_cast<int>((ts - origin) / (7 * 86400)) + 1;
        case Granularity::month: {
            std::int64_t days = ts / 86400;
            if (ts < 0 && ts % 86400 != 0) --days;
            int y, m, d, y0, m0, d0;
            civil_from_days(days, y, m, d);
            civil_from_days(origin / 86400, y0, m0, d0);
            return (y - y0) * 12 + (m - m0) + 1;
        }
    }
    return 0;
}

} // namespace

FailureSeries build_series(const std::vector<FailureEvent>& events, std::string_view app_id,
                           std::string_view version, Granularity granularity) {
    auto ts = matching_timestamps(events, app_id, version);
    if (ts.empty())
        throw Error(Errc::precondition, "empty selection: no events for app \"" +
                                            std::string(app_id) + "\" version \"" +
                                            std::string(version) + "\"");
    std::sort(ts.begin(), ts.end());
    FailureSeries series;
    series.app_id = std::string(app_id);
    series.version = std::string(version);
    series.granularity = granularity;
    series.origin = anchor_origin(ts.front(), granularity);

    const int last_period = period_of(ts.back(), series.origin, granularity);
    series.period_index.resize(last_period);
    series.counts.assign(last_period, 0.0);
    for (int i = 0; i < last_period; ++i) series.period_index[i] = i + 1;
    for (std::int64_t t : ts) series.counts[period_of(t, series.origin, granularity) - 1] += 1.0;

    series.cumulative.resize(last_period);
    double run = 0.0;
    for (int i = 0; i < last_period; ++i) {
        run += series.counts[i];
        series.cumulative[i] = run;
    }
    return series;
}

EventTimeline event_timeline(const std::vector<FailureEvent>& events, std::string_view app_id,
                             std::string_view version, std::int64_t observation_end,
                             double epsilon_hours) {
    auto ts = matching_timestamps(events, app_id, version);
    if (ts.empty())
        throw Error(Errc::precondition, "empty selection: no events for app \"" +
                                            std::string(app_id) + "\" version \"" +
                                            std::string(version) + "\"");
    std::sort(ts.begin(), ts.end());
    if (observation_end < ts.back())
        throw Error(Errc::contract,
                    "observation end " + format_iso8601_utc(observation_end) +
                        " precedes the last event " + format_iso8601_utc(ts.back()));

    EventTimeline tl;
    tl.elapsed_hours.reserve(ts.size());
    const std::int64_t t0 = ts.front();
    double prev = 0.0;
    for (std::int64_t t : ts) {
        double h = static_cast<double>(t - t0) / 3600.0;
        if (h <= prev || h == 0.0) h = prev + epsilon_hours;
        tl.elapsed_hours.push_back(h);
        prev = h;
    }
    tl.observation_end_hours =
        std::max(static_cast<double>(observation_end - t0) / 3600.0, tl.elapsed_hours.back());
    return tl;
}

std::vector<std::pair<std::string, std::string>> list_app_versions(
    const std::vector<FailureEvent>& events) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : events) seen.emplace(e.app_id, e.version);
    std::vector<std::pair<std::string, std::string>> pairs(seen.begin(), seen.end());
    std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return version_less(a.second, b.second);
    });
    return pairs;
}

std::string events_to_csv(const std::vector<FailureEvent>& events) {
    std::string out = "app_id,version,timestamp,device,region\n";
    for (const auto& e : events) {
        out += csv_quote(e.app_id);
        out += ',';
        out += csv_quote(e.version);
        out += ',';
        out += format_iso8601_utc(e.timestamp);
        out += ',';
        if (e.device) out += csv_quote(*e.device);
        out += ',';
        if (e.region) out += csv_quote(*e.region);
        out += '\n';
    }
    return out;
}

} // namespace reliafit
