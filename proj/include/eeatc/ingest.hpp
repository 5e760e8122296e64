// ingest.hpp — raw sensor log -> clean, minute-bucketed record stream.
//
// The cleaning order used by the command-line tool is: parse, sort by time,
// bucket-average, remove low-motion segments, screen outliers. Each stage is
// exposed separately so callers can compose their own order.
//
// Timestamps are UTC epoch seconds internally. The parser accepts either a
// numeric epoch value or an ISO-8601 instant (date, 'T' or ' ' separator,
// optional fractional seconds, optional 'Z').

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eeatc/error.hpp"
#include "eeatc/format.hpp"
#include "eeatc/record.hpp"

namespace eeatc {

// Source CSV column name for each canonical field; empty disables a field.
// The defaults are the canonical layout this toolkit writes.
struct ColumnMapping {
    std::string timestamp = "timestamp";
    std::string s = "s";
    std::string t = "t";
    std::string rh = "rh";
    std::string y = "y";
    std::string lat = "lat";
    std::string lon = "lon";
    std::string speed = "speed";

    const std::string& name(Field f) const {
        switch (f) {
        case Field::s: return s;
        case Field::t: return t;
        case Field::rh: return rh;
        case Field::y: return y;
        case Field::lat: return lat;
        case Field::lon: return lon;
        default: return speed;
        }
    }
};

namespace detail {

inline std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        std::string_view cell = line.substr(pos, std::min(comma, line.size()) - pos);
        while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t'))
            cell.remove_prefix(1);
        while (!cell.empty() &&
               (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
            cell.remove_suffix(1);
        cells.push_back(cell);
        if (comma == std::string_view::npos)
            return cells;
        pos = comma + 1;
    }
}

// Days since 1970-01-01 for a proleptic Gregorian civil date.
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline std::optional<double> parse_iso8601(std::string_view text) {
    // YYYY-MM-DD[T ]HH:MM:SS[.frac][Z]
    if (text.size() >= 1 && text.back() == 'Z')
        text.remove_suffix(1);
    if (text.size() < 19 || text[4] != '-' || text[7] != '-' ||
        (text[10] != 'T' && text[10] != ' ') || text[13] != ':' || text[16] != ':')
        return std::nullopt;
    auto num = [&](std::size_t pos, std::size_t len) -> std::optional<std::int64_t> {
        std::int64_t v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (text[i] < '0' || text[i] > '9')
                return std::nullopt;
            v = v * 10 + (text[i] - '0');
        }
        return v;
    };
    const auto year = num(0, 4), month = num(5, 2), day = num(8, 2);
    const auto hour = num(11, 2), minute = num(14, 2), second = num(17, 2);
    if (!year || !month || !day || !hour || !minute || !second)
        return std::nullopt;
    if (*month < 1 || *month > 12 || *day < 1 || *day > 31 || *hour > 23 ||
        *minute > 59 || *second > 60)
        return std::nullopt;
    double frac = 0.0;
    if (text.size() > 19) {
        if (text[19] != '.')
            return std::nullopt;
        const auto parsed = parse_double(text.substr(19));
        if (!parsed)
            return std::nullopt;
        frac = *parsed;
    }
    const std::int64_t days =
        days_from_civil(*year, static_cast<unsigned>(*month), static_cast<unsigned>(*day));
    return static_cast<double>(days * 86400 + *hour * 3600 + *minute * 60 + *second) +
           frac;
}

inline std::optional<double> parse_timestamp(std::string_view text) {
    if (auto v = parse_double(text))
        return v;
    return parse_iso8601(text);
}

} // namespace detail

// Parses a delimited log into records. The header row is mandatory; the
// mapped timestamp and sensor columns must exist. Cells that are empty or
// unparseable leave the field missing; a row without a usable timestamp is
// skipped entirely.
inline Records parse_csv(std::string_view text, const ColumnMapping& mapping = {}) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (!line.empty())
            lines.push_back(line);
        pos = nl + 1;
    }
    if (lines.empty())
        throw EmptyFile("no content");

    const auto header = detail::split_line(lines[0]);
    auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
        if (name.empty())
            return std::nullopt;
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        return std::nullopt;
    };
    const auto ts_col = find_col(mapping.timestamp);
    if (!ts_col) {
        if (!header.empty() && parse_double(header[0]))
            throw MissingHeader("first row looks like data, not a header");
        throw MissingMandatoryColumn("no column named '" + mapping.timestamp + "'");
    }
    if (!find_col(mapping.s))
        throw MissingMandatoryColumn("no column named '" + mapping.s + "'");

    std::optional<std::size_t> cols[kAllFields.size()];
    for (std::size_t f = 0; f < kAllFields.size(); ++f)
        cols[f] = find_col(mapping.name(kAllFields[f]));

    Records out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto cells = detail::split_line(lines[li]);
        auto cell = [&](std::optional<std::size_t> c) -> std::string_view {
            return c && *c < cells.size() ? cells[*c] : std::string_view{};
        };
        const auto ts = detail::parse_timestamp(cell(ts_col));
        if (!ts)
            continue;
        SampleRecord r;
        r.timestamp = *ts;
        for (std::size_t f = 0; f < kAllFields.size(); ++f)
            r.field(kAllFields[f]) = parse_double(cell(cols[f]));
        out.push_back(r);
    }
    if (out.empty())
        throw EmptyFile("no data rows");
    return out;
}

inline void sort_by_time(Records& records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const SampleRecord& a, const SampleRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
}

// Averages records into fixed-width time buckets aligned to the epoch grid
// (bucket label = floor(ts / width) * width). Each field is averaged over
// the records where it is present; a field present nowhere stays missing.
inline Records bucket_average(const Records& records, double width_seconds = 60.0) {
    if (records.empty())
        throw EmptyInput("bucket_average: no records");
    if (!(width_seconds > 0.0))
        throw BadConfig("bucket_average: width must be positive");
    require_time_sorted(records);

    Records out;
    std::size_t i = 0;
    while (i < records.size()) {
        const double start =
            std::floor(records[i].timestamp / width_seconds) * width_seconds;
        const double end = start + width_seconds;
        double sums[kAllFields.size()] = {};
        std::size_t counts[kAllFields.size()] = {};
        for (; i < records.size() && records[i].timestamp < end; ++i) {
            for (std::size_t f = 0; f < kAllFields.size(); ++f) {
                if (const auto& v = records[i].field(kAllFields[f])) {
                    sums[f] += *v;
                    ++counts[f];
                }
            }
        }
        SampleRecord r;
        r.timestamp = start;
        for (std::size_t f = 0; f < kAllFields.size(); ++f)
            if (counts[f] > 0)
                r.field(kAllFields[f]) = sums[f] / static_cast<double>(counts[f]);
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Outlier screening: a physical-range pass, then a robust z-score pass with
// statistics computed once over the range survivors.

struct RangeLimit {
    Field field = Field::s;
    double lo = 0.0;
    double hi = 0.0;
};

struct OutlierConfig {
    // physically admissible ranges; a present value outside drops the row
    std::vector<RangeLimit> ranges = {
        {Field::s, 0.0, 1000.0},
        {Field::y, 0.0, 1000.0},
        {Field::t, -40.0, 60.0},
        {Field::rh, 0.0, 100.0},
    };
    double robust_z_max = 4.0;  // <= 0 disables the robust pass
};

struct OutlierReport {
    std::size_t n_input = 0;
    std::size_t n_range = 0;
    std::size_t n_robust = 0;
    std::size_t n_output = 0;
};

namespace detail {

inline double median_inplace(std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lo = *std::max_element(
            v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (lo + m);
    }
    return m;
}

// Robust spread estimate: scaled MAD, falling back to the scaled mean
// absolute deviation when the MAD degenerates to zero. Returns 0 when both
// do, which disables screening for that field.
inline double robust_scale(const std::vector<double>& values, double median) {
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        dev[i] = std::abs(values[i] - median);
    const double mad = median_inplace(dev);
    if (mad > 0.0)
        return 1.4826 * mad;
    double mean_ad = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        mean_ad += std::abs(values[i] - median);
    mean_ad /= static_cast<double>(values.size());
    return mean_ad > 0.0 ? 1.253314 * mean_ad : 0.0;
}

} // namespace detail

// Drops rows whose measurement values are physically impossible or wildly
// inconsistent with the bulk of the series. Location and speed fields are
// never screened here.
inline std::pair<Records, OutlierReport> filter_outliers(const Records& records,
                                                         const OutlierConfig& cfg = {}) {
    if (records.empty())
        throw EmptyInput("filter_outliers: no records");
    OutlierReport report;
    report.n_input = records.size();

    Records kept;
    kept.reserve(records.size());
    for (const auto& r : records) {
        bool ok = true;
        for (const auto& lim : cfg.ranges) {
            if (const auto& v = r.field(lim.field); v && (*v < lim.lo || *v > lim.hi)) {
                ok = false;
                break;
            }
        }
        if (ok)
            kept.push_back(r);
        else
            ++report.n_range;
    }

    if (cfg.robust_z_max > 0.0 && !kept.empty()) {
        double medians[kMeasurementFields.size()];
        double scales[kMeasurementFields.size()];
        for (std::size_t f = 0; f < kMeasurementFields.size(); ++f) {
            std::vector<double> values;
            values.reserve(kept.size());
            for (const auto& r : kept)
                if (const auto& v = r.field(kMeasurementFields[f]))
                    values.push_back(*v);
            if (values.empty()) {
                scales[f] = 0.0;
                medians[f] = 0.0;
                continue;
            }
            std::vector<double> tmp = values;
            medians[f] = detail::median_inplace(tmp);
            scales[f] = detail::robust_scale(values, medians[f]);
        }
        Records survivors;
        survivors.reserve(kept.size());
        for (const auto& r : kept) {
            bool ok = true;
            for (std::size_t f = 0; f < kMeasurementFields.size() && ok; ++f) {
                if (scales[f] <= 0.0)
                    continue;
                if (const auto& v = r.field(kMeasurementFields[f]))
                    if (std::abs(*v - medians[f]) / scales[f] > cfg.robust_z_max)
                        ok = false;
            }
            if (ok)
                survivors.push_back(r);
            else
                ++report.n_robust;
        }
        kept = std::move(survivors);
    }

    report.n_output = kept.size();
    if (kept.empty())
        throw EmptyAfterDrop("filter_outliers: every record was dropped");
    return {std::move(kept), report};
}

// ---------------------------------------------------------------------------
// Low-motion removal for mobile deployments.

inline double haversine_m(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kEarthRadiusM = 6371000.0;
    constexpr double kDegToRad = 0.017453292519943295;
    const double dlat = (lat2 - lat1) * kDegToRad;
    const double dlon = (lon2 - lon1) * kDegToRad;
    const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1 * kDegToRad) * std::cos(lat2 * kDegToRad) *
                         std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

struct MotionConfig {
    double speed_threshold_kmh = 1.0;
    std::size_t min_run = 1;  // shorter low-speed runs are left alone
    bool stationary_deployment = false;
};

struct MotionReport {
    std::size_t n_input = 0;
    std::size_t n_dropped = 0;
    std::size_t n_output = 0;
    bool speed_derived = false;  // true when GPS fixes supplied the speeds
};

// Drops runs of min_run or more consecutive low-speed records, plus the
// single record that follows each run (the restart transient). Speeds come
// from the speed field when present, otherwise from consecutive GPS fixes
// (the first record inherits the first interval's speed). Records whose
// speed cannot be determined are treated as moving.
inline std::pair<Records, MotionReport> remove_stationary_segments(
    const Records& records, const MotionConfig& cfg = {}) {
    if (records.empty())
        throw EmptyInput("remove_stationary_segments: no records");
    MotionReport report;
    report.n_input = records.size();
    if (cfg.stationary_deployment) {
        report.n_output = records.size();
        return {records, report};
    }
    require_time_sorted(records);

    const std::size_t n = records.size();
    std::vector<std::optional<double>> speed(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (records[i].speed) {
            speed[i] = records[i].speed;
            any = true;
        }
    }
    bool derived = false;
    for (std::size_t i = 1; i < n; ++i) {
        if (speed[i])
            continue;
        const auto& a = records[i - 1];
        const auto& b = records[i];
        const double dt = b.timestamp - a.timestamp;
        if (a.lat && a.lon && b.lat && b.lon && dt > 0.0) {
            const double meters = haversine_m(*a.lat, *a.lon, *b.lat, *b.lon);
            speed[i] = meters / dt * 3.6;
            derived = true;
        }
    }
    if (!speed[0] && n > 1 && speed[1]) {
        speed[0] = speed[1];
        derived = true;
    }
    report.speed_derived = derived;
    if (!any && !derived)
        throw NoMotionData("no speed field and no usable GPS fixes");

    std::vector<bool> drop(n, false);
    std::size_t i = 0;
    while (i < n) {
        if (!(speed[i] && *speed[i] < cfg.speed_threshold_kmh)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && speed[j] && *speed[j] < cfg.speed_threshold_kmh)
            ++j;
        if (j - i >= cfg.min_run) {
            for (std::size_t k = i; k < j; ++k)
                drop[k] = true;
            if (j < n)
                drop[j] = true;  // restart transient
        }
        i = j + 1;
    }

    Records kept;
    kept.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (drop[k])
            ++report.n_dropped;
        else
            kept.push_back(records[k]);
    }
    report.n_output = kept.size();
    if (kept.empty())
        throw EmptyAfterDrop("remove_stationary_segments: every record was dropped");
    return {std::move(kept), report};
}

// ---------------------------------------------------------------------------
// Canonical CSV: fixed header, epoch-second timestamps, empty cells for
// missing fields, shortest round-trip number formatting.

inline constexpr std::string_view kCanonicalHeader = "timestamp,s,t,rh,y,lat,lon,speed";

inline std::string to_canonical_csv(const Records& records) {
    std::string out(kCanonicalHeader);
    out += '\n';
    for (const auto& r : records) {
        out += format_double(r.timestamp);
        for (Field f : kAllFields) {
            out += ',';
            if (const auto& v = r.field(f))
                out += format_double(*v);
        }
        out += '\n';
    }
    return out;
}

inline Records from_canonical_csv(std::string_view text) {
    return parse_csv(text, ColumnMapping{});
}

} // namespace eeatc
