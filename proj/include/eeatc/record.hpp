// record.hpp — one timestamped raw observation and its field vocabulary.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eeatc/error.hpp"

namespace eeatc {

// Canonical per-record fields besides the timestamp. Order here defines the
// canonical CSV column order (after timestamp).
enum class Field { s, t, rh, y, lat, lon, speed };

inline constexpr std::array<Field, 7> kAllFields = {
    Field::s, Field::t, Field::rh, Field::y, Field::lat, Field::lon, Field::speed};

// Measurement fields subject to robust outlier screening.
inline constexpr std::array<Field, 4> kMeasurementFields = {Field::s, Field::t,
                                                            Field::rh, Field::y};

inline std::string_view field_name(Field f) {
    switch (f) {
    case Field::s: return "s";
    case Field::t: return "t";
    case Field::rh: return "rh";
    case Field::y: return "y";
    case Field::lat: return "lat";
    case Field::lon: return "lon";
    case Field::speed: return "speed";
    }
    return "";
}

inline std::optional<Field> field_from_name(std::string_view name) {
    for (Field f : kAllFields)
        if (field_name(f) == name)
            return f;
    return std::nullopt;
}

// One observation: sensor reading s (µg/m³), temperature t (°C), relative
// humidity rh (%), optional reference reading y (µg/m³), optional GPS fix
// and speed (km/h). timestamp is seconds since epoch, UTC, strictly positive.
struct SampleRecord {
    double timestamp = 0.0;
    std::optional<double> s;
    std::optional<double> t;
    std::optional<double> rh;
    std::optional<double> y;
    std::optional<double> lat;
    std::optional<double> lon;
    std::optional<double> speed;

    std::optional<double>& field(Field f) {
        switch (f) {
        case Field::s: return s;
        case Field::t: return t;
        case Field::rh: return rh;
        case Field::y: return y;
        case Field::lat: return lat;
        case Field::lon: return lon;
        case Field::speed: return speed;
        }
        return s;
    }
    const std::optional<double>& field(Field f) const {
        return const_cast<SampleRecord*>(this)->field(f);
    }
};

using Records = std::vector<SampleRecord>;

inline void require_time_sorted(const Records& records) {
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].timestamp < records[i - 1].timestamp)
            throw NonMonotonicTimestamps("timestamps decrease at row " + std::to_string(i));
}

} // namespace eeatc
