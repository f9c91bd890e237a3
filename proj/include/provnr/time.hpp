#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "provnr/errors.hpp"

namespace provnr {

// All timestamps are UTC milliseconds since the Unix epoch. The interchange
// form is RFC 3339 with exactly millisecond precision and a 'Z' suffix, so
// that equal instants always serialize to equal bytes.
using Millis = std::int64_t;

inline Millis now_millis() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

namespace detail {

// Howard Hinnant's civil-days conversions, valid over the full int range.
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += (m <= 2);
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline int parse_fixed(std::string_view s, size_t pos, size_t len) {
    int v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
        if (i >= s.size() || !is_digit(s[i])) fail(Errc::SchemaViolation, "bad timestamp: " + std::string(s));
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

} // namespace detail

inline std::string format_rfc3339(Millis ms) {
    std::int64_t days = ms / 86400000;
    std::int64_t rem = ms % 86400000;
    if (rem < 0) { rem += 86400000; days -= 1; }
    std::int64_t y;
    unsigned mo, d;
    detail::civil_from_days(days, y, mo, d);
    const int h = static_cast<int>(rem / 3600000);
    const int mi = static_cast<int>(rem / 60000 % 60);
    const int se = static_cast<int>(rem / 1000 % 60);
    const int f = static_cast<int>(rem % 1000);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02d.%03dZ",
                  static_cast<long long>(y), mo, d, h, mi, se, f);
    return buf;
}

// Accepts RFC 3339 with optional fractional seconds (truncated to ms) and
// either 'Z' or a numeric offset; the result is normalized to UTC.
inline Millis parse_rfc3339(std::string_view s) {
    using namespace detail;
    if (s.size() < 20) fail(Errc::SchemaViolation, "bad timestamp: " + std::string(s));
    const int year = parse_fixed(s, 0, 4);
    const int mon = parse_fixed(s, 5, 2);
    const int day = parse_fixed(s, 8, 2);
    const int hour = parse_fixed(s, 11, 2);
    const int min = parse_fixed(s, 14, 2);
    const int sec = parse_fixed(s, 17, 2);
    if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't') || s[13] != ':' || s[16] != ':')
        fail(Errc::SchemaViolation, "bad timestamp: " + std::string(s));
    if (mon < 1 || mon > 12 || day < 1 || day > 31 || hour > 23 || min > 59 || sec > 60)
        fail(Errc::SchemaViolation, "timestamp field out of range: " + std::string(s));

    size_t pos = 19;
    int millis = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        size_t digits = 0;
        int frac = 0;
        while (pos < s.size() && is_digit(s[pos])) {
            if (digits < 3) frac = frac * 10 + (s[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) fail(Errc::SchemaViolation, "bad fractional seconds: " + std::string(s));
        while (digits < 3) { frac *= 10; ++digits; }
        millis = frac;
    }

    std::int64_t offset_ms = 0;
    if (pos >= s.size()) fail(Errc::SchemaViolation, "missing timezone: " + std::string(s));
    if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '+' ? 1 : -1;
        const int oh = parse_fixed(s, pos + 1, 2);
        if (pos + 3 >= s.size() || s[pos + 3] != ':') fail(Errc::SchemaViolation, "bad offset: " + std::string(s));
        const int om = parse_fixed(s, pos + 4, 2);
        offset_ms = sign * (oh * 3600000LL + om * 60000LL);
        pos += 6;
    } else {
        fail(Errc::SchemaViolation, "bad timezone: " + std::string(s));
    }
    if (pos != s.size()) fail(Errc::SchemaViolation, "trailing characters in timestamp: " + std::string(s));

    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(mon), static_cast<unsigned>(day));
    const std::int64_t clamped_sec = sec == 60 ? 59 : sec; // fold leap seconds
    return days * 86400000LL + hour * 3600000LL + min * 60000LL + clamped_sec * 1000LL + millis - offset_ms;
}

} // namespace provnr
