#include "mailproc/timeutil.hpp"

#include <array>
#include <cctype>
#include <cstdio>

namespace mailproc {

namespace {

using namespace std::chrono;

struct Cursor {
    std::string_view s;
    std::size_t pos = 0;

    bool done() const { return pos >= s.size(); }
    char peek() const { return done() ? '\0' : s[pos]; }

    bool digits(int count, int& out) {
        if (pos + count > s.size()) return false;
        int v = 0;
        for (int i = 0; i < count; ++i) {
            char c = s[pos + i];
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
            v = v * 10 + (c - '0');
        }
        out = v;
        pos += count;
        return true;
    }

    // One or more digits, at most max_count.
    bool number(int max_count, int& out) {
        int v = 0, n = 0;
        while (n < max_count && !done() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            v = v * 10 + (s[pos] - '0');
            ++pos;
            ++n;
        }
        out = v;
        return n > 0;
    }

    bool eat(char c) {
        if (peek() != c) return false;
        ++pos;
        return true;
    }

    void skip_spaces() {
        while (!done() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
};

std::optional<Timestamp> assemble(int y, int mo, int d, int h, int mi, int sec, int offset_minutes) {
    if (mo < 1 || mo > 12 || h > 23 || mi > 59 || sec > 60) return std::nullopt;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    Timestamp ts = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} - minutes{offset_minutes};
    if (!in_supported_range(ts)) return std::nullopt;
    return ts;
}

// Parses `Z`, `+HH:MM`, `+HHMM`, `+HH`; nothing at all means UTC.
bool parse_zone(Cursor& c, int& offset_minutes) {
    offset_minutes = 0;
    c.skip_spaces();
    if (c.done()) return true;
    if (c.eat('Z') || c.eat('z')) return true;
    if (c.s.substr(c.pos) == "UTC" || c.s.substr(c.pos) == "GMT") {
        c.pos = c.s.size();
        return true;
    }
    char sign = c.peek();
    if (sign != '+' && sign != '-') return false;
    ++c.pos;
    int hh = 0, mm = 0;
    if (!c.digits(2, hh)) return false;
    if (c.eat(':')) {
        if (!c.digits(2, mm)) return false;
    } else if (!c.done()) {
        if (!c.digits(2, mm)) return false;
    }
    if (hh > 23 || mm > 59) return false;
    offset_minutes = (sign == '-' ? -1 : 1) * (hh * 60 + mm);
    return true;
}

std::string fmt(const char* pattern, Timestamp ts) {
    auto day_point = floor<days>(ts);
    year_month_day ymd{day_point};
    hh_mm_ss hms{ts - day_point};
    std::array<char, 48> buf{};
    std::snprintf(buf.data(), buf.size(), pattern, static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf.data();
}

}  // namespace

bool in_supported_range(Timestamp ts) {
    static const Timestamp lo = sys_days{year{1970} / 1 / 1};
    static const Timestamp hi = sys_days{year{2100} / 1 / 1};
    return ts >= lo && ts < hi;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

    Cursor c{text};
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (!c.digits(4, y) || !c.eat('-') || !c.digits(2, mo) || !c.eat('-') || !c.digits(2, d))
        return std::nullopt;
    if (!c.eat(' ') && !c.eat('T')) return std::nullopt;
    if (!c.digits(2, h) || !c.eat(':') || !c.digits(2, mi)) return std::nullopt;
    if (c.eat(':')) {
        if (!c.digits(2, sec)) return std::nullopt;
        if (c.eat('.')) {
            int frac = 0;
            if (!c.number(9, frac)) return std::nullopt;
        }
    }
    int offset = 0;
    if (!parse_zone(c, offset) || !c.done()) return std::nullopt;
    return assemble(y, mo, d, h, mi, sec, offset);
}

std::optional<Timestamp> parse_rfc2822_date(std::string_view text) {
    static constexpr std::array<std::string_view, 12> kMonths{
        "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
    Cursor c{text};
    c.skip_spaces();
    // Optional day-of-week.
    std::size_t comma = text.find(',');
    if (comma != std::string_view::npos && comma < 10) {
        c.pos = comma + 1;
        c.skip_spaces();
    }
    int d = 0, y = 0, h = 0, mi = 0, sec = 0;
    if (!c.number(2, d)) return std::nullopt;
    c.skip_spaces();
    if (c.pos + 3 > text.size()) return std::nullopt;
    std::string mon;
    for (int i = 0; i < 3; ++i) mon += static_cast<char>(std::tolower(static_cast<unsigned char>(text[c.pos + i])));
    int mo = 0;
    for (std::size_t i = 0; i < kMonths.size(); ++i)
        if (kMonths[i] == mon) mo = static_cast<int>(i) + 1;
    if (mo == 0) return std::nullopt;
    c.pos += 3;
    c.skip_spaces();
    if (!c.number(4, y)) return std::nullopt;
    if (y < 100) y += (y < 50 ? 2000 : 1900);
    c.skip_spaces();
    if (!c.digits(2, h) || !c.eat(':') || !c.digits(2, mi)) return std::nullopt;
    if (c.eat(':') && !c.digits(2, sec)) return std::nullopt;
    c.skip_spaces();

    int offset = 0;
    if (!c.done()) {
        char sign = c.peek();
        if (sign == '+' || sign == '-') {
            ++c.pos;
            int hhmm = 0;
            if (!c.digits(4, hhmm)) return std::nullopt;
            offset = (sign == '-' ? -1 : 1) * ((hhmm / 100) * 60 + hhmm % 100);
        } else {
            std::string zone;
            while (!c.done() && std::isalpha(static_cast<unsigned char>(c.peek()))) {
                zone += static_cast<char>(std::toupper(static_cast<unsigned char>(c.peek())));
                ++c.pos;
            }
            if (zone == "EST") offset = -5 * 60;
            else if (zone == "EDT") offset = -4 * 60;
            else if (zone == "CST") offset = -6 * 60;
            else if (zone == "CDT") offset = -5 * 60;
            else if (zone == "MST") offset = -7 * 60;
            else if (zone == "MDT") offset = -6 * 60;
            else if (zone == "PST") offset = -8 * 60;
            else if (zone == "PDT") offset = -7 * 60;
            // UT, GMT, Z and unknown military zones are treated as UTC.
        }
    }
    return assemble(y, mo, d, h, mi, sec, offset);
}

std::string format_timestamp(Timestamp ts) { return fmt("%04d-%02u-%02u %02d:%02d:%02d", ts); }

std::string format_iso8601(Timestamp ts) { return fmt("%04d-%02u-%02uT%02d:%02d:%02dZ", ts); }

std::string format_xes_date(Timestamp ts) { return fmt("%04d-%02u-%02uT%02d:%02d:%02d.000+00:00", ts); }

}  // namespace mailproc
