#include "geoscope/dates.h"

#include <array>
#include <charconv>
#include <cstdio>
#include <regex>

#include "geoscope/text.h"

namespace geoscope {

namespace {

int to_int(std::string_view s) {
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

struct MonthName {
  const char *name;
  int month;
};

// Folded forms.
constexpr std::array<MonthName, 46> kMonthNames = {{
    {"janvier", 1},   {"fevrier", 2},  {"mars", 3},      {"avril", 4},     {"mai", 5},
    {"juin", 6},      {"juillet", 7},  {"aout", 8},      {"septembre", 9}, {"octobre", 10},
    {"novembre", 11}, {"decembre", 12}, {"january", 1},  {"february", 2},  {"march", 3},
    {"april", 4},     {"may", 5},      {"june", 6},      {"july", 7},      {"august", 8},
    {"september", 9}, {"october", 10}, {"november", 11}, {"december", 12}, {"jan", 1},
    {"feb", 2},       {"mar", 3},      {"apr", 4},       {"jun", 6},       {"jul", 7},
    {"aug", 8},       {"sep", 9},      {"sept", 9},      {"oct", 10},      {"nov", 11},
    {"dec", 12},      {"janv", 1},     {"fevr", 2},      {"avr", 4},       {"juil", 7},
    {"jan.", 1},      {"feb.", 2},     {"aug.", 8},      {"sept.", 9},     {"oct.", 10},
    {"dec.", 12},
}};

}  // namespace

Granularity PartialDate::granularity() const {
  if (month == 0) return Granularity::kYear;
  if (day == 0) return Granularity::kMonth;
  return Granularity::kDay;
}

std::string PartialDate::iso() const {
  char buf[16];
  switch (granularity()) {
    case Granularity::kYear:
      std::snprintf(buf, sizeof buf, "%04d", year);
      break;
    case Granularity::kMonth:
      std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
      break;
    case Granularity::kDay:
      std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
      break;
  }
  return buf;
}

bool PartialDate::valid() const {
  if (year < 1 || year > 9999) return false;
  if (month == 0) return day == 0;
  if (month < 1 || month > 12) return false;
  if (day == 0) return true;
  return day >= 1 && day <= days_in_month(year, month);
}

std::optional<PartialDate> PartialDate::parse_iso(std::string_view text) {
  static const std::regex kIso(R"((\d{4})(?:-(\d{2})(?:-(\d{2}))?)?)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(text.begin(), text.end(), m, kIso)) return std::nullopt;
  PartialDate d{to_int(std::string_view(m[1].first, m[1].length())),
                m[2].matched ? to_int(std::string_view(m[2].first, m[2].length())) : 0,
                m[3].matched ? to_int(std::string_view(m[3].first, m[3].length())) : 0};
  if (!d.valid()) return std::nullopt;
  return d;
}

std::weak_ordering compare_coarse(const PartialDate &a, const PartialDate &b) {
  if (auto c = a.year <=> b.year; c != 0) return c;
  if (a.month == 0 || b.month == 0) return std::weak_ordering::equivalent;
  if (auto c = a.month <=> b.month; c != 0) return c;
  if (a.day == 0 || b.day == 0) return std::weak_ordering::equivalent;
  return a.day <=> b.day;
}

bool is_leap_year(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

int days_in_month(int year, int month) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[month - 1];
}

PartialDate add_days(const PartialDate &date, int days) {
  PartialDate d = date;
  while (days > 0) {
    if (++d.day > days_in_month(d.year, d.month)) {
      d.day = 1;
      if (++d.month > 12) {
        d.month = 1;
        ++d.year;
      }
    }
    --days;
  }
  while (days < 0) {
    if (--d.day < 1) {
      if (--d.month < 1) {
        d.month = 12;
        --d.year;
      }
      d.day = days_in_month(d.year, d.month);
    }
    ++days;
  }
  return d;
}

int month_from_name(std::string_view name) {
  std::string folded = fold(trim(name));
  for (const auto &entry : kMonthNames) {
    if (folded == entry.name) return entry.month;
  }
  return 0;
}

std::optional<PartialDate> parse_date_text(std::string_view raw) {
  std::string text = collapse_whitespace(raw);
  // Datetime: keep the date part.
  if (auto t = text.find('T'); t == 10 && text.size() > 10) text.resize(10);
  if (auto iso = PartialDate::parse_iso(text)) return iso;

  std::string folded = fold(text);
  std::smatch m;
  auto finish = [](PartialDate d) -> std::optional<PartialDate> {
    if (!d.valid()) return std::nullopt;
    return d;
  };
  // 1er janvier 2017 / 1 January 2017
  static const std::regex kDayMonthYear(R"((\d{1,2})(?:er|st|nd|rd|th)? ([a-z.]+),? (\d{4}))");
  if (std::regex_match(folded, m, kDayMonthYear)) {
    int month = month_from_name(m[2].str());
    if (month == 0) return std::nullopt;
    return finish({std::stoi(m[3]), month, std::stoi(m[1])});
  }
  // January 1, 2017
  static const std::regex kMonthDayYear(R"(([a-z.]+) (\d{1,2})(?:st|nd|rd|th)?,? (\d{4}))");
  if (std::regex_match(folded, m, kMonthDayYear)) {
    int month = month_from_name(m[1].str());
    if (month == 0) return std::nullopt;
    return finish({std::stoi(m[3]), month, std::stoi(m[2])});
  }
  // janvier 2017 / March 2010
  static const std::regex kMonthYear(R"(([a-z.]+),? (\d{4}))");
  if (std::regex_match(folded, m, kMonthYear)) {
    int month = month_from_name(m[1].str());
    if (month == 0) return std::nullopt;
    return finish({std::stoi(m[2]), month, 0});
  }
  // 03/2017 and 01/03/2017 (day first)
  static const std::regex kNumericMonthYear(R"((\d{1,2})/(\d{4}))");
  if (std::regex_match(folded, m, kNumericMonthYear)) {
    return finish({std::stoi(m[2]), std::stoi(m[1]), 0});
  }
  static const std::regex kNumericDate(R"((\d{1,2})/(\d{1,2})/(\d{4}))");
  if (std::regex_match(folded, m, kNumericDate)) {
    return finish({std::stoi(m[3]), std::stoi(m[2]), std::stoi(m[1])});
  }
  return std::nullopt;
}

}  // namespace geoscope
