#ifndef GEOSCOPE_DATES_H_
#define GEOSCOPE_DATES_H_

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace geoscope {

enum class Granularity { kYear = 0, kMonth = 1, kDay = 2 };

// A Gregorian date known to year, month or day precision. Serialized as
// YYYY, YYYY-MM or YYYY-MM-DD.
struct PartialDate {
  int year = 0;
  int month = 0;  // 0 when unknown
  int day = 0;    // 0 when unknown

  Granularity granularity() const;
  std::string iso() const;
  bool valid() const;

  static PartialDate of(int y) { return {y, 0, 0}; }
  static PartialDate of(int y, int m) { return {y, m, 0}; }
  static PartialDate of(int y, int m, int d) { return {y, m, d}; }

  // Strict ISO form only.
  static std::optional<PartialDate> parse_iso(std::string_view text);

  // Field-wise identity (granularity included).
  bool operator==(const PartialDate &) const = default;
};

// Compares two partial dates at the coarsest granularity they share:
// 1995 and 1995-03 are equivalent, 1995-02 precedes 1995-03-01.
std::weak_ordering compare_coarse(const PartialDate &a, const PartialDate &b);

bool is_leap_year(int year);
int days_in_month(int year, int month);

// Day arithmetic on a day-precision date.
PartialDate add_days(const PartialDate &date, int days);

// Month name lookup for French and English, full or common abbreviated forms,
// case and diacritic insensitive. Returns 0 when unknown.
int month_from_name(std::string_view name);

// Permissive parser: ISO forms (a trailing time part is ignored),
// "1er janvier 2017", "1 January 2017", "January 1, 2017", "janvier 2017",
// "March 2010", "03/2017" and bare four-digit years.
std::optional<PartialDate> parse_date_text(std::string_view text);

}  // namespace geoscope

#endif  // GEOSCOPE_DATES_H_
