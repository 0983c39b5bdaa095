#pragma once

#include <chrono>
#include <iosfwd>
#include <string>
#include <vector>

#include "epifilter/observation.hpp"

namespace epifilter {

// A validated set of WHO-style cumulative reports at irregular intervals.
// Day indices count from the first record's date (the epoch).
struct ReportDataset {
  std::chrono::year_month_day epoch{};
  std::vector<Observation> records;
  long horizon = 0;  // day index of the last record
};

// Strict ISO-8601 calendar date ("YYYY-MM-DD").
std::chrono::year_month_day parse_date(const std::string& text);
std::string format_date(const std::chrono::year_month_day& date);
long days_between(const std::chrono::year_month_day& from,
                  const std::chrono::year_month_day& to);

// Reads the documented layout: header `date,cum_cases,cum_deaths`, ISO dates,
// integer counts.  Rejects duplicate or out-of-order dates, decreasing
// cumulatives, deaths exceeding cases, and malformed cells; error messages
// carry the 1-based line number.
ReportDataset parse_report_csv(const std::string& path);
ReportDataset parse_report_stream(std::istream& in, const std::string& origin);

// Writes the same layout; parse(write(x)) == x on valid datasets.
void write_report_csv(const ReportDataset& dataset, const std::string& path);
void write_report_stream(const ReportDataset& dataset, std::ostream& out);

struct CalendarEntry {
  long day_index = 0;
  long gap_from_previous = 0;  // 0 for the first entry, >= 1 afterwards
};

// One entry per report day; prefix-summing the gaps recovers the day indices.
std::vector<CalendarEntry> build_calendar(const ReportDataset& dataset);

}  // namespace epifilter
