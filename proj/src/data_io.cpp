#include "epifilter/data_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "epifilter/errors.hpp"

namespace epifilter {

namespace {

constexpr const char* kHeader = "date,cum_cases,cum_deaths";

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& what) {
  throw ValidationError(origin + ":" + std::to_string(line) + ": " + what);
}

long long parse_count(const std::string& origin, std::size_t line, const std::string& cell,
                      const char* name) {
  if (cell.empty()) fail(origin, line, std::string("empty ") + name + " (missing values are rejected)");
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    fail(origin, line, std::string("malformed ") + name + " '" + cell + "'");
  }
  if (value < 0) fail(origin, line, std::string(name) + " must be nonnegative");
  return value;
}

}  // namespace

std::chrono::year_month_day parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ValidationError("malformed date '" + text + "' (expected YYYY-MM-DD)");
  }
  const auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc{} && ptr == text.data() + pos + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) {
    throw ValidationError("malformed date '" + text + "' (expected YYYY-MM-DD)");
  }
  const std::chrono::year_month_day date{std::chrono::year{y}, std::chrono::month{m},
                                         std::chrono::day{d}};
  if (!date.ok()) throw ValidationError("invalid calendar date '" + text + "'");
  return date;
}

std::string format_date(const std::chrono::year_month_day& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

long days_between(const std::chrono::year_month_day& from,
                  const std::chrono::year_month_day& to) {
  return (std::chrono::sys_days(to) - std::chrono::sys_days(from)).count();
}

ReportDataset parse_report_stream(std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t line_no = 0;

  auto next_line = [&](std::string& out) {
    if (!std::getline(in, out)) return false;
    ++line_no;
    if (!out.empty() && out.back() == '\r') out.pop_back();
    return true;
  };

  if (!next_line(line)) throw ValidationError(origin + ": empty file");
  if (line != kHeader) {
    fail(origin, line_no, std::string("expected header '") + kHeader + "', got '" + line + "'");
  }

  ReportDataset dataset;
  while (next_line(line)) {
    if (line.empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;  // tolerate one trailing newline
      fail(origin, line_no, "blank line");
    }
    std::string cells[3];
    std::size_t start = 0;
    int field = 0;
    for (std::size_t k = 0; k <= line.size(); ++k) {
      if (k == line.size() || line[k] == ',') {
        if (field > 2) fail(origin, line_no, "too many columns");
        cells[field++] = line.substr(start, k - start);
        start = k + 1;
      }
    }
    if (field != 3) fail(origin, line_no, "expected 3 columns");

    Observation obs;
    try {
      obs.date = parse_date(cells[0]);
    } catch (const ValidationError& err) {
      fail(origin, line_no, err.what());
    }
    obs.cum_cases = parse_count(origin, line_no, cells[1], "cum_cases");
    obs.cum_deaths = parse_count(origin, line_no, cells[2], "cum_deaths");
    if (obs.cum_deaths > obs.cum_cases) {
      fail(origin, line_no, "cum_deaths exceeds cum_cases");
    }

    if (dataset.records.empty()) {
      dataset.epoch = obs.date;
      obs.day_index = 0;
    } else {
      const Observation& prev = dataset.records.back();
      obs.day_index = days_between(dataset.epoch, obs.date);
      if (obs.day_index == prev.day_index) fail(origin, line_no, "duplicate date");
      if (obs.day_index < prev.day_index) fail(origin, line_no, "dates out of order");
      if (obs.cum_cases < prev.cum_cases) {
        fail(origin, line_no, "cum_cases decreased (cumulative counts must be non-decreasing)");
      }
      if (obs.cum_deaths < prev.cum_deaths) {
        fail(origin, line_no, "cum_deaths decreased (cumulative counts must be non-decreasing)");
      }
    }
    dataset.records.push_back(obs);
  }

  if (dataset.records.empty()) throw ValidationError(origin + ": no records");
  dataset.horizon = dataset.records.back().day_index;
  return dataset;
}

ReportDataset parse_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open report file '" + path + "'");
  return parse_report_stream(in, path);
}

void write_report_stream(const ReportDataset& dataset, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& obs : dataset.records) {
    out << format_date(obs.date) << ',' << obs.cum_cases << ',' << obs.cum_deaths << '\n';
  }
}

void write_report_csv(const ReportDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  write_report_stream(dataset, out);
  if (!out.good()) throw ValidationError("failed writing '" + path + "'");
}

std::vector<CalendarEntry> build_calendar(const ReportDataset& dataset) {
  std::vector<CalendarEntry> calendar;
  calendar.reserve(dataset.records.size());
  long prev = 0;
  for (std::size_t k = 0; k < dataset.records.size(); ++k) {
    const long day = dataset.records[k].day_index;
    calendar.push_back({day, k == 0 ? 0 : day - prev});
    prev = day;
  }
  return calendar;
}

}  // namespace epifilter
