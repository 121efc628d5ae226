#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "kpix/errors.hpp"
#include "kpix/text.hpp"

namespace kpix::fiscal {

/// A fiscal period. quarter 1..4 is a regular quarter; quarter 0 is the
/// sentinel for a full-fiscal-year mention ("fiscal year 2026").
struct Period {
  int fiscal_year = 0;
  int quarter = 0;

  auto operator<=>(const Period&) const = default;

  std::string str() const {
    if (quarter == 0) return "FY" + std::to_string(fiscal_year);
    return "FY" + std::to_string(fiscal_year) + " Q" + std::to_string(quarter);
  }
};

inline std::optional<int> month_from_name(std::string_view name) {
  static const std::map<std::string, int, std::less<>> kMonths = {
      {"jan", 1},  {"january", 1},   {"feb", 2},  {"february", 2},
      {"mar", 3},  {"march", 3},     {"apr", 4},  {"april", 4},
      {"may", 5},  {"jun", 6},       {"june", 6}, {"jul", 7},
      {"july", 7}, {"aug", 8},       {"august", 8}, {"sep", 9},
      {"sept", 9}, {"september", 9}, {"oct", 10}, {"october", 10},
      {"nov", 11}, {"november", 11}, {"dec", 12}, {"december", 12},
  };
  std::string key = to_lower(name);
  while (!key.empty() && key.back() == '.') key.pop_back();
  auto it = kMonths.find(key);
  if (it == kMonths.end()) return std::nullopt;
  return it->second;
}

/// Per-ticker fiscal calendars, stored as the month (1..12) in which each
/// company's fiscal year ends. Quarter boundaries derive from it: Q1 starts
/// the month after the year end. A ticker not in the table defaults to a
/// December year end. The fiscal year is named for the calendar year that
/// contains the fiscal year end, so Apple's October 2023 sits in FY2024 Q1.
class FiscalCalendar {
public:
  FiscalCalendar() = default;
  explicit FiscalCalendar(std::map<std::string, int> fy_end_months)
      : fy_end_month_(std::move(fy_end_months)) {
    for (const auto& [ticker, month] : fy_end_month_) {
      if (month < 1 || month > 12) {
        throw ConfigError("fiscal year end month out of range for " + ticker);
      }
    }
  }

  static FiscalCalendar defaults() {
    return FiscalCalendar(std::map<std::string, int>{
        {"AAPL", 9},  {"HD", 1},   {"MSFT", 6}, {"PG", 6},   {"AMZN", 12},
        {"BA", 12},   {"BAC", 12}, {"CAT", 12}, {"CVX", 12}, {"DOW", 12},
        {"GOOGL", 12}, {"JNJ", 12}, {"JPM", 12}, {"KO", 12},  {"NEE", 12},
        {"PFE", 12},  {"PLD", 12}, {"XOM", 12},
    });
  }

  int fy_end_month(const std::string& ticker) const {
    auto it = fy_end_month_.find(ticker);
    return it == fy_end_month_.end() ? 12 : it->second;
  }

  /// Fiscal period containing the given calendar month.
  Period period_of(const std::string& ticker, int calendar_year, int month) const {
    if (month < 1 || month > 12) throw InputError("month out of range");
    int end = fy_end_month(ticker);
    int q1_start = end % 12 + 1;
    int offset = (month - q1_start + 12) % 12;
    Period p;
    p.quarter = offset / 3 + 1;
    p.fiscal_year = month > end ? calendar_year + 1 : calendar_year;
    return p;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [ticker, month] : fy_end_month_) j[ticker] = month;
    return j;
  }

  static FiscalCalendar from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("fiscal calendar must be an object");
    std::map<std::string, int> months;
    for (const auto& [ticker, month] : j.items()) {
      if (!month.is_number_integer()) {
        throw ConfigError("fiscal calendar month for " + ticker + " must be an integer");
      }
      months[ticker] = month.get<int>();
    }
    return FiscalCalendar(std::move(months));
  }

private:
  std::map<std::string, int> fy_end_month_;
};

}  // namespace kpix::fiscal
