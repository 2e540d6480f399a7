#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "sqvdlm/series.hpp"

namespace sqvdlm::io {

struct TrendsParseOptions {
    /// Value substituted for Google Trends' "<1" marker.
    double below_threshold_value = 0.5;
};

struct WeeklyTrends {
    std::string label;
    WeeklySeries series;
};

/// `date,value` with `YYYY-MM` dates and empty fields for missing values.
MonthlySeries read_monthly_csv(std::istream& in, const std::string& source = "<monthly>");
void write_monthly_csv(std::ostream& out, const MonthlySeries& series);

/// Optional `#` preamble lines, then `Week,<label>`, then `YYYY-MM-DD,value` rows.
WeeklyTrends read_weekly_trends_csv(std::istream& in, const std::string& source = "<weekly>",
                                    const TrendsParseOptions& options = {});

/// `date,target,sqv_1,...,sqv_a`.
ObservationPanel read_panel_csv(std::istream& in, const std::string& source = "<panel>");
void write_panel_csv(std::ostream& out, const ObservationPanel& panel);

MonthlySeries read_monthly_csv_file(const std::string& path);
WeeklyTrends read_weekly_trends_csv_file(const std::string& path,
                                         const TrendsParseOptions& options = {});
ObservationPanel read_panel_csv_file(const std::string& path);
void write_panel_csv_file(const std::string& path, const ObservationPanel& panel);

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);
/// Strict parse of a full field as a double.
bool parse_double(std::string_view text, double& value);

}  // namespace sqvdlm::io
