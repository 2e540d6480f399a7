#pragma once

#include <string>

#include "json.hpp"
#include "sqvdlm/benchmarks.hpp"
#include "sqvdlm/diagnostics.hpp"
#include "sqvdlm/em.hpp"
#include "sqvdlm/synthetic.hpp"

namespace sqvdlm::report {

using Json = nlohmann::ordered_json;

// Non-finite numbers (unbounded interval ends) are written as null.
Json numbers(const std::vector<double>& v);
Json json_of(const DlmParams& p);
Json json_of(const ScalarDlmParams& p);
Json json_of(const EmConfig& c);
Json json_of(const IntervalReport& ci);
Json json_of(const FitReport& r);
Json json_of(const ScalarFitReport& r);
Json json_of(const ForecastResult& f);
Json json_of(const ForecasterOutput& f);
Json json_of(const AccuracyReport& a);
Json json_of(const CcfReport& c);
Json json_of(const SimConfig& c);
/// Configuration plus latent state paths and noise draws.
Json truth_json(const Simulation& sim, const SimConfig& config);

/// Fields present in `j` override `base`; unknown keys and bad values throw
/// ParseError naming `source`.
EmConfig em_config_from_json(const Json& j, EmConfig base = {}, const std::string& source = "<em-config>");
EmConfig em_config_from_file(const std::string& path, EmConfig base = {});

/// Two-space indented text with a trailing newline.
std::string dump(const Json& j);

/// `horizon,mean,lower,upper`; bounds are empty for models without intervals.
std::string forecast_csv(const ForecasterOutput& f);
std::string forecast_csv(const ForecastResult& f);

struct ForecastRow {
    int horizon = 0;
    double mean = 0.0;
    std::optional<double> lower;
    std::optional<double> upper;
};
/// Parser for forecast_csv output.
std::vector<ForecastRow> read_forecast_csv(const std::string& text, const std::string& source = "<forecast>");

}  // namespace sqvdlm::report
