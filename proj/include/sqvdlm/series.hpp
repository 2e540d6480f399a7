#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sqvdlm {

/// Calendar month (Gregorian). Months are 1..12.
class MonthStamp {
public:
    MonthStamp() = default;
    MonthStamp(int year, int month);

    int year() const noexcept { return year_; }
    int month() const noexcept { return month_; }

    /// Months since year 0, used for arithmetic.
    long ordinal() const noexcept { return 12L * year_ + (month_ - 1); }
    static MonthStamp from_ordinal(long ordinal);

    MonthStamp operator+(long months) const { return from_ordinal(ordinal() + months); }
    MonthStamp operator-(long months) const { return from_ordinal(ordinal() - months); }
    long operator-(const MonthStamp& other) const { return ordinal() - other.ordinal(); }

    auto operator<=>(const MonthStamp&) const = default;

    /// Parses `YYYY-MM`.
    static MonthStamp parse(std::string_view text);
    std::string to_string() const;

    std::chrono::sys_days first_day() const;
    static MonthStamp containing(std::chrono::sys_days day);

private:
    int year_ = 1970;
    int month_ = 1;
};

/// Unit basis vector selecting the calendar month of `t`.
std::array<double, 12> month_indicator(const MonthStamp& t);

using Observation = std::optional<double>;

/// Monthly series with explicit missingness.
class MonthlySeries {
public:
    MonthlySeries(MonthStamp start, std::vector<Observation> values);

    const MonthStamp& start() const noexcept { return start_; }
    MonthStamp end() const { return start_ + static_cast<long>(values_.size()) - 1; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<Observation>& values() const noexcept { return values_; }
    const Observation& operator[](std::size_t i) const { return values_[i]; }

    /// Index of `t` relative to start; throws if outside the series.
    std::size_t index_of(const MonthStamp& t) const;
    MonthStamp stamp_at(std::size_t i) const { return start_ + static_cast<long>(i); }

    /// Contiguous sub-range [first, last] (inclusive).
    MonthlySeries slice(const MonthStamp& first, const MonthStamp& last) const;

    /// Observed values only, in time order.
    std::vector<double> observed() const;
    /// Throws ContractError naming `what` if any value is missing.
    std::vector<double> dense(std::string_view what = "series") const;
    std::size_t missing_count() const;

    bool operator==(const MonthlySeries&) const = default;

private:
    MonthStamp start_;
    std::vector<Observation> values_;
};

/// Weekly Google-Trends-style index on a 7-day grid.
class WeeklySeries {
public:
    WeeklySeries(std::vector<std::chrono::sys_days> week_start,
                 std::vector<Observation> values);

    const std::vector<std::chrono::sys_days>& week_start() const noexcept { return week_start_; }
    const std::vector<Observation>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    std::vector<std::chrono::sys_days> week_start_;
    std::vector<Observation> values_;
};

/// Target series plus a >= 1 replicated SQV series on a common monthly grid.
class ObservationPanel {
public:
    ObservationPanel(MonthlySeries target, std::vector<MonthlySeries> replicates,
                     std::optional<std::vector<double>> demean_offsets = std::nullopt);

    const MonthStamp& start() const noexcept { return target_.start(); }
    MonthStamp end() const { return target_.end(); }
    std::size_t length() const noexcept { return target_.size(); }
    std::size_t replicate_count() const noexcept { return replicates_.size(); }

    const MonthlySeries& target() const noexcept { return target_; }
    const std::vector<MonthlySeries>& replicates() const noexcept { return replicates_; }
    const MonthlySeries& replicate(std::size_t j) const { return replicates_.at(j); }
    const std::optional<std::vector<double>>& demean_offsets() const noexcept {
        return demean_offsets_;
    }

    /// Row i of the stacked observation vector: 0 is the target, 1..a replicates.
    const MonthlySeries& row(std::size_t i) const;

    /// Same panel keeping only the listed replicates (offsets follow the selection).
    ObservationPanel select_replicates(const std::vector<std::size_t>& which) const;
    ObservationPanel slice(const MonthStamp& first, const MonthStamp& last) const;
    /// Per-month average over observed replicates (missing where none observed).
    MonthlySeries replicate_mean() const;

    bool operator==(const ObservationPanel&) const = default;

private:
    MonthlySeries target_;
    std::vector<MonthlySeries> replicates_;
    std::optional<std::vector<double>> demean_offsets_;
};

/// Day-count-weighted mean of the weekly values overlapping each month in
/// [first, last]. Missing weekly values carry no weight; a month whose
/// overlapping weeks are all missing is missing.
MonthlySeries aggregate_weekly_to_monthly(const WeeklySeries& weekly, const MonthStamp& first,
                                          const MonthStamp& last);

/// Subtracts each series' training-window mean (entries up to and including
/// `training_cutoff`) from every entry and records the offsets.
ObservationPanel demean(const ObservationPanel& panel, const MonthStamp& training_cutoff);

/// Inverse of demean: adds the stored offsets back and clears them.
ObservationPanel restore_offsets(const ObservationPanel& panel);

struct PanelSplit {
    ObservationPanel train;
    ObservationPanel test;
};

/// train = start..cutoff, test = cutoff+1..end.
PanelSplit split(const ObservationPanel& panel, const MonthStamp& cutoff);
MonthlySeries concat(const MonthlySeries& head, const MonthlySeries& tail);
ObservationPanel concat(const ObservationPanel& head, const ObservationPanel& tail);

}  // namespace sqvdlm
