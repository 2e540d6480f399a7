#include "sqvdlm/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "sqvdlm/errors.hpp"

namespace sqvdlm {

namespace chr = std::chrono;

MonthStamp::MonthStamp(int year, int month) : year_(year), month_(month) {
    if (month < 1 || month > 12) {
        throw DomainError("month " + std::to_string(month) + " outside 1..12");
    }
}

MonthStamp MonthStamp::from_ordinal(long ordinal) {
    long year = ordinal >= 0 ? ordinal / 12 : -((-ordinal + 11) / 12);
    return MonthStamp(static_cast<int>(year), static_cast<int>(ordinal - 12 * year) + 1);
}

MonthStamp MonthStamp::parse(std::string_view text) {
    auto fail = [&] { return DomainError("expected YYYY-MM, got '" + std::string(text) + "'"); };
    if (text.size() != 7 || text[4] != '-') throw fail();
    int year = 0;
    int month = 0;
    auto r1 = std::from_chars(text.data(), text.data() + 4, year);
    auto r2 = std::from_chars(text.data() + 5, text.data() + 7, month);
    if (r1.ec != std::errc{} || r1.ptr != text.data() + 4 || r2.ec != std::errc{} ||
        r2.ptr != text.data() + 7) {
        throw fail();
    }
    if (month < 1 || month > 12) throw fail();
    return MonthStamp(year, month);
}

std::string MonthStamp::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year_, month_);
    return buf;
}

chr::sys_days MonthStamp::first_day() const {
    return chr::year_month_day{chr::year{year_}, chr::month{static_cast<unsigned>(month_)},
                               chr::day{1}};
}

MonthStamp MonthStamp::containing(chr::sys_days day) {
    chr::year_month_day ymd{day};
    return MonthStamp(static_cast<int>(ymd.year()), static_cast<int>(unsigned(ymd.month())));
}

std::array<double, 12> month_indicator(const MonthStamp& t) {
    std::array<double, 12> s{};
    s[static_cast<std::size_t>(t.month() - 1)] = 1.0;
    return s;
}

// --- MonthlySeries -----------------------------------------------------------

MonthlySeries::MonthlySeries(MonthStamp start, std::vector<Observation> values)
    : start_(start), values_(std::move(values)) {
    if (values_.empty()) throw ContractError("monthly series must have at least one entry");
}

std::size_t MonthlySeries::index_of(const MonthStamp& t) const {
    long i = t - start_;
    if (i < 0 || i >= static_cast<long>(values_.size())) {
        throw ContractError("month " + t.to_string() + " outside series " + start_.to_string() +
                            ".." + end().to_string());
    }
    return static_cast<std::size_t>(i);
}

MonthlySeries MonthlySeries::slice(const MonthStamp& first, const MonthStamp& last) const {
    if (last < first) throw ContractError("empty slice " + first.to_string() + ".." + last.to_string());
    auto i0 = index_of(first);
    auto i1 = index_of(last);
    return MonthlySeries(first, {values_.begin() + static_cast<long>(i0),
                                 values_.begin() + static_cast<long>(i1) + 1});
}

std::vector<double> MonthlySeries::observed() const {
    std::vector<double> out;
    out.reserve(values_.size());
    for (const auto& v : values_) {
        if (v) out.push_back(*v);
    }
    return out;
}

std::vector<double> MonthlySeries::dense(std::string_view what) const {
    std::vector<double> out;
    out.reserve(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!values_[i]) {
            throw ContractError(std::string(what) + " has a missing value at " +
                                stamp_at(i).to_string());
        }
        out.push_back(*values_[i]);
    }
    return out;
}

std::size_t MonthlySeries::missing_count() const {
    return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::nullopt));
}

// --- WeeklySeries ------------------------------------------------------------

WeeklySeries::WeeklySeries(std::vector<chr::sys_days> week_start, std::vector<Observation> values)
    : week_start_(std::move(week_start)), values_(std::move(values)) {
    if (week_start_.size() != values_.size()) {
        throw ContractError("weekly dates and values differ in length");
    }
    for (std::size_t i = 1; i < week_start_.size(); ++i) {
        if (week_start_[i] - week_start_[i - 1] != chr::days{7}) {
            throw ContractError("weekly series is not on a 7-day grid at entry " +
                                std::to_string(i + 1));
        }
    }
    for (const auto& v : values_) {
        if (v && (*v < 0.0 || *v > 100.0)) {
            throw DomainError("weekly value " + std::to_string(*v) + " outside [0, 100]");
        }
    }
}

// --- ObservationPanel --------------------------------------------------------

ObservationPanel::ObservationPanel(MonthlySeries target, std::vector<MonthlySeries> replicates,
                                   std::optional<std::vector<double>> demean_offsets)
    : target_(std::move(target)),
      replicates_(std::move(replicates)),
      demean_offsets_(std::move(demean_offsets)) {
    if (replicates_.empty()) throw ContractError("panel needs at least one replicate series");
    for (const auto& r : replicates_) {
        if (r.start() != target_.start() || r.size() != target_.size()) {
            throw ContractError("replicate series not aligned with the target series");
        }
    }
    if (demean_offsets_ && demean_offsets_->size() != replicates_.size() + 1) {
        throw ContractError("demean offsets must have a+1 entries");
    }
}

const MonthlySeries& ObservationPanel::row(std::size_t i) const {
    return i == 0 ? target_ : replicates_.at(i - 1);
}

ObservationPanel ObservationPanel::select_replicates(const std::vector<std::size_t>& which) const {
    std::vector<MonthlySeries> reps;
    std::optional<std::vector<double>> offsets;
    if (demean_offsets_) offsets = std::vector<double>{(*demean_offsets_)[0]};
    for (auto j : which) {
        reps.push_back(replicates_.at(j));
        if (offsets) offsets->push_back((*demean_offsets_)[j + 1]);
    }
    return ObservationPanel(target_, std::move(reps), std::move(offsets));
}

ObservationPanel ObservationPanel::slice(const MonthStamp& first, const MonthStamp& last) const {
    std::vector<MonthlySeries> reps;
    for (const auto& r : replicates_) reps.push_back(r.slice(first, last));
    return ObservationPanel(target_.slice(first, last), std::move(reps), demean_offsets_);
}

MonthlySeries ObservationPanel::replicate_mean() const {
    std::vector<Observation> out(length());
    for (std::size_t t = 0; t < length(); ++t) {
        double sum = 0.0;
        int k = 0;
        for (const auto& r : replicates_) {
            if (r[t]) {
                sum += *r[t];
                ++k;
            }
        }
        if (k > 0) out[t] = sum / k;
    }
    return MonthlySeries(start(), std::move(out));
}

// --- operations --------------------------------------------------------------

MonthlySeries aggregate_weekly_to_monthly(const WeeklySeries& weekly, const MonthStamp& first,
                                          const MonthStamp& last) {
    if (weekly.size() == 0) throw CoverageError("weekly series is empty");
    if (last < first) throw ContractError("month range is empty");

    const auto n_months = static_cast<std::size_t>(last - first + 1);
    std::vector<double> weighted(n_months, 0.0);
    std::vector<int> days_observed(n_months, 0);
    std::vector<bool> overlapped(n_months, false);

    for (std::size_t w = 0; w < weekly.size(); ++w) {
        for (int d = 0; d < 7; ++d) {
            auto day = weekly.week_start()[w] + chr::days{d};
            long i = MonthStamp::containing(day) - first;
            if (i < 0 || i >= static_cast<long>(n_months)) continue;
            overlapped[static_cast<std::size_t>(i)] = true;
            if (const auto& v = weekly.values()[w]) {
                weighted[static_cast<std::size_t>(i)] += *v;
                days_observed[static_cast<std::size_t>(i)] += 1;
            }
        }
    }

    std::string uncovered;
    for (std::size_t i = 0; i < n_months; ++i) {
        if (!overlapped[i]) {
            if (!uncovered.empty()) uncovered += ", ";
            uncovered += (first + static_cast<long>(i)).to_string();
        }
    }
    if (!uncovered.empty()) {
        throw CoverageError("weekly data does not cover months: " + uncovered);
    }

    std::vector<Observation> values(n_months);
    for (std::size_t i = 0; i < n_months; ++i) {
        if (days_observed[i] > 0) values[i] = weighted[i] / days_observed[i];
    }
    return MonthlySeries(first, std::move(values));
}

namespace {

MonthlySeries shift(const MonthlySeries& s, double delta) {
    std::vector<Observation> out(s.values());
    for (auto& v : out) {
        if (v) *v += delta;
    }
    return MonthlySeries(s.start(), std::move(out));
}

// Offsets are snapped to a grid 2^-32 relative to the data scale, so values
// already on that grid (counts, whole index points) demean and restore exactly.
double dyadic_round(double mean, double scale) {
    if (scale == 0.0) return 0.0;
    const double quantum = std::ldexp(1.0, std::ilogb(scale) - 32);
    return std::round(mean / quantum) * quantum;
}

}  // namespace

ObservationPanel demean(const ObservationPanel& panel, const MonthStamp& training_cutoff) {
    const auto last = panel.target().index_of(training_cutoff);
    const std::size_t rows = panel.replicate_count() + 1;

    std::vector<double> offsets(rows, 0.0);
    std::vector<MonthlySeries> centered;
    centered.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto& s = panel.row(i);
        double sum = 0.0;
        double max_abs = 0.0;
        std::size_t n = 0;
        for (std::size_t t = 0; t <= last; ++t) {
            if (s[t]) {
                sum += *s[t];
                max_abs = std::max(max_abs, std::abs(*s[t]));
                ++n;
            }
        }
        if (n == 0) {
            throw DomainError("cannot demean " + std::string(i == 0 ? "target" : "sqv_" + std::to_string(i)) +
                              ": no observed values up to " + training_cutoff.to_string());
        }
        offsets[i] = dyadic_round(sum / static_cast<double>(n), max_abs);
        centered.push_back(shift(s, -offsets[i]));
    }

    if (const auto& prior = panel.demean_offsets()) {
        for (std::size_t i = 0; i < rows; ++i) offsets[i] += (*prior)[i];
    }
    MonthlySeries target = std::move(centered.front());
    centered.erase(centered.begin());
    return ObservationPanel(std::move(target), std::move(centered), std::move(offsets));
}

ObservationPanel restore_offsets(const ObservationPanel& panel) {
    const auto& offsets = panel.demean_offsets();
    if (!offsets) return panel;
    std::vector<MonthlySeries> reps;
    for (std::size_t j = 0; j < panel.replicate_count(); ++j) {
        reps.push_back(shift(panel.replicate(j), (*offsets)[j + 1]));
    }
    return ObservationPanel(shift(panel.target(), (*offsets)[0]), std::move(reps));
}

PanelSplit split(const ObservationPanel& panel, const MonthStamp& cutoff) {
    if (cutoff < panel.start()) {
        throw ContractError("cutoff " + cutoff.to_string() + " precedes the panel start");
    }
    if (cutoff >= panel.end()) {
        throw ContractError("cutoff " + cutoff.to_string() + " leaves an empty test window");
    }
    return {panel.slice(panel.start(), cutoff), panel.slice(cutoff + 1, panel.end())};
}

MonthlySeries concat(const MonthlySeries& head, const MonthlySeries& tail) {
    if (tail.start() != head.end() + 1) throw ContractError("series are not contiguous");
    std::vector<Observation> values(head.values());
    values.insert(values.end(), tail.values().begin(), tail.values().end());
    return MonthlySeries(head.start(), std::move(values));
}

ObservationPanel concat(const ObservationPanel& head, const ObservationPanel& tail) {
    if (head.replicate_count() != tail.replicate_count() ||
        head.demean_offsets() != tail.demean_offsets()) {
        throw ContractError("panels differ in replicates or offsets");
    }
    std::vector<MonthlySeries> reps;
    for (std::size_t j = 0; j < head.replicate_count(); ++j) {
        reps.push_back(concat(head.replicate(j), tail.replicate(j)));
    }
    return ObservationPanel(concat(head.target(), tail.target()), std::move(reps),
                            head.demean_offsets());
}

}  // namespace sqvdlm
