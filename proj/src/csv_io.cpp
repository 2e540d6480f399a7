#include "sqvdlm/csv_io.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "sqvdlm/errors.hpp"

namespace sqvdlm::io {

namespace chr = std::chrono;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        fields.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return fields;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

Observation parse_value(std::string_view field, const std::string& source, std::size_t line_no) {
    if (field.empty()) return std::nullopt;
    double v = 0.0;
    if (!parse_double(field, v)) {
        throw ParseError(source, line_no, "invalid number '" + std::string(field) + "'");
    }
    return v;
}

MonthStamp parse_month(std::string_view field, const std::string& source, std::size_t line_no) {
    try {
        return MonthStamp::parse(field);
    } catch (const DomainError& e) {
        throw ParseError(source, line_no, e.what());
    }
}

chr::sys_days parse_day(std::string_view field, const std::string& source, std::size_t line_no) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    bool ok = field.size() == 10 && field[4] == '-' && field[7] == '-';
    if (ok) {
        const char* p = field.data();
        ok = std::from_chars(p, p + 4, y).ptr == p + 4 && std::from_chars(p + 5, p + 7, m).ptr == p + 7 &&
             std::from_chars(p + 8, p + 10, d).ptr == p + 10;
    }
    chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
    if (!ok || !ymd.ok()) {
        throw ParseError(source, line_no, "expected YYYY-MM-DD, got '" + std::string(field) + "'");
    }
    return chr::sys_days{ymd};
}

void expect_consecutive(const MonthStamp& prev, const MonthStamp& cur, const std::string& source,
                        std::size_t line_no) {
    if (cur != prev + 1) {
        throw ParseError(source, line_no,
                         "month " + cur.to_string() + " does not follow " + prev.to_string());
    }
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return in;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, r.ptr);
}

bool parse_double(std::string_view text, double& value) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    auto r = std::from_chars(text.data(), text.data() + text.size(), value);
    return r.ec == std::errc{} && r.ptr == text.data() + text.size();
}

MonthlySeries read_monthly_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<Observation> values;
    MonthStamp start;
    MonthStamp prev;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        auto fields = split_fields(line);
        if (!header_seen) {
            if (fields.size() != 2 || fields[0] != "date" || fields[1] != "value") {
                throw ParseError(source, line_no, "expected header 'date,value'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 2) throw ParseError(source, line_no, "expected 2 fields");
        auto month = parse_month(fields[0], source, line_no);
        if (values.empty()) {
            start = month;
        } else {
            expect_consecutive(prev, month, source, line_no);
        }
        prev = month;
        values.push_back(parse_value(fields[1], source, line_no));
    }
    if (!header_seen) throw ParseError(source, line_no, "missing header");
    if (values.empty()) throw ParseError(source, line_no, "no data rows");
    return MonthlySeries(start, std::move(values));
}

void write_monthly_csv(std::ostream& out, const MonthlySeries& series) {
    out << "date,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << series.stamp_at(i).to_string() << ',';
        if (series[i]) out << format_double(*series[i]);
        out << '\n';
    }
}

WeeklyTrends read_weekly_trends_csv(std::istream& in, const std::string& source,
                                    const TrendsParseOptions& options) {
    std::string line;
    std::size_t line_no = 0;
    std::string label;
    bool header_seen = false;
    std::vector<chr::sys_days> weeks;
    std::vector<Observation> values;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty()) continue;
        if (!header_seen) {
            if (view.front() == '#') continue;
            auto fields = split_fields(view);
            if (fields.size() != 2 || fields[0] != "Week") {
                throw ParseError(source, line_no, "expected header 'Week,<query label>'");
            }
            label = std::string(fields[1]);
            header_seen = true;
            continue;
        }
        auto fields = split_fields(view);
        if (fields.size() != 2) throw ParseError(source, line_no, "expected 2 fields");
        auto day = parse_day(fields[0], source, line_no);
        if (!weeks.empty() && day - weeks.back() != chr::days{7}) {
            throw ParseError(source, line_no, "week does not follow the previous one by 7 days");
        }
        Observation v;
        if (fields[1] == "<1") {
            v = options.below_threshold_value;
        } else {
            v = parse_value(fields[1], source, line_no);
        }
        if (v && (*v < 0.0 || *v > 100.0)) {
            throw ParseError(source, line_no, "value outside [0, 100]");
        }
        weeks.push_back(day);
        values.push_back(v);
    }
    if (!header_seen) throw ParseError(source, line_no, "missing 'Week,<query label>' header");
    if (weeks.empty()) throw ParseError(source, line_no, "no weekly rows");
    return {label, WeeklySeries(std::move(weeks), std::move(values))};
}

ObservationPanel read_panel_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t n_cols = 0;
    MonthStamp start;
    MonthStamp prev;
    std::vector<std::vector<Observation>> columns;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        auto fields = split_fields(line);
        if (n_cols == 0) {
            if (fields.size() < 3 || fields[0] != "date" || fields[1] != "target") {
                throw ParseError(source, line_no, "expected header 'date,target,sqv_1,...,sqv_a'");
            }
            for (std::size_t j = 2; j < fields.size(); ++j) {
                if (fields[j] != "sqv_" + std::to_string(j - 1)) {
                    throw ParseError(source, line_no, "unexpected column '" + std::string(fields[j]) + "'");
                }
            }
            n_cols = fields.size();
            columns.resize(n_cols - 1);
            continue;
        }
        if (fields.size() != n_cols) {
            throw ParseError(source, line_no,
                             "expected " + std::to_string(n_cols) + " fields, got " + std::to_string(fields.size()));
        }
        auto month = parse_month(fields[0], source, line_no);
        if (columns[0].empty()) {
            start = month;
        } else {
            expect_consecutive(prev, month, source, line_no);
        }
        prev = month;
        for (std::size_t j = 1; j < n_cols; ++j) {
            columns[j - 1].push_back(parse_value(fields[j], source, line_no));
        }
    }
    if (n_cols == 0) throw ParseError(source, line_no, "missing header");
    if (columns[0].empty()) throw ParseError(source, line_no, "no data rows");
    std::vector<MonthlySeries> reps;
    for (std::size_t j = 1; j < columns.size(); ++j) reps.emplace_back(start, std::move(columns[j]));
    return ObservationPanel(MonthlySeries(start, std::move(columns[0])), std::move(reps));
}

void write_panel_csv(std::ostream& out, const ObservationPanel& panel) {
    out << "date,target";
    for (std::size_t j = 1; j <= panel.replicate_count(); ++j) out << ",sqv_" << j;
    out << '\n';
    for (std::size_t t = 0; t < panel.length(); ++t) {
        out << panel.target().stamp_at(t).to_string();
        for (std::size_t i = 0; i <= panel.replicate_count(); ++i) {
            out << ',';
            if (const auto& v = panel.row(i)[t]) out << format_double(*v);
        }
        out << '\n';
    }
}

MonthlySeries read_monthly_csv_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_monthly_csv(in, path);
}

WeeklyTrends read_weekly_trends_csv_file(const std::string& path, const TrendsParseOptions& options) {
    auto in = open_or_throw(path);
    return read_weekly_trends_csv(in, path, options);
}

ObservationPanel read_panel_csv_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_panel_csv(in, path);
}

void write_panel_csv_file(const std::string& path, const ObservationPanel& panel) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    write_panel_csv(out, panel);
}

}  // namespace sqvdlm::io
