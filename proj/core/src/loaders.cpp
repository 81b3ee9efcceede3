#include "colearn/loaders.hpp"

#include "colearn/error.hpp"
#include "colearn/util.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace colearn {

namespace pamap2 {

std::vector<int> default_columns() {
    // acc16 + acc6 + gyro + mag of every IMU; base offsets 3 (hand),
    // 20 (chest), 37 (ankle); temperature at base+0, orientation at
    // base+13..16 skipped.
    std::vector<int> cols;
    for (int base : {3, 20, 37})
        for (int off = 1; off <= 12; ++off) cols.push_back(base + off);
    return cols;
}

std::vector<int> default_activities() { return {1, 2, 3, 4, 5, 6, 7, 12, 13, 16, 17, 24}; }

const std::vector<std::pair<int, std::string>>& activity_names() {
    static const std::vector<std::pair<int, std::string>> names = {
        {1, "lying"},           {2, "sitting"},          {3, "standing"},
        {4, "walking"},         {5, "running"},          {6, "cycling"},
        {7, "nordic_walking"},  {12, "ascending_stairs"}, {13, "descending_stairs"},
        {16, "vacuum_cleaning"}, {17, "ironing"},         {24, "rope_jumping"},
    };
    return names;
}

}  // namespace pamap2

namespace harth {

std::vector<std::string> feature_columns() {
    return {"back_x", "back_y", "back_z", "thigh_x", "thigh_y", "thigh_z"};
}

std::vector<int> default_activities() { return {1, 2, 6, 7, 8}; }

const std::vector<std::pair<int, std::string>>& activity_names() {
    static const std::vector<std::pair<int, std::string>> names = {
        {1, "walking"}, {2, "running"}, {6, "standing"}, {7, "sitting"}, {8, "lying"},
    };
    return names;
}

}  // namespace harth

namespace {

bool parse_cell(const std::string& tok, double* out) {
    if (tok == "NaN" || tok == "nan" || tok == "NA") {
        *out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    bool ok = false;
    *out = parse_double(tok, &ok);
    return ok;
}

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

// HARTH timestamps are either plain seconds or an ISO datetime like
// "2019-01-15 10:12:30.000".
double parse_timestamp(const std::string& tok, const std::string& file, std::size_t line_no) {
    bool ok = false;
    const double v = parse_double(tok, &ok);
    if (ok) return v;

    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    double sec = 0.0;
    const int n = std::sscanf(tok.c_str(), "%d-%d-%d%*c%d:%d:%lf", &y, &mo, &d, &h, &mi, &sec);
    if (n != 6)
        throw data_error(file + ":" + std::to_string(line_no) + ": unparseable timestamp '" + tok +
                         "'");
    return static_cast<double>(days_from_civil(y, mo, d)) * 86400.0 + h * 3600.0 + mi * 60.0 + sec;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

}  // namespace

std::vector<SubjectSeries> load_pamap2(const std::string& directory, const std::vector<std::string>& subject_ids,
                                       const std::vector<int>& column_selection,
                                       const std::vector<int>& activity_whitelist) {
    namespace fs = std::filesystem;
    const std::set<int> whitelist(activity_whitelist.begin(), activity_whitelist.end());

    std::vector<SubjectSeries> result;
    for (const auto& sid : subject_ids) {
        const fs::path path = fs::path(directory) / (sid + ".dat");
        std::ifstream in(path);
        if (!in)
            throw data_error("PAMAP2 subject " + sid + ": cannot open " + path.string());

        SubjectSeries series;
        series.subject_id = sid;
        series.sample_rate_hz = pamap2::kSampleRateHz;
        series.num_channels = static_cast<int>(column_selection.size());

        // Column-major storage needs the length up front; buffer rows first.
        std::vector<double> ts;
        std::vector<int> labels;
        std::vector<double> rows;  // row-major staging

        std::string line;
        std::size_t line_no = 0;
        std::vector<std::string> toks;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            toks.clear();
            std::stringstream ss(line);
            std::string tok;
            while (ss >> tok) toks.push_back(tok);
            if (toks.size() < 2)
                throw data_error(path.string() + ":" + std::to_string(line_no) +
                                 ": line has fewer than 2 columns");

            bool ok = false;
            const double t = parse_double(toks[0], &ok);
            if (!ok)
                throw data_error(path.string() + ":" + std::to_string(line_no) +
                                 ": bad timestamp '" + toks[0] + "'");
            const long long act = parse_int(toks[1], &ok);
            if (!ok)
                throw data_error(path.string() + ":" + std::to_string(line_no) +
                                 ": bad activity id '" + toks[1] + "'");
            if (!whitelist.contains(static_cast<int>(act))) continue;

            for (int col : column_selection) {
                if (col < 0 || static_cast<std::size_t>(col) >= toks.size())
                    throw data_error(path.string() + ":" + std::to_string(line_no) + ": only " +
                                     std::to_string(toks.size()) + " columns, selection needs " +
                                     std::to_string(col));
                double v = 0.0;
                if (!parse_cell(toks[static_cast<std::size_t>(col)], &v))
                    throw data_error(path.string() + ":" + std::to_string(line_no) +
                                     ": non-numeric cell '" + toks[static_cast<std::size_t>(col)] +
                                     "' in column " + std::to_string(col));
                rows.push_back(v);
            }
            ts.push_back(t);
            labels.push_back(static_cast<int>(act));
        }

        const std::size_t T = ts.size();
        series.timestamps = std::move(ts);
        series.labels = std::move(labels);
        series.channels.resize(static_cast<std::size_t>(series.num_channels) * T);
        for (std::size_t r = 0; r < T; ++r)
            for (int c = 0; c < series.num_channels; ++c)
                series.at(c, r) = rows[r * static_cast<std::size_t>(series.num_channels) +
                                       static_cast<std::size_t>(c)];
        result.push_back(std::move(series));
    }
    return result;
}

std::vector<SubjectSeries> load_harth(const std::string& directory, const std::vector<std::string>& subject_ids,
                                      const std::vector<int>& activity_whitelist) {
    namespace fs = std::filesystem;
    const std::set<int> whitelist(activity_whitelist.begin(), activity_whitelist.end());
    const auto features = harth::feature_columns();

    std::vector<SubjectSeries> result;
    for (const auto& sid : subject_ids) {
        const fs::path path = fs::path(directory) / (sid + ".csv");
        std::ifstream in(path);
        if (!in) throw data_error("HARTH subject " + sid + ": cannot open " + path.string());

        std::string header_line;
        if (!std::getline(in, header_line))
            throw data_error(path.string() + ": empty file");
        const auto header = split_csv_line(header_line);

        auto find_col = [&header, &path](const std::string& name) {
            for (std::size_t i = 0; i < header.size(); ++i)
                if (header[i] == name) return static_cast<int>(i);
            std::string expected = "timestamp";
            for (const auto& f : harth::feature_columns()) expected += "," + f;
            expected += ",label";
            throw data_error(path.string() + ": header lacks column '" + name + "' (expected " +
                             expected + ")");
        };

        const int ts_col = find_col("timestamp");
        const int label_col = find_col("label");
        std::vector<int> feat_cols;
        for (const auto& f : features) feat_cols.push_back(find_col(f));

        SubjectSeries series;
        series.subject_id = sid;
        series.sample_rate_hz = harth::kSampleRateHz;
        series.num_channels = static_cast<int>(features.size());

        std::vector<double> ts;
        std::vector<int> labels;
        std::vector<double> rows;

        std::string line;
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            const auto cells = split_csv_line(line);
            if (cells.size() < header.size())
                throw data_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(header.size()) + " cells, got " +
                                 std::to_string(cells.size()));

            bool ok = false;
            const long long act = parse_int(cells[static_cast<std::size_t>(label_col)], &ok);
            if (!ok)
                throw data_error(path.string() + ":" + std::to_string(line_no) + ": bad label '" +
                                 cells[static_cast<std::size_t>(label_col)] + "'");
            if (!whitelist.contains(static_cast<int>(act))) continue;

            ts.push_back(parse_timestamp(cells[static_cast<std::size_t>(ts_col)], path.string(), line_no));
            labels.push_back(static_cast<int>(act));
            for (int fc : feat_cols) {
                double v = 0.0;
                if (!parse_cell(cells[static_cast<std::size_t>(fc)], &v))
                    throw data_error(path.string() + ":" + std::to_string(line_no) +
                                     ": non-numeric cell '" + cells[static_cast<std::size_t>(fc)] +
                                     "'");
                rows.push_back(v);
            }
        }

        const std::size_t T = ts.size();
        series.timestamps = std::move(ts);
        series.labels = std::move(labels);
        series.channels.resize(static_cast<std::size_t>(series.num_channels) * T);
        for (std::size_t r = 0; r < T; ++r)
            for (int c = 0; c < series.num_channels; ++c)
                series.at(c, r) = rows[r * static_cast<std::size_t>(series.num_channels) +
                                       static_cast<std::size_t>(c)];
        result.push_back(std::move(series));
    }
    return result;
}

}  // namespace colearn
