#include "causalkit/panel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "causalkit/errors.hpp"

namespace causalkit {

namespace {

std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

bool is_blank(const std::string& text) {
    return std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
}

double parse_value(const std::string& text, long row) {
    size_t used = 0;
    double value;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ParseError("non-numeric value '" + text + "'", row);
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) throw ParseError("non-numeric value '" + text + "'", row);
    return value;
}

int parse_year(const std::string& text, long row) {
    size_t used = 0;
    int year;
    try {
        year = std::stoi(text, &used);
    } catch (const std::exception&) {
        throw ParseError("non-integer year '" + text + "'", row);
    }
    if (used != text.size()) throw ParseError("non-integer year '" + text + "'", row);
    if (year < 1900 || year > 2100) throw ParseError("year " + std::to_string(year) + " outside [1900, 2100]", row);
    return year;
}

void check_duplicate(std::set<std::tuple<std::string, std::string, int>>& seen, const RawRecord& rec) {
    if (!seen.insert({rec.country_code, rec.indicator_code, rec.year}).second)
        throw DuplicateError("duplicate (country, indicator, year) triple: " + rec.country_code + "," +
                             rec.indicator_code + "," + std::to_string(rec.year));
}

constexpr const char* kLongHeader = "country_code,indicator_code,year,value";

}  // namespace

RawPanel parse_panel(std::istream& in, PanelFormat format) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty input");
    std::vector<std::string> header = split_csv_line(line);

    RawPanel panel;
    std::set<std::tuple<std::string, std::string, int>> seen;
    long row = 1;

    if (format == PanelFormat::Long) {
        if (header != std::vector<std::string>{"country_code", "indicator_code", "year", "value"})
            throw FormatError(std::string("long format header must be exactly `") + kLongHeader + "`");
        while (std::getline(in, line)) {
            ++row;
            if (is_blank(line)) continue;
            std::vector<std::string> cells = split_csv_line(line);
            if (cells.size() != 4) throw FormatError("expected 4 columns at row " + std::to_string(row));
            RawRecord rec;
            rec.country_code = cells[0];
            rec.indicator_code = cells[1];
            rec.year = parse_year(cells[2], row);
            if (!is_blank(cells[3])) rec.value = parse_value(cells[3], row);
            check_duplicate(seen, rec);
            panel.records.push_back(std::move(rec));
        }
        return panel;
    }

    if (header.size() < 3 || header[0] != "country_code" || header[1] != "indicator_code")
        throw FormatError("wide format header must start with `country_code,indicator_code` followed by year columns");
    std::vector<int> years;
    for (size_t c = 2; c < header.size(); ++c) {
        if (header[c].size() != 4) throw FormatError("wide format year columns must be 4-digit integers, got '" + header[c] + "'");
        years.push_back(parse_year(header[c], 1));
    }
    while (std::getline(in, line)) {
        ++row;
        if (is_blank(line)) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            // A trailing blank cell is dropped by the splitter.
            while (cells.size() < header.size()) cells.push_back("");
        }
        if (cells.size() != header.size()) throw FormatError("column count mismatch at row " + std::to_string(row));
        for (size_t c = 2; c < cells.size(); ++c) {
            RawRecord rec;
            rec.country_code = cells[0];
            rec.indicator_code = cells[1];
            rec.year = years[c - 2];
            if (!is_blank(cells[c])) rec.value = parse_value(cells[c], row);
            check_duplicate(seen, rec);
            panel.records.push_back(std::move(rec));
        }
    }
    return panel;
}

std::string serialize_long_csv(const RawPanel& panel) {
    std::ostringstream out;
    out.precision(17);
    out << kLongHeader << '\n';
    for (const auto& rec : panel.records) {
        out << rec.country_code << ',' << rec.indicator_code << ',' << rec.year << ',';
        if (rec.value) out << *rec.value;
        out << '\n';
    }
    return out.str();
}

std::optional<double>& IndicatorPanel::at(int country, int indicator, int year_idx) {
    return values[(static_cast<size_t>(country) * indicators.size() + indicator) * years.size() + year_idx];
}

const std::optional<double>& IndicatorPanel::at(int country, int indicator, int year_idx) const {
    return values[(static_cast<size_t>(country) * indicators.size() + indicator) * years.size() + year_idx];
}

int IndicatorPanel::indicator_index(const std::string& code) const {
    auto it = std::find(indicators.begin(), indicators.end(), code);
    if (it == indicators.end()) throw LookupError("unknown indicator: " + code);
    return static_cast<int>(it - indicators.begin());
}

int IndicatorPanel::year_index(int year) const {
    auto it = std::find(years.begin(), years.end(), year);
    if (it == years.end()) throw LookupError("unknown year: " + std::to_string(year));
    return static_cast<int>(it - years.begin());
}

IndicatorPanel build_panel(const RawPanel& raw, const std::string& target_code) {
    IndicatorPanel panel;
    std::set<std::string> countries, indicators;
    std::set<int> years;
    for (const auto& rec : raw.records) {
        countries.insert(rec.country_code);
        indicators.insert(rec.indicator_code);
        years.insert(rec.year);
    }
    panel.countries.assign(countries.begin(), countries.end());
    panel.indicators.assign(indicators.begin(), indicators.end());
    panel.years.assign(years.begin(), years.end());
    panel.target_code = target_code;
    if (!indicators.count(target_code)) throw LookupError("target indicator not present in panel: " + target_code);
    panel.values.assign(panel.countries.size() * panel.indicators.size() * panel.years.size(), std::nullopt);
    for (const auto& rec : raw.records) {
        int c = static_cast<int>(std::lower_bound(panel.countries.begin(), panel.countries.end(), rec.country_code) -
                                 panel.countries.begin());
        int i = panel.indicator_index(rec.indicator_code);
        int y = panel.year_index(rec.year);
        panel.at(c, i, y) = rec.value;
    }
    return panel;
}

IndicatorPanel filter_missing(const IndicatorPanel& panel, double threshold, std::vector<std::string>* warnings) {
    if (threshold < 0.0 || threshold > 1.0) throw ContractError("missing threshold must lie in [0, 1]");
    int nc = static_cast<int>(panel.countries.size());
    int ni = static_cast<int>(panel.indicators.size());
    int ny = static_cast<int>(panel.years.size());

    // Active rows: country-year cells with at least one observed indicator.
    std::vector<std::pair<int, int>> active_rows;
    for (int c = 0; c < nc; ++c)
        for (int y = 0; y < ny; ++y)
            for (int i = 0; i < ni; ++i)
                if (panel.at(c, i, y)) {
                    active_rows.push_back({c, y});
                    break;
                }
    if (active_rows.empty()) throw DegenerateDataError("panel has no observed data");

    std::vector<int> keep;
    for (int i = 0; i < ni; ++i) {
        int missing = 0;
        for (auto [c, y] : active_rows)
            if (!panel.at(c, i, y)) ++missing;
        double ratio = static_cast<double>(missing) / active_rows.size();
        bool sparse = ratio > threshold;
        if (panel.indicators[i] == panel.target_code) {
            if (sparse && warnings)
                warnings->push_back("target indicator " + panel.target_code + " has missing ratio above threshold; kept anyway");
            keep.push_back(i);
        } else if (!sparse) {
            keep.push_back(i);
        }
    }

    IndicatorPanel out;
    out.countries = panel.countries;
    out.years = panel.years;
    out.target_code = panel.target_code;
    for (int i : keep) out.indicators.push_back(panel.indicators[i]);
    out.values.assign(out.countries.size() * out.indicators.size() * out.years.size(), std::nullopt);

    // Complete-case rows only.
    bool any_row = false;
    for (auto [c, y] : active_rows) {
        bool complete = true;
        for (int i : keep)
            if (!panel.at(c, i, y)) {
                complete = false;
                break;
            }
        if (!complete) continue;
        any_row = true;
        for (size_t k = 0; k < keep.size(); ++k) out.at(c, static_cast<int>(k), y) = panel.at(c, keep[k], y);
    }
    if (!any_row) throw DegenerateDataError("no complete country-year rows remain after filtering");
    return out;
}

std::pair<Eigen::MatrixXd, std::vector<ColumnStats>> standardize(const Eigen::MatrixXd& data,
                                                                 const std::vector<std::string>& names) {
    Eigen::Index n = data.rows(), d = data.cols();
    if (n < 1) throw ContractError("standardize requires at least one row");
    Eigen::MatrixXd out(n, d);
    std::vector<ColumnStats> stats(d);
    for (Eigen::Index c = 0; c < d; ++c) {
        double mean = data.col(c).mean();
        double sd = std::sqrt((data.col(c).array() - mean).square().sum() / n);
        if (sd < 1e-12 * std::max(1.0, std::abs(mean))) {
            std::string name = c < static_cast<Eigen::Index>(names.size()) ? names[c] : ("column " + std::to_string(c));
            throw DegenerateDataError("constant column cannot be standardized: " + name);
        }
        stats[c] = {mean, sd};
        out.col(c) = (data.col(c).array() - mean) / sd;
    }
    return {out, stats};
}

int LaggedDataset::total_rows() const {
    int n = 0;
    for (const auto& pair : pairs) n += static_cast<int>(pair.predictors.rows());
    return n;
}

Eigen::MatrixXd LaggedDataset::pooled_predictors() const {
    Eigen::MatrixXd pooled(total_rows(), variable_codes.size());
    int row = 0;
    for (const auto& pair : pairs) {
        pooled.middleRows(row, pair.predictors.rows()) = pair.predictors;
        row += static_cast<int>(pair.predictors.rows());
    }
    return pooled;
}

Eigen::VectorXd LaggedDataset::pooled_target() const {
    Eigen::VectorXd pooled(total_rows());
    int row = 0;
    for (const auto& pair : pairs) {
        pooled.segment(row, pair.target.size()) = pair.target;
        row += static_cast<int>(pair.target.size());
    }
    return pooled;
}

Eigen::MatrixXd LaggedDataset::pooled_with_target() const {
    Eigen::MatrixXd predictors = pooled_predictors();
    Eigen::MatrixXd out(predictors.rows(), predictors.cols() + 1);
    out.leftCols(predictors.cols()) = predictors;
    out.col(predictors.cols()) = pooled_target();
    return out;
}

LaggedDataset build_lagged(const IndicatorPanel& panel, int step_years) {
    if (step_years < 1) throw ContractError("step_years must be positive");
    int target_idx = panel.indicator_index(panel.target_code);
    std::vector<int> predictor_idx;
    LaggedDataset dataset;
    dataset.target_code = panel.target_code;
    for (int i = 0; i < static_cast<int>(panel.indicators.size()); ++i) {
        if (i == target_idx) continue;
        predictor_idx.push_back(i);
        dataset.variable_codes.push_back(panel.indicators[i]);
    }

    struct RawPair {
        int year_t;
        std::vector<std::string> countries;
        Eigen::MatrixXd predictors;
        Eigen::VectorXd target;
    };
    std::vector<RawPair> raw_pairs;
    for (int y = 0; y < static_cast<int>(panel.years.size()); ++y) {
        auto it = std::find(panel.years.begin(), panel.years.end(), panel.years[y] + step_years);
        if (it == panel.years.end()) continue;
        int y_next = static_cast<int>(it - panel.years.begin());
        std::vector<int> rows;
        for (int c = 0; c < static_cast<int>(panel.countries.size()); ++c) {
            bool usable = panel.at(c, target_idx, y_next).has_value();
            for (int i : predictor_idx) {
                if (!usable) break;
                usable = panel.at(c, i, y).has_value();
            }
            if (usable) rows.push_back(c);
        }
        if (rows.empty()) continue;
        RawPair pair;
        pair.year_t = panel.years[y];
        pair.predictors.resize(rows.size(), predictor_idx.size());
        pair.target.resize(rows.size());
        for (size_t r = 0; r < rows.size(); ++r) {
            pair.countries.push_back(panel.countries[rows[r]]);
            for (size_t k = 0; k < predictor_idx.size(); ++k)
                pair.predictors(r, k) = *panel.at(rows[r], predictor_idx[k], y);
            pair.target(r) = *panel.at(rows[r], target_idx, y_next);
        }
        raw_pairs.push_back(std::move(pair));
    }
    if (raw_pairs.empty())
        throw DegenerateDataError("no (t, t+" + std::to_string(step_years) + ") year pair with usable rows");

    // Pooled standardization across every pair.
    int total = 0;
    for (const auto& pair : raw_pairs) total += static_cast<int>(pair.predictors.rows());
    Eigen::MatrixXd pooled(total, predictor_idx.size() + 1);
    int row = 0;
    for (const auto& pair : raw_pairs) {
        pooled.block(row, 0, pair.predictors.rows(), pair.predictors.cols()) = pair.predictors;
        pooled.block(row, pair.predictors.cols(), pair.target.size(), 1) = pair.target;
        row += static_cast<int>(pair.predictors.rows());
    }
    std::vector<std::string> names = dataset.variable_codes;
    names.push_back(dataset.target_code);
    auto [standardized, stats] = standardize(pooled, names);
    (void)standardized;
    dataset.standardization = stats;

    for (auto& pair : raw_pairs) {
        LaggedPair out;
        out.year_t = pair.year_t;
        out.countries = std::move(pair.countries);
        out.predictors.resize(pair.predictors.rows(), pair.predictors.cols());
        for (Eigen::Index c = 0; c < pair.predictors.cols(); ++c)
            out.predictors.col(c) = (pair.predictors.col(c).array() - stats[c].mean) / stats[c].stddev;
        const ColumnStats& tstats = stats.back();
        out.target = (pair.target.array() - tstats.mean) / tstats.stddev;
        dataset.pairs.push_back(std::move(out));
    }
    return dataset;
}

std::string IndicatorPanel::to_json() const {
    nlohmann::json doc;
    doc["countries"] = countries;
    doc["indicators"] = indicators;
    doc["years"] = years;
    doc["target_code"] = target_code;
    nlohmann::json value_grid = nlohmann::json::array();
    for (size_t c = 0; c < countries.size(); ++c) {
        nlohmann::json per_indicator = nlohmann::json::array();
        for (size_t i = 0; i < indicators.size(); ++i) {
            nlohmann::json per_year = nlohmann::json::array();
            for (size_t y = 0; y < years.size(); ++y) {
                const auto& cell = at(static_cast<int>(c), static_cast<int>(i), static_cast<int>(y));
                if (cell)
                    per_year.push_back(*cell);
                else
                    per_year.push_back(nullptr);
            }
            per_indicator.push_back(std::move(per_year));
        }
        value_grid.push_back(std::move(per_indicator));
    }
    doc["values"] = std::move(value_grid);
    return doc.dump(2);
}

IndicatorPanel IndicatorPanel::from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    IndicatorPanel panel;
    panel.countries = doc.at("countries").get<std::vector<std::string>>();
    panel.indicators = doc.at("indicators").get<std::vector<std::string>>();
    panel.years = doc.at("years").get<std::vector<int>>();
    panel.target_code = doc.at("target_code").get<std::string>();
    panel.values.assign(panel.countries.size() * panel.indicators.size() * panel.years.size(), std::nullopt);
    const auto& grid = doc.at("values");
    for (size_t c = 0; c < panel.countries.size(); ++c)
        for (size_t i = 0; i < panel.indicators.size(); ++i)
            for (size_t y = 0; y < panel.years.size(); ++y) {
                const auto& cell = grid.at(c).at(i).at(y);
                if (!cell.is_null())
                    panel.at(static_cast<int>(c), static_cast<int>(i), static_cast<int>(y)) = cell.get<double>();
            }
    return panel;
}

std::string LaggedDataset::to_json() const {
    nlohmann::json doc;
    doc["variable_codes"] = variable_codes;
    doc["target_code"] = target_code;
    nlohmann::json stats = nlohmann::json::object();
    for (size_t c = 0; c < variable_codes.size(); ++c)
        stats[variable_codes[c]] = {{"mean", standardization[c].mean}, {"stddev", standardization[c].stddev}};
    stats[target_code] = {{"mean", standardization.back().mean}, {"stddev", standardization.back().stddev}};
    doc["standardization"] = std::move(stats);
    nlohmann::json pair_list = nlohmann::json::array();
    for (const auto& pair : pairs) {
        nlohmann::json entry;
        entry["year_t"] = pair.year_t;
        entry["countries"] = pair.countries;
        nlohmann::json x = nlohmann::json::array();
        for (Eigen::Index r = 0; r < pair.predictors.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < pair.predictors.cols(); ++c) row.push_back(pair.predictors(r, c));
            x.push_back(std::move(row));
        }
        entry["X"] = std::move(x);
        std::vector<double> y(pair.target.data(), pair.target.data() + pair.target.size());
        entry["y"] = y;
        pair_list.push_back(std::move(entry));
    }
    doc["pairs"] = std::move(pair_list);
    return doc.dump(2);
}

LaggedDataset LaggedDataset::from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    LaggedDataset dataset;
    dataset.variable_codes = doc.at("variable_codes").get<std::vector<std::string>>();
    dataset.target_code = doc.at("target_code").get<std::string>();
    const auto& stats = doc.at("standardization");
    for (const auto& code : dataset.variable_codes)
        dataset.standardization.push_back(
            {stats.at(code).at("mean").get<double>(), stats.at(code).at("stddev").get<double>()});
    dataset.standardization.push_back({stats.at(dataset.target_code).at("mean").get<double>(),
                                       stats.at(dataset.target_code).at("stddev").get<double>()});
    for (const auto& entry : doc.at("pairs")) {
        LaggedPair pair;
        pair.year_t = entry.at("year_t").get<int>();
        pair.countries = entry.at("countries").get<std::vector<std::string>>();
        const auto& x = entry.at("X");
        pair.predictors.resize(x.size(), dataset.variable_codes.size());
        for (size_t r = 0; r < x.size(); ++r)
            for (size_t c = 0; c < dataset.variable_codes.size(); ++c) pair.predictors(r, c) = x.at(r).at(c).get<double>();
        auto y = entry.at("y").get<std::vector<double>>();
        pair.target = Eigen::Map<Eigen::VectorXd>(y.data(), y.size());
        dataset.pairs.push_back(std::move(pair));
    }
    return dataset;
}

}  // namespace causalkit
