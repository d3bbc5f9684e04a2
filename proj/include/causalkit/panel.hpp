#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace causalkit {

struct RawRecord {
    std::string country_code;
    std::string indicator_code;
    int year = 0;
    std::optional<double> value;
};

struct RawPanel {
    std::vector<RawRecord> records;
};

enum class PanelFormat { Long, Wide };

// Long header is exactly `country_code,indicator_code,year,value`. Wide
// format carries `country_code,indicator_code` followed by one 4-digit
// year column each.
RawPanel parse_panel(std::istream& in, PanelFormat format);

std::string serialize_long_csv(const RawPanel& panel);

// Dense country x indicator x year grid with a missingness mask.
struct IndicatorPanel {
    std::vector<std::string> countries;
    std::vector<std::string> indicators;
    std::vector<int> years;
    std::vector<std::optional<double>> values;  // countries * indicators * years
    std::string target_code;

    std::optional<double>& at(int country, int indicator, int year_idx);
    const std::optional<double>& at(int country, int indicator, int year_idx) const;
    int indicator_index(const std::string& code) const;
    int year_index(int year) const;

    std::string to_json() const;
    static IndicatorPanel from_json(const std::string& text);
};

IndicatorPanel build_panel(const RawPanel& raw, const std::string& target_code);

// Drops indicators whose missing ratio exceeds the threshold (the target
// is kept regardless, with a warning), then removes country-year rows
// that are not complete cases over the retained indicators. The missing
// ratio is taken over country-year rows with at least one observation, so
// the operation is idempotent.
IndicatorPanel filter_missing(const IndicatorPanel& panel, double threshold = 0.4,
                              std::vector<std::string>* warnings = nullptr);

struct ColumnStats {
    double mean = 0.0;
    double stddev = 1.0;
};

// Per-column (x - mean) / stddev with the population (n-denominator)
// stddev convention.
std::pair<Eigen::MatrixXd, std::vector<ColumnStats>> standardize(const Eigen::MatrixXd& data,
                                                                 const std::vector<std::string>& names);

struct LaggedPair {
    int year_t = 0;
    Eigen::MatrixXd predictors;  // n x d, standardized
    Eigen::VectorXd target;      // n, standardized
    std::vector<std::string> countries;
};

// The lagged pairs (V^t, Y^{t+step}), standardized per column across the
// pooled pairs. standardization holds one entry per predictor code plus a
// final entry for the target.
struct LaggedDataset {
    std::vector<LaggedPair> pairs;
    std::vector<std::string> variable_codes;
    std::vector<ColumnStats> standardization;
    std::string target_code;

    int total_rows() const;
    Eigen::MatrixXd pooled_predictors() const;
    Eigen::VectorXd pooled_target() const;
    // Predictors with the target appended as the final column.
    Eigen::MatrixXd pooled_with_target() const;

    std::string to_json() const;
    static LaggedDataset from_json(const std::string& text);
};

LaggedDataset build_lagged(const IndicatorPanel& panel, int step_years = 5);

}  // namespace causalkit
