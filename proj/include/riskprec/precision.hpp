#pragma once

#include <optional>
#include <vector>

#include "riskprec/mc_engine.hpp"
#include "riskprec/stats.hpp"

namespace riskprec {

/// Moment diagnostics and standardized precision of one cell's estimates.
struct PrecisionReport {
    CellKey cell;
    Eigen::Index trials = 0;
    double mean = 0.0;
    double sd = 0.0;
    std::optional<double> skewness;
    std::optional<double> kurtosis;
    std::optional<double> jb_pvalue;
    double std_se = 0.0;
    double ci_level = 0.90;
    ConfidenceBounds std_ci;
};

[[nodiscard]] PrecisionReport precision_report(const TrialEstimates& estimates, double ci_level = 0.90);

/// Reports for every cell of `result` whose distribution index is `dist_index`,
/// in the result's cell order.
[[nodiscard]] std::vector<PrecisionReport> precision_grid(const ExperimentResult& result, std::size_t dist_index,
                                                          double ci_level = 0.90);

/// Elementwise numerator / denominator of the precision statistics; nullopt
/// when the denominator is zero.
struct RatioEntry {
    RiskMeasureSpec measure;
    Eigen::Index n = 0;
    std::optional<double> std_se;
    std::optional<double> lb;
    std::optional<double> ub;
};

/// Aligns the two grids by (measure, parameter, n). Throws DomainError when
/// their cell sets differ.
[[nodiscard]] std::vector<RatioEntry> ratio_report(const std::vector<PrecisionReport>& numerator,
                                                   const std::vector<PrecisionReport>& denominator);

}  // namespace riskprec
