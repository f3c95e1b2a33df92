#include "riskprec/precision.hpp"

#include <algorithm>

#include "riskprec/errors.hpp"

namespace riskprec {

namespace {

std::optional<double> safe_ratio(double num, double den) {
    if (den == 0.0) return std::nullopt;
    return num / den;
}

bool same_key(const PrecisionReport& a, const PrecisionReport& b) {
    return a.cell.n == b.cell.n && a.cell.measure == b.cell.measure;
}

}  // namespace

PrecisionReport precision_report(const TrialEstimates& estimates, double ci_level) {
    const MomentStats m = moment_stats(estimates.estimates);
    PrecisionReport r;
    r.cell = estimates.cell;
    r.trials = estimates.size();
    r.mean = m.mean;
    r.sd = m.sd;
    r.skewness = m.skewness;
    r.kurtosis = m.kurtosis;
    if (m.skewness && m.kurtosis) r.jb_pvalue = jarque_bera_pvalue(*m.skewness, *m.kurtosis, r.trials);
    r.std_se = standardized_se(estimates.estimates);
    r.ci_level = ci_level;
    r.std_ci = standardized_ci(estimates.estimates, ci_level);
    return r;
}

std::vector<PrecisionReport> precision_grid(const ExperimentResult& result, std::size_t dist_index, double ci_level) {
    std::vector<PrecisionReport> out;
    for (const auto& c : result.cells) {
        if (c.cell.dist_index == dist_index) out.push_back(precision_report(c, ci_level));
    }
    return out;
}

std::vector<RatioEntry> ratio_report(const std::vector<PrecisionReport>& numerator,
                                     const std::vector<PrecisionReport>& denominator) {
    if (numerator.size() != denominator.size()) throw DomainError("ratio grids differ in size");
    std::vector<RatioEntry> out;
    out.reserve(numerator.size());
    for (const auto& num : numerator) {
        auto it = std::find_if(denominator.begin(), denominator.end(),
                               [&](const PrecisionReport& d) { return same_key(num, d); });
        if (it == denominator.end()) throw DomainError("ratio grids do not share cell keys");
        out.push_back({num.cell.measure, num.cell.n, safe_ratio(num.std_se, it->std_se),
                       safe_ratio(num.std_ci.lb, it->std_ci.lb), safe_ratio(num.std_ci.ub, it->std_ci.ub)});
    }
    return out;
}

}  // namespace riskprec
