#pragma once

#include <string_view>

#include "riskprec/distributions.hpp"
#include "riskprec/estimators.hpp"

namespace riskprec {

enum class ValueMethod { closed_form, quadrature };

[[nodiscard]] inline std::string_view to_string(ValueMethod m) {
    return m == ValueMethod::closed_form ? "closed_form" : "quadrature";
}

/// Population value of a risk measure under a loss distribution.
struct TrueRiskValue {
    RiskMeasureSpec measure;
    DistributionSpec dist;
    double value = 0.0;
    ValueMethod method = ValueMethod::closed_form;
};

/// Probability mass cut from each end of the quantile range before
/// quadrature; the cut tails are added back in closed form.
inline constexpr double kTailCut = 1e-10;

[[nodiscard]] double true_var(const DistributionSpec& dist, double alpha);
[[nodiscard]] double true_es(const DistributionSpec& dist, double alpha);
[[nodiscard]] double true_srm(const DistributionSpec& dist, double k);

[[nodiscard]] TrueRiskValue true_value(const DistributionSpec& dist, const RiskMeasureSpec& measure);

/// E[X 1{X > u}] = integral of x f(x) over (u, inf), closed form per family.
[[nodiscard]] double upper_partial_expectation(const DistributionSpec& dist, double u);

}  // namespace riskprec
