#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "riskprec/errors.hpp"

namespace riskprec {

/// Population (1/T) moment statistics. Skewness and kurtosis are undefined
/// (nullopt) when the input has zero spread.
struct MomentStats {
    double mean = 0.0;
    double sd = 0.0;
    std::optional<double> skewness;
    std::optional<double> kurtosis;  // non-excess: 3 for a normal
};

/// Trial estimates held as location + scale * base. Statistics that are
/// invariant under positive affine maps are computed from `base` alone, so
/// affinely related series share them bit for bit.
struct EstimateSeries {
    Eigen::VectorXd base;
    double location = 0.0;
    double scale = 1.0;

    [[nodiscard]] static EstimateSeries plain(Eigen::VectorXd values) { return {std::move(values), 0.0, 1.0}; }

    [[nodiscard]] Eigen::Index size() const noexcept { return base.size(); }
    [[nodiscard]] double value(Eigen::Index i) const { return location + scale * base[i]; }
    [[nodiscard]] Eigen::VectorXd values() const {
        Eigen::VectorXd out(base.size());
        for (Eigen::Index i = 0; i < base.size(); ++i) out[i] = value(i);
        return out;
    }
};

struct ConfidenceBounds {
    double lb = 0.0;
    double ub = 0.0;
};

namespace detail {

template <typename Derived>
MomentStats central_moments(const Eigen::DenseBase<Derived>& v) {
    const Eigen::Index t = v.size();
    if (t < 4) throw DomainError("moment statistics need at least 4 values");
    const double inv_t = 1.0 / static_cast<double>(t);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < t; ++i) sum += v.derived().coeff(i);
    const double mean = sum * inv_t;
    double s2 = 0.0;
    double s3 = 0.0;
    double s4 = 0.0;
    for (Eigen::Index i = 0; i < t; ++i) {
        const double d = v.derived().coeff(i) - mean;
        const double d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    const double m2 = s2 * inv_t;
    MomentStats out{mean, std::sqrt(m2), std::nullopt, std::nullopt};
    if (m2 > 0.0) {
        out.skewness = (s3 * inv_t) / std::pow(m2, 1.5);
        out.kurtosis = (s4 * inv_t) / (m2 * m2);
    }
    return out;
}

inline Eigen::Index ceil_rank(double x) {
    // Absorb representation error (0.95 * 10000 = 9500.000000000002).
    return static_cast<Eigen::Index>(std::ceil(x - 1e-9));
}

}  // namespace detail

template <typename Derived>
[[nodiscard]] MomentStats moment_stats(const Eigen::DenseBase<Derived>& values) {
    return detail::central_moments(values);
}

[[nodiscard]] inline MomentStats moment_stats(const std::vector<double>& values) {
    return moment_stats(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

[[nodiscard]] inline MomentStats moment_stats(const EstimateSeries& s) {
    if (!(s.scale > 0.0)) throw DomainError("estimate series scale must be > 0");
    MomentStats base = detail::central_moments(s.base);
    base.mean = s.location + s.scale * base.mean;
    base.sd = s.scale * base.sd;
    return base;
}

[[nodiscard]] inline double jarque_bera_statistic(double skewness, double kurtosis, Eigen::Index trials) {
    if (trials < 4) throw DomainError("Jarque-Bera needs T >= 4");
    const double excess = kurtosis - 3.0;
    return static_cast<double>(trials) / 6.0 * (skewness * skewness + 0.25 * excess * excess);
}

/// Chi-square(2) survival of the JB statistic, exp(-JB / 2).
[[nodiscard]] inline double jarque_bera_pvalue(double skewness, double kurtosis, Eigen::Index trials) {
    return std::exp(-0.5 * jarque_bera_statistic(skewness, kurtosis, trials));
}

/// Raw standard deviation over the mean of the estimates.
[[nodiscard]] inline double standardized_se(const EstimateSeries& s) {
    const MomentStats base = detail::central_moments(s.base);
    const double mean = s.location + s.scale * base.mean;
    if (std::fabs(mean) < 1e-12) {
        throw StandardizationError("standardized SE undefined: mean estimate is (near) zero");
    }
    // location / scale + base mean, so a pure rescaling cancels exactly.
    return base.sd / (s.location / s.scale + base.mean);
}

template <typename Derived>
[[nodiscard]] double standardized_se(const Eigen::DenseBase<Derived>& values) {
    return standardized_se(EstimateSeries::plain(values.derived().eval()));
}

/// Empirical two-sided interval at `level`: the ceil(qT)-th and
/// ceil((1-q)T)-th smallest estimates, q = (1 - level)/2, each divided by the
/// mean estimate.
[[nodiscard]] inline ConfidenceBounds standardized_ci(const EstimateSeries& s, double level = 0.90) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");
    const Eigen::Index t = s.size();
    const double q = 0.5 * (1.0 - level);
    if (static_cast<double>(t) * q < 1.0 - 1e-9) {
        throw DomainError("too few trials for a " + std::to_string(level) + " interval");
    }
    if (!(s.scale > 0.0)) throw DomainError("estimate series scale must be > 0");
    const Eigen::Index lo_rank = detail::ceil_rank(q * static_cast<double>(t));
    const Eigen::Index hi_rank = detail::ceil_rank((1.0 - q) * static_cast<double>(t));

    std::vector<double> sorted(s.base.data(), s.base.data() + t);
    std::sort(sorted.begin(), sorted.end());
    const MomentStats base = detail::central_moments(s.base);
    const double mean = s.location + s.scale * base.mean;
    if (std::fabs(mean) < 1e-12) {
        throw StandardizationError("standardized CI undefined: mean estimate is (near) zero");
    }
    const double shift = s.location / s.scale;
    const double denom = shift + base.mean;
    return {(shift + sorted[static_cast<std::size_t>(lo_rank - 1)]) / denom,
            (shift + sorted[static_cast<std::size_t>(hi_rank - 1)]) / denom};
}

template <typename Derived>
[[nodiscard]] ConfidenceBounds standardized_ci(const Eigen::DenseBase<Derived>& values, double level = 0.90) {
    return standardized_ci(EstimateSeries::plain(values.derived().eval()), level);
}

}  // namespace riskprec
