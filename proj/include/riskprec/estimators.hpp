#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "riskprec/errors.hpp"

namespace riskprec {

enum class MeasureKind { var, es, srm };

[[nodiscard]] inline std::string_view to_string(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::var: return "var";
        case MeasureKind::es: return "es";
        case MeasureKind::srm: return "srm";
    }
    return "?";
}

/// One risk measure with its conditioning parameter: the confidence level
/// alpha for VaR and ES, the absolute risk aversion k for the exponential SRM.
struct RiskMeasureSpec {
    MeasureKind kind = MeasureKind::var;
    double param = 0.95;

    [[nodiscard]] static RiskMeasureSpec var(double alpha) { return {MeasureKind::var, alpha}; }
    [[nodiscard]] static RiskMeasureSpec es(double alpha) { return {MeasureKind::es, alpha}; }
    [[nodiscard]] static RiskMeasureSpec srm(double k) { return {MeasureKind::srm, k}; }

    void validate() const {
        if (kind == MeasureKind::srm) {
            if (!(std::isfinite(param) && param > 0.0)) {
                throw DomainError("srm: risk aversion k must be > 0, got " + std::to_string(param));
            }
        } else if (!(param > 0.0 && param < 1.0)) {
            throw DomainError(std::string(to_string(kind)) + ": alpha must lie in (0,1), got " +
                              std::to_string(param));
        }
    }

    friend bool operator==(const RiskMeasureSpec&, const RiskMeasureSpec&) = default;
};

/// How many losses ES averages: the m highest (the textbook tail), or the
/// m + 1 highest, i.e. the VaR order statistic and everything above it.
enum class EsTail { top_m, top_m_plus_one };

/// SRM weights over ascending order statistics: exact integrals of phi over
/// ((i-1)/n, i/n] (sum to one), or point values phi(i/n) / n.
enum class SrmWeighting { bin_integral, density_point };

struct EstimatorConventions {
    EsTail es_tail = EsTail::top_m;
    SrmWeighting srm_weighting = SrmWeighting::bin_integral;

    /// Definitional estimators: ES over the m highest losses, SRM weights that sum to one.
    [[nodiscard]] static constexpr EstimatorConventions exact() {
        return {EsTail::top_m, SrmWeighting::bin_integral};
    }
    /// ES over the m + 1 highest losses, SRM weights phi(i/n) / n.
    [[nodiscard]] static constexpr EstimatorConventions classic() {
        return {EsTail::top_m_plus_one, SrmWeighting::density_point};
    }

    [[nodiscard]] std::string_view name() const {
        if (*this == exact()) return "exact";
        if (*this == classic()) return "classic";
        return "custom";
    }

    friend constexpr bool operator==(const EstimatorConventions&, const EstimatorConventions&) = default;
};

/// Ascending loss sample with at least two observations.
template <typename Scalar = double>
class SortedSample {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    /// Sorts a copy of `losses` (stable, ties keep their order).
    template <typename Derived>
    explicit SortedSample(const Eigen::DenseBase<Derived>& losses) : losses_(losses) {
        std::stable_sort(losses_.data(), losses_.data() + losses_.size());
        check_size();
    }

    explicit SortedSample(const std::vector<Scalar>& losses)
        : SortedSample(Eigen::Map<const Vector>(losses.data(), static_cast<Eigen::Index>(losses.size()))) {}

    /// Adopts an already ascending vector; throws DomainError if it is not.
    [[nodiscard]] static SortedSample from_sorted(Vector losses) {
        for (Eigen::Index i = 1; i < losses.size(); ++i) {
            if (losses[i] < losses[i - 1]) throw DomainError("sample is not in ascending order");
        }
        return SortedSample(std::move(losses), AlreadySorted{});
    }

    [[nodiscard]] const Vector& losses() const noexcept { return losses_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return losses_.size(); }

private:
    struct AlreadySorted {};
    SortedSample(Vector losses, AlreadySorted) : losses_(std::move(losses)) { check_size(); }

    void check_size() const {
        if (losses_.size() < 2) throw DomainError("a loss sample needs at least 2 observations");
    }

    Vector losses_;
};

/// m = floor((1 - alpha) n): the number of losses strictly beyond the VaR
/// order statistic. The guard absorbs representation error in (1 - alpha) n
/// so that e.g. alpha = 0.9, n = 1000 gives exactly 100.
[[nodiscard]] inline Eigen::Index tail_count(Eigen::Index n, double alpha) {
    return static_cast<Eigen::Index>(std::floor((1.0 - alpha) * static_cast<double>(n) + 1e-9));
}

// Estimators over an ascending sequence. Callers guarantee the ordering;
// SortedSample overloads below enforce it.

template <typename Derived>
[[nodiscard]] typename Derived::Scalar estimate_var(const Eigen::DenseBase<Derived>& sorted, double alpha) {
    RiskMeasureSpec::var(alpha).validate();
    const Eigen::Index n = sorted.size();
    const Eigen::Index m = tail_count(n, alpha);
    if (m + 1 > n) {
        throw InsufficientTailError("VaR at alpha=" + std::to_string(alpha) + " needs the " +
                                    std::to_string(m + 1) + "-th highest of only " +
                                    std::to_string(n) + " losses");
    }
    return sorted.derived().coeff(n - m - 1);
}

template <typename Derived>
[[nodiscard]] typename Derived::Scalar estimate_es(const Eigen::DenseBase<Derived>& sorted, double alpha,
                                                   EsTail tail = EsTail::top_m) {
    using Scalar = typename Derived::Scalar;
    RiskMeasureSpec::es(alpha).validate();
    const Eigen::Index n = sorted.size();
    const Eigen::Index m = tail_count(n, alpha);
    const Eigen::Index count = (tail == EsTail::top_m) ? m : m + 1;
    if (count < 1 || count > n) {
        throw InsufficientTailError("ES at alpha=" + std::to_string(alpha) + " with n=" +
                                    std::to_string(n) + " has no tail losses to average");
    }
    Scalar sum(0);
    for (Eigen::Index i = n - count; i < n; ++i) sum += sorted.derived().coeff(i);
    return sum / static_cast<Scalar>(count);
}

/// Exponential risk-aversion weights for ascending order statistics 1..n.
template <typename Scalar = double>
[[nodiscard]] Eigen::Matrix<Scalar, Eigen::Dynamic, 1> srm_weights(Eigen::Index n, double k,
                                                                   SrmWeighting weighting = SrmWeighting::bin_integral) {
    RiskMeasureSpec::srm(k).validate();
    if (n < 1) throw DomainError("srm weights need n >= 1");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(n);
    const double nn = static_cast<double>(n);
    // 1 - e^{-k} through expm1 keeps the k -> 0 limit accurate.
    const double norm = -std::expm1(-k);
    if (weighting == SrmWeighting::bin_integral) {
        const double bin = -std::expm1(-k / nn);
        for (Eigen::Index i = 1; i <= n; ++i) {
            w[i - 1] = static_cast<Scalar>(std::exp(-k * (1.0 - i / nn)) * bin / norm);
        }
    } else {
        for (Eigen::Index i = 1; i <= n; ++i) {
            w[i - 1] = static_cast<Scalar>(k * std::exp(-k * (1.0 - i / nn)) / (norm * nn));
        }
    }
    return w;
}

/// Weighted sum in ascending index order.
template <typename Derived, typename WDerived>
[[nodiscard]] typename Derived::Scalar weighted_sum(const Eigen::DenseBase<Derived>& sorted,
                                                    const Eigen::DenseBase<WDerived>& weights) {
    using Scalar = typename Derived::Scalar;
    if (sorted.size() != weights.size()) throw DomainError("weight/sample length mismatch");
    Scalar acc(0);
    for (Eigen::Index i = 0; i < sorted.size(); ++i) acc += weights.derived().coeff(i) * sorted.derived().coeff(i);
    return acc;
}

template <typename Derived>
[[nodiscard]] typename Derived::Scalar estimate_srm(const Eigen::DenseBase<Derived>& sorted, double k,
                                                    SrmWeighting weighting = SrmWeighting::bin_integral) {
    using Scalar = typename Derived::Scalar;
    return weighted_sum(sorted, srm_weights<Scalar>(sorted.size(), k, weighting));
}

template <typename Scalar>
[[nodiscard]] Scalar estimate_var(const SortedSample<Scalar>& s, double alpha) {
    return estimate_var(s.losses(), alpha);
}

template <typename Scalar>
[[nodiscard]] Scalar estimate_es(const SortedSample<Scalar>& s, double alpha, EsTail tail = EsTail::top_m) {
    return estimate_es(s.losses(), alpha, tail);
}

template <typename Scalar>
[[nodiscard]] Scalar estimate_srm(const SortedSample<Scalar>& s, double k,
                                  SrmWeighting weighting = SrmWeighting::bin_integral) {
    return estimate_srm(s.losses(), k, weighting);
}

/// A measure bound to one sample size, with SRM weights precomputed so the
/// Monte Carlo loop can evaluate it on many samples.
class BoundEstimator {
public:
    BoundEstimator(RiskMeasureSpec measure, Eigen::Index n, EstimatorConventions conventions)
        : measure_(measure), n_(n), conventions_(conventions) {
        measure_.validate();
        if (n < 2) throw DomainError("sample size must be >= 2");
        check_preconditions();
        if (measure_.kind == MeasureKind::srm) {
            weights_ = srm_weights<double>(n, measure_.param, conventions_.srm_weighting);
            weight_sum_ = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) weight_sum_ += weights_[i];
        }
    }

    template <typename Derived>
    [[nodiscard]] double operator()(const Eigen::DenseBase<Derived>& sorted) const {
        switch (measure_.kind) {
            case MeasureKind::var: return estimate_var(sorted, measure_.param);
            case MeasureKind::es: return estimate_es(sorted, measure_.param, conventions_.es_tail);
            case MeasureKind::srm: return weighted_sum(sorted, weights_);
        }
        return 0.0;
    }

    /// Coefficient c with estimate(x + mu) = estimate(x) + c * mu: one for VaR
    /// and ES, the weight total for SRM.
    [[nodiscard]] double location_weight() const noexcept {
        return measure_.kind == MeasureKind::srm ? weight_sum_ : 1.0;
    }

    [[nodiscard]] const RiskMeasureSpec& measure() const noexcept { return measure_; }
    [[nodiscard]] Eigen::Index sample_size() const noexcept { return n_; }

private:
    void check_preconditions() const {
        if (measure_.kind == MeasureKind::srm) return;
        const Eigen::Index m = tail_count(n_, measure_.param);
        const bool es_strict = measure_.kind == MeasureKind::es && conventions_.es_tail == EsTail::top_m;
        if (m + 1 > n_ || (es_strict && m < 1)) {
            throw InsufficientTailError(std::string(to_string(measure_.kind)) + " at alpha=" +
                                        std::to_string(measure_.param) + " is undefined for n=" +
                                        std::to_string(n_));
        }
    }

    RiskMeasureSpec measure_;
    Eigen::Index n_;
    EstimatorConventions conventions_;
    Eigen::VectorXd weights_;
    double weight_sum_ = 1.0;
};

}  // namespace riskprec
