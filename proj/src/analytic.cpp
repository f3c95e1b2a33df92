#include "riskprec/analytic.hpp"

#include <cmath>
#include <variant>

#include "riskprec/errors.hpp"
#include "riskprec/quadrature.hpp"
#include "riskprec/special.hpp"

namespace riskprec {

namespace {

constexpr double kQuadTol = 1e-10;

// Location of a curvature break in the density, if any.
std::optional<double> density_kink(const DistributionSpec& dist) {
    if (const auto* d = std::get_if<TwoPieceNormal>(&dist)) return d->mu;
    return std::nullopt;
}

// Integral of g over [a, b], split at the density kink when it lies inside.
template <typename G>
double integrate_split(const DistributionSpec& dist, G&& g, double a, double b) {
    const AdaptiveSimpson quad(kQuadTol);
    if (const auto kink = density_kink(dist); kink && *kink > a && *kink < b) {
        return quad.integrate(g, a, *kink).value + quad.integrate(g, *kink, b).value;
    }
    return quad.integrate(g, a, b).value;
}

}  // namespace

double upper_partial_expectation(const DistributionSpec& dist, double u) {
    if (const auto* d = std::get_if<Normal>(&dist)) {
        const double z = (u - d->mu) / d->sigma;
        return d->mu * special::normal_sf(z) + d->sigma * special::normal_pdf(z);
    }
    if (const auto* d = std::get_if<TwoPieceNormal>(&dist)) {
        const double total = d->sigma1 + d->sigma2;
        const double mean = d->mu + special::kSqrt2OverPi * (d->sigma2 - d->sigma1);
        if (u <= d->mu) {
            // Lower piece below u: E[X 1{X <= u}] = c1 (mu Phi(z) - sigma1 phi(z)).
            const double z = (u - d->mu) / d->sigma1;
            const double c1 = 2.0 * d->sigma1 / total;
            return mean - c1 * (d->mu * special::normal_cdf(z) - d->sigma1 * special::normal_pdf(z));
        }
        const double z = (u - d->mu) / d->sigma2;
        const double c2 = 2.0 * d->sigma2 / total;
        return c2 * (d->mu * special::normal_sf(z) + d->sigma2 * special::normal_pdf(z));
    }
    const auto& d = std::get<StandardizedT>(dist);
    const double nu = d.nu;
    const double s = std::sqrt((nu - 2.0) / nu);
    const double tau = u / s;
    return s * (nu + tau * tau) / (nu - 1.0) * special::student_t_pdf(tau, nu);
}

double true_var(const DistributionSpec& dist, double alpha) {
    validate(dist);
    RiskMeasureSpec::var(alpha).validate();
    return quantile(dist, alpha);
}

double true_es(const DistributionSpec& dist, double alpha) {
    validate(dist);
    RiskMeasureSpec::es(alpha).validate();
    if (const auto* d = std::get_if<Normal>(&dist)) {
        const double z = special::normal_quantile(alpha);
        return d->mu + d->sigma * special::normal_pdf(z) / (1.0 - alpha);
    }
    const double lo = quantile(dist, alpha);
    const double hi = quantile(dist, 1.0 - kTailCut);
    if (hi <= lo) return upper_partial_expectation(dist, lo) / (1.0 - alpha);
    auto integrand = [&](double x) { return x * density(dist, x); };
    const double body = integrate_split(dist, integrand, lo, hi);
    return (body + upper_partial_expectation(dist, hi)) / (1.0 - alpha);
}

double true_srm(const DistributionSpec& dist, double k) {
    validate(dist);
    RiskMeasureSpec::srm(k).validate();
    if (const auto ls = location_scale(dist); ls && !(ls->location == 0.0 && ls->scale == 1.0)) {
        return ls->location + ls->scale * true_srm(Normal{0.0, 1.0}, k);
    }
    const double norm = -std::expm1(-k);
    // phi(p) written in terms of the upper tail 1 - p so it stays accurate near p = 1.
    auto phi_of_tail = [&](double tail) { return k * std::exp(-k * tail) / norm; };

    const double lo = quantile(dist, kTailCut);
    const double hi = quantile(dist, 1.0 - kTailCut);
    auto integrand = [&](double x) { return phi_of_tail(survival(dist, x)) * x * density(dist, x); };
    const double body = integrate_split(dist, integrand, lo, hi);

    // phi varies by a factor e^{-k eps} across each cut tail; its midpoint
    // value times the tail's partial expectation is exact to O(k eps).
    const double mean = analytic_moments(dist).mean;
    const double upper = phi_of_tail(0.5 * kTailCut) * upper_partial_expectation(dist, hi);
    const double lower = phi_of_tail(1.0 - 0.5 * kTailCut) * (mean - upper_partial_expectation(dist, lo));
    return body + upper + lower;
}

TrueRiskValue true_value(const DistributionSpec& dist, const RiskMeasureSpec& measure) {
    measure.validate();
    TrueRiskValue out{measure, dist, 0.0, ValueMethod::closed_form};
    switch (measure.kind) {
        case MeasureKind::var:
            out.value = true_var(dist, measure.param);
            break;
        case MeasureKind::es:
            out.value = true_es(dist, measure.param);
            if (!std::holds_alternative<Normal>(dist)) out.method = ValueMethod::quadrature;
            break;
        case MeasureKind::srm:
            out.value = true_srm(dist, measure.param);
            out.method = ValueMethod::quadrature;
            break;
    }
    if (!std::isfinite(out.value)) throw NumericalError("true value is not finite");
    return out;
}

}  // namespace riskprec
