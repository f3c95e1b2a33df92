#pragma once

#include <optional>
#include <string>
#include <variant>

#include <Eigen/Core>

#include "riskprec/random_stream.hpp"

namespace riskprec {

struct Normal {
    double mu = 0.0;
    double sigma = 1.0;
};

/// Two-piece normal in the (mu, sigma1, sigma2) form: sigma1 scales the half
/// below the mode mu, sigma2 the half above it. The density is
/// A exp(-(x-mu)^2 / (2 sigma_i^2)) with A = sqrt(2/pi) / (sigma1 + sigma2).
struct TwoPieceNormal {
    double mu = 0.0;
    double sigma1 = 1.0;
    double sigma2 = 1.0;

    /// The member of the family with the requested mean.
    [[nodiscard]] static TwoPieceNormal with_mean(double mean, double sigma1, double sigma2);
};

/// Student-t with nu degrees of freedom rescaled by sqrt((nu-2)/nu) to unit variance.
struct StandardizedT {
    int nu = 5;
};

using DistributionSpec = std::variant<Normal, TwoPieceNormal, StandardizedT>;

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;  // non-excess
};

/// Throws DomainError when a parameter is outside its domain.
void validate(const DistributionSpec& spec);

/// "normal", "2pn" or "std_t"; the config-file family tags.
[[nodiscard]] std::string family_name(const DistributionSpec& spec);
/// Compact "key=value;..." rendering with full precision.
[[nodiscard]] std::string parameter_string(const DistributionSpec& spec);
/// Human-readable label such as "N(0,1)", "2PN(-0.5186,0.65,1.3)", "t(5)".
[[nodiscard]] std::string display_label(const DistributionSpec& spec);

[[nodiscard]] double density(const DistributionSpec& spec, double x);
[[nodiscard]] double cdf(const DistributionSpec& spec, double x);
/// Upper tail 1 - F(x), computed without cancellation in the right tail.
[[nodiscard]] double survival(const DistributionSpec& spec, double x);
/// q with F(q) = p; throws DomainError for p outside (0, 1).
[[nodiscard]] double quantile(const DistributionSpec& spec, double p);

/// Population moments. Normal and standardized t in closed form; the two-piece
/// normal by adaptive quadrature of its density.
[[nodiscard]] Moments analytic_moments(const DistributionSpec& spec);

/// Mean and standard deviation when the spec is a location-scale transform of
/// a parameter-free base draw (only the normal family here).
struct LocationScale {
    double location = 0.0;
    double scale = 1.0;
};
[[nodiscard]] std::optional<LocationScale> location_scale(const DistributionSpec& spec);

/// Writes out.size() independent draws.
void sample_into(const DistributionSpec& spec, RandomStream& stream, Eigen::Ref<Eigen::VectorXd> out);

[[nodiscard]] Eigen::VectorXd sample(const DistributionSpec& spec, RandomStream& stream,
                                     Eigen::Index count);

namespace detail {
/// Standard normal via inverse CDF, one uniform per draw.
[[nodiscard]] double draw_standard_normal(RandomStream& stream);
/// Gamma(shape, 1) by Marsaglia-Tsang; shape >= 1.
[[nodiscard]] double draw_gamma(RandomStream& stream, double shape);
}  // namespace detail

}  // namespace riskprec
