#include "riskprec/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "riskprec/errors.hpp"
#include "riskprec/quadrature.hpp"
#include "riskprec/special.hpp"

namespace riskprec {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double t_scale(int nu) { return std::sqrt((nu - 2.0) / nu); }

void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string short_fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

// Lower-piece probability mass sigma1 / (sigma1 + sigma2).
double lower_mass(const TwoPieceNormal& d) { return d.sigma1 / (d.sigma1 + d.sigma2); }

Moments two_piece_moments(const TwoPieceNormal& d) {
    const AdaptiveSimpson quad(1e-12);
    const double span = 12.0 * std::max(d.sigma1, d.sigma2);
    const double lo = d.mu - span;
    const double hi = d.mu + span;
    const DistributionSpec spec = d;
    // The density has a curvature break at mu, so each half is integrated separately.
    auto integral = [&](auto&& g) {
        auto h = [&](double x) { return g(x) * density(spec, x); };
        return quad.integrate(h, lo, d.mu).value + quad.integrate(h, d.mu, hi).value;
    };
    const double mean = integral([](double x) { return x; });
    const double m2 = integral([&](double x) { return (x - mean) * (x - mean); });
    const double m3 = integral([&](double x) { return std::pow(x - mean, 3); });
    const double m4 = integral([&](double x) { return std::pow(x - mean, 4); });
    return {mean, m2, m3 / std::pow(m2, 1.5), m4 / (m2 * m2)};
}

}  // namespace

TwoPieceNormal TwoPieceNormal::with_mean(double mean, double sigma1, double sigma2) {
    return {mean - special::kSqrt2OverPi * (sigma2 - sigma1), sigma1, sigma2};
}

void validate(const DistributionSpec& spec) {
    std::visit(Overloaded{
                   [](const Normal& d) {
                       require(std::isfinite(d.mu), "normal: mu must be finite");
                       require(std::isfinite(d.sigma) && d.sigma > 0.0,
                               "normal: sigma must be > 0, got " + fmt(d.sigma));
                   },
                   [](const TwoPieceNormal& d) {
                       require(std::isfinite(d.mu), "2pn: mu must be finite");
                       require(std::isfinite(d.sigma1) && d.sigma1 > 0.0,
                               "2pn: sigma1 must be > 0, got " + fmt(d.sigma1));
                       require(std::isfinite(d.sigma2) && d.sigma2 > 0.0,
                               "2pn: sigma2 must be > 0, got " + fmt(d.sigma2));
                   },
                   [](const StandardizedT& d) {
                       require(d.nu >= 5, "std_t: nu must be >= 5 so that the kurtosis exists, got " +
                                              std::to_string(d.nu));
                   },
               },
               spec);
}

std::string family_name(const DistributionSpec& spec) {
    return std::visit(Overloaded{
                          [](const Normal&) { return std::string("normal"); },
                          [](const TwoPieceNormal&) { return std::string("2pn"); },
                          [](const StandardizedT&) { return std::string("std_t"); },
                      },
                      spec);
}

std::string parameter_string(const DistributionSpec& spec) {
    return std::visit(
        Overloaded{
            [](const Normal& d) { return "mu=" + fmt(d.mu) + ";sigma=" + fmt(d.sigma); },
            [](const TwoPieceNormal& d) {
                return "mu=" + fmt(d.mu) + ";sigma1=" + fmt(d.sigma1) + ";sigma2=" + fmt(d.sigma2);
            },
            [](const StandardizedT& d) { return "nu=" + std::to_string(d.nu); },
        },
        spec);
}

std::string display_label(const DistributionSpec& spec) {
    return std::visit(
        Overloaded{
            [](const Normal& d) { return "N(" + short_fmt(d.mu) + "," + short_fmt(d.sigma) + ")"; },
            [](const TwoPieceNormal& d) {
                return "2PN(" + short_fmt(d.mu) + "," + short_fmt(d.sigma1) + "," +
                       short_fmt(d.sigma2) + ")";
            },
            [](const StandardizedT& d) { return "t(" + std::to_string(d.nu) + ")"; },
        },
        spec);
}

double density(const DistributionSpec& spec, double x) {
    return std::visit(
        Overloaded{
            [x](const Normal& d) { return special::normal_pdf((x - d.mu) / d.sigma) / d.sigma; },
            [x](const TwoPieceNormal& d) {
                const double a = special::kSqrt2OverPi / (d.sigma1 + d.sigma2);
                const double s = (x <= d.mu) ? d.sigma1 : d.sigma2;
                const double z = (x - d.mu) / s;
                return a * std::exp(-0.5 * z * z);
            },
            [x](const StandardizedT& d) {
                const double c = t_scale(d.nu);
                return special::student_t_pdf(x / c, d.nu) / c;
            },
        },
        spec);
}

double cdf(const DistributionSpec& spec, double x) {
    return std::visit(
        Overloaded{
            [x](const Normal& d) { return special::normal_cdf((x - d.mu) / d.sigma); },
            [x](const TwoPieceNormal& d) {
                // Each piece carries mass sigma_i / (sigma1 + sigma2) of a
                // half-normal with scale sigma_i.
                const double total = d.sigma1 + d.sigma2;
                if (x <= d.mu) {
                    return 2.0 * d.sigma1 / total * special::normal_cdf((x - d.mu) / d.sigma1);
                }
                return 1.0 - 2.0 * d.sigma2 / total * special::normal_sf((x - d.mu) / d.sigma2);
            },
            [x](const StandardizedT& d) { return special::student_t_cdf(x / t_scale(d.nu), d.nu); },
        },
        spec);
}

double survival(const DistributionSpec& spec, double x) {
    return std::visit(
        Overloaded{
            [x](const Normal& d) { return special::normal_sf((x - d.mu) / d.sigma); },
            [x, &spec](const TwoPieceNormal& d) {
                if (x <= d.mu) return 1.0 - cdf(spec, x);
                return 2.0 * d.sigma2 / (d.sigma1 + d.sigma2) *
                       special::normal_sf((x - d.mu) / d.sigma2);
            },
            [x](const StandardizedT& d) { return special::student_t_sf(x / t_scale(d.nu), d.nu); },
        },
        spec);
}

double quantile(const DistributionSpec& spec, double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("quantile requires p in (0,1), got " + fmt(p));
    }
    return std::visit(
        Overloaded{
            [p](const Normal& d) { return d.mu + d.sigma * special::normal_quantile(p); },
            [p](const TwoPieceNormal& d) {
                const double total = d.sigma1 + d.sigma2;
                const double split = lower_mass(d);
                if (p <= split) {
                    return d.mu + d.sigma1 * special::normal_quantile(p * total / (2.0 * d.sigma1));
                }
                // Upper piece: solve sf = 1 - p on the scaled half-normal.
                const double tail = (1.0 - p) * total / (2.0 * d.sigma2);
                return d.mu - d.sigma2 * special::normal_quantile(tail);
            },
            [p](const StandardizedT& d) {
                return t_scale(d.nu) * special::student_t_quantile(p, d.nu);
            },
        },
        spec);
}

Moments analytic_moments(const DistributionSpec& spec) {
    validate(spec);
    return std::visit(Overloaded{
                          [](const Normal& d) { return Moments{d.mu, d.sigma * d.sigma, 0.0, 3.0}; },
                          [](const TwoPieceNormal& d) { return two_piece_moments(d); },
                          [](const StandardizedT& d) {
                              if (d.nu <= 4) {
                                  throw UnsupportedMomentError("std_t kurtosis requires nu > 4");
                              }
                              const double nu = d.nu;
                              return Moments{0.0, 1.0, 0.0, 3.0 * (nu - 2.0) / (nu - 4.0)};
                          },
                      },
                      spec);
}

std::optional<LocationScale> location_scale(const DistributionSpec& spec) {
    if (const auto* d = std::get_if<Normal>(&spec)) return LocationScale{d->mu, d->sigma};
    return std::nullopt;
}

namespace detail {

double draw_standard_normal(RandomStream& stream) {
    return special::normal_quantile(stream.uniform());
}

double draw_gamma(RandomStream& stream, double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = draw_standard_normal(stream);
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = stream.uniform();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

}  // namespace detail

void sample_into(const DistributionSpec& spec, RandomStream& stream, Eigen::Ref<Eigen::VectorXd> out) {
    validate(spec);
    std::visit(Overloaded{
                   [&](const Normal& d) {
                       for (Eigen::Index i = 0; i < out.size(); ++i) {
                           out[i] = d.mu + d.sigma * detail::draw_standard_normal(stream);
                       }
                   },
                   [&](const TwoPieceNormal& d) {
                       const double split = lower_mass(d);
                       for (Eigen::Index i = 0; i < out.size(); ++i) {
                           const bool lower = stream.uniform() < split;
                           // |Z| = -Phi^{-1}(u/2): the lower half of the quantile
                           // range, where u/2 keeps full resolution.
                           const double half = -special::normal_quantile(0.5 * stream.uniform());
                           out[i] = lower ? d.mu - d.sigma1 * half : d.mu + d.sigma2 * half;
                       }
                   },
                   [&](const StandardizedT& d) {
                       const double nu = d.nu;
                       for (Eigen::Index i = 0; i < out.size(); ++i) {
                           const double z = detail::draw_standard_normal(stream);
                           const double chi2 = 2.0 * detail::draw_gamma(stream, 0.5 * nu);
                           // t * sqrt((nu-2)/nu) with t = z sqrt(nu / chi2)
                           out[i] = z * std::sqrt((nu - 2.0) / chi2);
                       }
                   },
               },
               spec);
}

Eigen::VectorXd sample(const DistributionSpec& spec, RandomStream& stream, Eigen::Index count) {
    if (count < 1) throw DomainError("sample count must be >= 1");
    Eigen::VectorXd out(count);
    sample_into(spec, stream, out);
    return out;
}

}  // namespace riskprec
