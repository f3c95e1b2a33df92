#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "riskprec/errors.hpp"

namespace riskprec {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
};

/// Adaptive Simpson quadrature with Richardson correction.
///
/// Intervals are bisected until |S(left) + S(right) - S(whole)| <= 15 * tol,
/// with the tolerance split between halves. Throws NumericalError when the
/// depth limit is reached without meeting the tolerance.
class AdaptiveSimpson {
public:
    explicit AdaptiveSimpson(double abs_tol = 1e-10, int max_depth = 50)
        : abs_tol_(abs_tol), max_depth_(max_depth) {}

    template <typename F>
    [[nodiscard]] QuadratureResult integrate(F&& f, double a, double b) const {
        QuadratureResult out;
        if (a == b) return out;
        const double fa = f(a);
        const double fb = f(b);
        out.evaluations = 2;
        bool converged = true;
        // Seed with a fixed 16-panel split so narrow features are not missed
        // by the first Simpson estimate.
        constexpr int kPanels = 16;
        const double h = (b - a) / kPanels;
        double total = 0.0;
        double err = 0.0;
        double left = a;
        double f_left = fa;
        for (int i = 0; i < kPanels; ++i) {
            const double right = (i + 1 == kPanels) ? b : a + (i + 1) * h;
            const double f_right = (i + 1 == kPanels) ? fb : f(right);
            const double mid = 0.5 * (left + right);
            const double f_mid = f(mid);
            out.evaluations += 2;
            const double s = (right - left) / 6.0 * (f_left + 4.0 * f_mid + f_right);
            total += recurse(f, left, right, f_left, f_mid, f_right, s, abs_tol_ / kPanels,
                             max_depth_, err, converged, out.evaluations);
            left = right;
            f_left = f_right;
        }
        out.value = total;
        out.error_estimate = err;
        if (!converged || !std::isfinite(total)) {
            std::ostringstream msg;
            msg << "adaptive Simpson failed on [" << a << ", " << b << "]: value=" << total
                << " error_estimate=" << err << " evaluations=" << out.evaluations
                << " tolerance=" << abs_tol_;
            throw NumericalError(msg.str());
        }
        return out;
    }

    [[nodiscard]] double tolerance() const noexcept { return abs_tol_; }

private:
    template <typename F>
    static double recurse(F& f, double a, double b, double fa, double fm, double fb,
                          double whole, double tol, int depth, double& err, bool& converged,
                          long& evals) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = f(lm);
        const double frm = f(rm);
        evals += 2;
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (std::fabs(delta) <= 15.0 * tol) {
            err += std::fabs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        if (depth <= 0) {
            converged = false;
            err += std::fabs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        return recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err, converged, evals) +
               recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err, converged, evals);
    }

    double abs_tol_;
    int max_depth_;
};

}  // namespace riskprec
