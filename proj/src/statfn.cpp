#include "wclust/statfn.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace wclust::statfn {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 1000000;
constexpr double kTiny = 1e-300;

void require_finite_nonneg(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) {
        throw std::domain_error(std::string(what) + " must be finite and non-negative");
    }
}

// log(x^a e^-x / Gamma(a)), the common prefactor of both expansions.
double log_prefix(double a, double x) {
    return a * std::log(x) - x - std::lgamma(a);
}

// P(a, x) by its power series; valid for x < a + 1.
double lower_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) {
            break;
        }
    }
    return sum * std::exp(log_prefix(a, x));
}

// Continued fraction for Q(a, x) without its prefactor; valid for x >= a + 1.
double upper_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) {
            break;
        }
    }
    return h;
}

void check_gamma_args(double a, double x) {
    if (!std::isfinite(a) || a <= 0.0) {
        throw std::domain_error("incomplete gamma: shape must be positive and finite");
    }
    if (std::isnan(x) || x < 0.0) {
        throw std::domain_error("incomplete gamma: argument must be non-negative");
    }
}

}  // namespace

double gamma_p(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return lower_series(a, x);
    return 1.0 - std::exp(log_prefix(a, x)) * upper_fraction(a, x);
}

double gamma_q(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - lower_series(a, x);
    return std::exp(log_prefix(a, x)) * upper_fraction(a, x);
}

double log_gamma_q(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
    if (x < a + 1.0) return std::log1p(-lower_series(a, x));
    return log_prefix(a, x) + std::log(upper_fraction(a, x));
}

double marcum_q(double order, double tau, double x) {
    if (!std::isfinite(order) || order <= 0.0) {
        throw std::domain_error("marcum_q: order must be positive and finite");
    }
    require_finite_nonneg(tau, "marcum_q: tau");
    require_finite_nonneg(x, "marcum_q: x");

    if (x == 0.0) return 1.0;
    const double y = 0.5 * x * x;
    if (tau == 0.0) {
        return gamma_q(order, y);
    }

    // Poisson(lambda) mixture of central terms, summed outward from the mode
    // so that large noncentralities do not underflow the leading weights.
    const double lambda = 0.5 * tau * tau;
    const double log_lambda = std::log(lambda);
    const long mode = static_cast<long>(std::floor(lambda));
    const double mode_weight =
        std::exp(-lambda + static_cast<double>(mode) * log_lambda - std::lgamma(static_cast<double>(mode) + 1.0));
    constexpr double kTruncation = 1e-12;

    double sum = mode_weight * gamma_q(order + static_cast<double>(mode), y);

    double w = mode_weight;
    for (long j = mode + 1;; ++j) {
        w *= lambda / static_cast<double>(j);
        sum += w * gamma_q(order + static_cast<double>(j), y);
        const double ratio = lambda / static_cast<double>(j + 1);
        if (ratio < 1.0 && w / (1.0 - ratio) < kTruncation * 1e-2) break;
        if (w == 0.0) break;
    }
    w = mode_weight;
    for (long j = mode - 1; j >= 0; --j) {
        w *= static_cast<double>(j + 1) / lambda;
        sum += w * gamma_q(order + static_cast<double>(j), y);
        const double ratio = static_cast<double>(j) / lambda;
        if (ratio < 1.0 && w / (1.0 - ratio) < kTruncation * 1e-2) break;
        if (w == 0.0) break;
    }
    return std::min(1.0, std::max(0.0, sum));
}

double marcum_threshold(double order, double tau, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::domain_error("marcum_threshold: gamma must lie in (0, 1)");
    }
    double lo = 0.0;
    double hi = std::max(1.0, tau + std::sqrt(2.0 * order));
    while (marcum_q(order, tau, hi) > gamma) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) {
            throw std::domain_error("marcum_threshold: failed to bracket the threshold");
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (marcum_q(order, tau, mid) > gamma) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double threshold_mu(int d, double gamma) {
    if (d < 1) {
        throw std::domain_error("threshold_mu: dimension must be at least 1");
    }
    return marcum_threshold(0.5 * d, 0.0, gamma);
}

void KernelSpec::validate() const {
    if (dim < 1) {
        throw std::domain_error("kernel dimension must be at least 1");
    }
    if (kind == KernelKind::Gaussian && !(beta > 0.0 && sigma > 0.0)) {
        throw std::domain_error("gaussian kernel needs beta > 0 and sigma > 0");
    }
}

double weight(const KernelSpec& kernel, double u) {
    if (std::isnan(u) || u < 0.0) {
        throw std::domain_error("weight: squared distance must be non-negative");
    }
    switch (kernel.kind) {
        case KernelKind::WaldPValue:
            return gamma_q(0.5 * kernel.dim, 0.25 * u);
        case KernelKind::Gaussian:
            return std::exp(-kernel.beta * u / (kernel.sigma * kernel.sigma));
    }
    return 0.0;
}

double log_weight(const KernelSpec& kernel, double u) {
    if (std::isnan(u) || u < 0.0) {
        throw std::domain_error("log_weight: squared distance must be non-negative");
    }
    switch (kernel.kind) {
        case KernelKind::WaldPValue:
            return log_gamma_q(0.5 * kernel.dim, 0.25 * u);
        case KernelKind::Gaussian:
            return -kernel.beta * u / (kernel.sigma * kernel.sigma);
    }
    return 0.0;
}

namespace {

// E[g(|X|^2)] for X ~ N(0, I_d), integrated over the chi-distributed radius
// t = |X| so that the d = 1 density has no endpoint singularity.
template <typename G>
double chi_square_expectation(int d, G&& g) {
    const double half = 0.5 * d;
    const double log_norm = -(half - 1.0) * std::log(2.0) - std::lgamma(half);
    auto integrand = [&](double t) {
        if (t <= 0.0) {
            return d == 1 ? std::exp(log_norm) * g(0.0) : 0.0;
        }
        const double log_density = log_norm + (d - 1) * std::log(t) - 0.5 * t * t;
        return std::exp(log_density) * g(t * t);
    };
    const double mode = std::sqrt(std::max(0.0, d - 1.0));
    const double upper = mode + 40.0;
    using boost::math::quadrature::gauss_kronrod;
    // Splitting at the mode keeps the adaptive rule from missing the narrow
    // peak of the high-dimensional chi density.
    double total = 0.0;
    if (mode > 0.0) {
        total += gauss_kronrod<double, 61>::integrate(integrand, 0.0, mode, 20, 1e-14);
    }
    total += gauss_kronrod<double, 61>::integrate(integrand, mode, upper, 20, 1e-14);
    return total;
}

}  // namespace

RSquared r_squared(const KernelSpec& kernel, RSquaredMethod method, std::size_t sample_count,
                   std::uint64_t seed) {
    kernel.validate();
    RSquared out;
    out.dim = kernel.dim;
    out.method = method;

    if (method == RSquaredMethod::Quadrature) {
        const double mean_w = chi_square_expectation(kernel.dim, [&](double s) { return weight(kernel, s); });
        const double mean_w2 = chi_square_expectation(kernel.dim, [&](double s) {
            const double w = weight(kernel, s);
            return w * w;
        });
        out.value = mean_w2 / (mean_w * mean_w);
        return out;
    }

    if (sample_count < 1000) {
        throw std::domain_error("r_squared: Monte-Carlo estimate needs at least 1000 samples");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    for (std::size_t i = 0; i < sample_count; ++i) {
        double s = 0.0;
        for (int k = 0; k < kernel.dim; ++k) {
            const double x = normal(rng);
            s += x * x;
        }
        const double w = weight(kernel, s);
        sum_w += w;
        sum_w2 += w * w;
    }
    const double n = static_cast<double>(sample_count);
    out.value = (sum_w2 / n) / ((sum_w / n) * (sum_w / n));
    out.sample_count = sample_count;
    return out;
}

}  // namespace wclust::statfn
