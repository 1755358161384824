#pragma once

#include <cstddef>
#include <cstdint>

// Special functions, weight kernels and the variance-inflation constant r^2
// shared by every clustering routine.
namespace wclust::statfn {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
// Series expansion below x = a + 1, modified Lentz continued fraction above.
double gamma_p(double a, double x);
double gamma_q(double a, double x);
// log Q(a, x); stays finite far into the upper tail where Q underflows.
double log_gamma_q(double a, double x);

// Generalized Marcum function Q_a(tau, x): the probability that a noncentral
// chi-square variable with 2a degrees of freedom and noncentrality tau^2
// exceeds x^2. Throws std::domain_error on negative or non-finite input.
double marcum_q(double order, double tau, double x);

// Smallest x with marcum_q(order, tau, x) <= gamma, solved by bracketing and
// bisection on the monotone survival function.
double marcum_threshold(double order, double tau, double gamma);

// Normalized Wald threshold mu(gamma): marcum_q(d/2, 0, mu) == gamma.
double threshold_mu(int d, double gamma);

enum class KernelKind { WaldPValue, Gaussian };

struct KernelSpec {
    KernelKind kind = KernelKind::WaldPValue;
    int dim = 1;
    double beta = 1.0;   // Gaussian only
    double sigma = 1.0;  // Gaussian only, same units as sqrt(u)

    static KernelSpec wald(int d) { return {KernelKind::WaldPValue, d, 1.0, 1.0}; }
    static KernelSpec gaussian(int d, double beta, double sigma = 1.0) {
        return {KernelKind::Gaussian, d, beta, sigma};
    }

    void validate() const;
};

// Weight w(u) applied to a squared distance u >= 0.
//   WaldPValue: Q_{d/2}(0, sqrt(u / 2))
//   Gaussian:   exp(-beta * u / sigma^2)
double weight(const KernelSpec& kernel, double u);
double log_weight(const KernelSpec& kernel, double u);

enum class RSquaredMethod { Quadrature, MonteCarlo };

struct RSquared {
    double value = 1.0;
    int dim = 1;
    RSquaredMethod method = RSquaredMethod::Quadrature;
    std::size_t sample_count = 0;
};

// r^2 = E[w(|X|^2)^2] / E[w(|X|^2)]^2 with X ~ N(0, I_d).
RSquared r_squared(const KernelSpec& kernel, RSquaredMethod method = RSquaredMethod::Quadrature,
                   std::size_t sample_count = 10000, std::uint64_t seed = 0);

inline RSquared r_squared(int d, RSquaredMethod method = RSquaredMethod::Quadrature,
                          std::size_t sample_count = 10000, std::uint64_t seed = 0) {
    return r_squared(KernelSpec::wald(d), method, sample_count, seed);
}

}  // namespace wclust::statfn
