#pragma once

#include <cstddef>
#include <span>

// Wald tests on the mean of a spherical Gaussian vector N(xi, sigma0^2 I_d):
// accept H0 (xi = 0) iff |z| <= sigma0 * lambda_gamma(tau / sigma0).
namespace wclust::wald {

enum class Decision { AcceptH0, RejectH0 };

struct WaldConfig {
    int dim = 1;
    double gamma = 1e-3;
    double tau = 0.0;
    double sigma0 = 1.0;
    double threshold = 0.0;  // in the units of z

    // Builds a config and caches its threshold.
    static WaldConfig make(int dim, double gamma, double sigma0 = 1.0, double tau = 0.0);
};

Decision decide(const WaldConfig& cfg, std::span<const double> z);
// Same test when only |z| is known.
Decision decide_norm(const WaldConfig& cfg, double z_norm) noexcept;

// Plausibility of H0 given z: Q_{d/2}(tau / sigma0, |z| / sigma0).
double p_value(int dim, double sigma0, double tau, std::span<const double> z);

// Scale of the difference of two centroid estimates with supports n_k, n_l:
// r * sqrt(1/n_k + 1/n_l).
// Counts are real-valued so that surrogate supports such as N / K need no rounding.
double fusion_sigma(double r, double n_k, double n_l);

}  // namespace wclust::wald
