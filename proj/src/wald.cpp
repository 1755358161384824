#include "wclust/wald.hpp"

#include "wclust/point_set.hpp"
#include "wclust/statfn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wclust::wald {

WaldConfig WaldConfig::make(int dim, double gamma, double sigma0, double tau) {
    if (dim < 1) {
        throw std::domain_error("WaldConfig: dimension must be at least 1");
    }
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) {
        throw std::domain_error("WaldConfig: sigma0 must be positive");
    }
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw std::domain_error("WaldConfig: tau must be non-negative");
    }
    WaldConfig cfg;
    cfg.dim = dim;
    cfg.gamma = gamma;
    cfg.tau = tau;
    cfg.sigma0 = sigma0;
    cfg.threshold = sigma0 * statfn::marcum_threshold(0.5 * dim, tau / sigma0, gamma);
    return cfg;
}

namespace {
void check_dim(int dim, std::size_t got) {
    if (static_cast<std::size_t>(dim) != got) {
        throw std::invalid_argument("wald: expected a vector of dimension " + std::to_string(dim) +
                                    ", got " + std::to_string(got));
    }
}
}  // namespace

Decision decide_norm(const WaldConfig& cfg, double z_norm) noexcept {
    return z_norm <= cfg.threshold ? Decision::AcceptH0 : Decision::RejectH0;
}

Decision decide(const WaldConfig& cfg, std::span<const double> z) {
    check_dim(cfg.dim, z.size());
    return decide_norm(cfg, norm(z));
}

double p_value(int dim, double sigma0, double tau, std::span<const double> z) {
    check_dim(dim, z.size());
    if (!(sigma0 > 0.0)) {
        throw std::domain_error("p_value: sigma0 must be positive");
    }
    return statfn::marcum_q(0.5 * dim, tau / sigma0, norm(z) / sigma0);
}

double fusion_sigma(double r, double n_k, double n_l) {
    if (!(n_k > 0.0) || !(n_l > 0.0)) {
        throw std::invalid_argument("fusion_sigma: support counts must be positive");
    }
    if (!(r > 0.0)) {
        throw std::domain_error("fusion_sigma: r must be positive");
    }
    return r * std::sqrt(1.0 / n_k + 1.0 / n_l);
}

}  // namespace wclust::wald
