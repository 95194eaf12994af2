#pragma once

#include <cmath>
#include <stdexcept>

#include "reins/params.hpp"

namespace reins {

/// Characteristic quadratic of the reflected surplus ODE at level b:
///   Phi(b, g) = (lambda M2(b)/2) g^2 + lambda (theta M1(b) - (theta-eta) mu) g - rho.
/// Its negative root gamma^-(b) drives the injection value, the positive root
/// of Phi(1, .) completes the two-sided solution basis at b=1.
inline double characteristic_poly(const ModelParams& p, double mu, const Moments& m, double gamma) {
    const double drift = p.theta * m.m1 - (p.theta - p.eta) * mu;
    return 0.5 * p.lambda * m.m2 * gamma * gamma + p.lambda * drift * gamma - p.rho;
}

namespace detail {

/// Negative root of Phi. Rationalized so the vanishing-diffusion limit
/// M2 -> 0 (where the textbook quotient is 0/0) stays finite:
///   gamma^- = -(2 rho / lambda) / (sqrt(d^2 + 2 rho M2 / lambda) - d),
/// d = theta M1 - (theta - eta) mu. For d > 0 the subtraction cancels, so
/// the textbook form is used there instead.
inline double negative_root(const ModelParams& p, double mu, const Moments& m) {
    const double d = p.theta * m.m1 - (p.theta - p.eta) * mu;
    const double q = 2.0 * p.rho / p.lambda;
    const double s = std::sqrt(d * d + q * m.m2);
    if (d <= 0.0) {
        const double denom = s - d;
        if (denom <= 0.0)
            throw std::domain_error("gamma_minus: degenerate family (M2=0 with nonnegative drift)");
        return -q / denom;
    }
    if (m.m2 <= 0.0)
        throw std::domain_error("gamma_minus: degenerate family (M2=0 with nonnegative drift)");
    return -(d + s) / m.m2;
}

/// Positive root of Phi, defined only where M2 > 0.
inline double positive_root(const ModelParams& p, double mu, const Moments& m) {
    if (!(m.m2 > 0.0)) throw std::domain_error("gamma_plus: M2 must be positive");
    const double d = p.theta * m.m1 - (p.theta - p.eta) * mu;
    const double q = 2.0 * p.rho / p.lambda;
    const double s = std::sqrt(d * d + q * m.m2);
    if (d >= 0.0) return q / (s + d);
    return (s - d) / m.m2;
}

}  // namespace detail

/// Bundles (params, law, retention) and exposes the level-dependent
/// coefficients and characteristic roots. Immutable after construction;
/// all evaluations are pure.
class RootProfile {
  public:
    RootProfile(ModelParams params, ClaimLaw law, RetentionModel retention)
        : params_(params), law_(std::move(law)), retention_(std::move(retention)) {
        params_.validate();
        if (retention_.kind() == RetentionModel::Kind::excess_of_loss && !law_.has_density())
            throw std::invalid_argument("RootProfile: excess-of-loss needs a claim density");
        if (retention_.kind() == RetentionModel::Kind::custom) validate_custom();
        gm1_ = detail::negative_root(params_, law_.mean(), moments(1.0));
        gp1_ = detail::positive_root(params_, law_.mean(), moments(1.0));
    }

    const ModelParams& params() const { return params_; }
    const ClaimLaw& law() const { return law_; }
    const RetentionModel& retention() const { return retention_; }

    Moments moments(double b) const { return reins::moments(retention_, law_, b); }

    /// Post-reinsurance drift lambda (theta M1(b) - (theta - eta) mu), per unit time.
    double drift(double b) const {
        const Moments m = moments(b);
        return params_.lambda * (params_.theta * m.m1 - (params_.theta - params_.eta) * law_.mean());
    }

    /// Post-reinsurance diffusion coefficient lambda M2(b), per unit time.
    double diffusion(double b) const { return params_.lambda * moments(b).m2; }

    double phi(double b, double gamma) const {
        return characteristic_poly(params_, law_.mean(), moments(b), gamma);
    }

    double gamma_minus(double b) const {
        return detail::negative_root(params_, law_.mean(), moments(b));
    }

    double gamma_minus_1() const { return gm1_; }
    double gamma_plus_1() const { return gp1_; }

  private:
    void validate_custom() const {
        const double mu = law_.mean(), s2 = law_.second_moment();
        const Moments at0 = moments(0.0), at1 = moments(1.0);
        const double tol1 = 1e-9 * std::max(1.0, mu);
        const double tol2 = 1e-9 * std::max(1.0, s2);
        if (std::abs(at0.m1) > tol1 || std::abs(at0.m2) > tol2 ||
            std::abs(at1.m1 - mu) > tol1 || std::abs(at1.m2 - s2) > tol2)
            throw std::invalid_argument(
                "RootProfile: custom retention violates boundary identities "
                "M1(0)=M2(0)=0, M1(1)=mean, M2(1)=second moment");
    }

    ModelParams params_;
    ClaimLaw law_;
    RetentionModel retention_;
    double gm1_ = 0.0;
    double gp1_ = 0.0;
};

}  // namespace reins
