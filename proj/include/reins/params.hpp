#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace reins {

/// Market and contract constants of the surplus model.
///
/// Units: lambda [1/time], eta/theta [dimensionless loadings], rho [1/time],
/// transaction_cost K [currency].
struct ModelParams {
    double lambda = 0.05;  ///< claim arrival rate
    double eta = 0.3;      ///< insurer safety loading
    double theta = 0.5;    ///< reinsurer safety loading, theta > eta
    double rho = 0.04;     ///< discount rate
    double K = 10.0;       ///< fixed cost of activating the contract

    void validate() const {
        if (!(lambda > 0.0)) throw std::invalid_argument("ModelParams: lambda must be > 0");
        if (!(eta > 0.0)) throw std::invalid_argument("ModelParams: eta must be > 0");
        if (!(rho > 0.0)) throw std::invalid_argument("ModelParams: rho must be > 0");
        if (!(K >= 0.0)) throw std::invalid_argument("ModelParams: K must be >= 0");
        if (!(theta > eta)) throw std::invalid_argument("ModelParams: theta must exceed eta");
    }
};

/// First and second moment of the retained claim, M1(b) and M2(b).
struct Moments {
    double m1 = 0.0;  ///< currency
    double m2 = 0.0;  ///< currency^2
};

/// Claim-size law. Only the first two moments matter for the solver;
/// excess-of-loss retention additionally needs capped moments, which
/// exist in closed form for the Exponential and Pareto families.
class ClaimLaw {
  public:
    enum class Kind { exponential, pareto, moments_only };

    static ClaimLaw exponential(double mean) {
        if (!(mean > 0.0)) throw std::invalid_argument("ClaimLaw: exponential mean must be > 0");
        ClaimLaw law;
        law.kind_ = Kind::exponential;
        law.mean_ = mean;
        law.second_ = 2.0 * mean * mean;
        return law;
    }

    /// Pareto with density alpha*zeta^alpha / z^(alpha+1) on [zeta, inf).
    /// alpha > 2 so the second moment is finite.
    static ClaimLaw pareto(double zeta, double alpha) {
        if (!(zeta > 0.0)) throw std::invalid_argument("ClaimLaw: pareto zeta must be > 0");
        if (!(alpha > 2.0)) throw std::invalid_argument("ClaimLaw: pareto alpha must be > 2");
        ClaimLaw law;
        law.kind_ = Kind::pareto;
        law.zeta_ = zeta;
        law.alpha_ = alpha;
        law.mean_ = alpha * zeta / (alpha - 1.0);
        law.second_ = alpha * zeta * zeta / (alpha - 2.0);
        return law;
    }

    /// Distribution-free law carrying only (mean, second moment).
    /// Sufficient for proportional retention; rejected by excess-of-loss.
    static ClaimLaw moments_only(double mean, double second_moment) {
        if (!(mean > 0.0)) throw std::invalid_argument("ClaimLaw: mean must be > 0");
        if (!(second_moment >= mean * mean))
            throw std::invalid_argument("ClaimLaw: second moment must be >= mean^2");
        ClaimLaw law;
        law.kind_ = Kind::moments_only;
        law.mean_ = mean;
        law.second_ = second_moment;
        return law;
    }

    Kind kind() const { return kind_; }
    double mean() const { return mean_; }
    double second_moment() const { return second_; }
    bool has_density() const { return kind_ != Kind::moments_only; }
    double zeta() const { return zeta_; }
    double alpha() const { return alpha_; }

    /// E[min(Z, cap)] for cap >= 0.
    double capped_mean(double cap) const {
        switch (kind_) {
            case Kind::exponential: {
                // mu (1 - e^{-cap/mu})
                return mean_ * (1.0 - std::exp(-cap / mean_));
            }
            case Kind::pareto: {
                if (cap <= zeta_) return cap;  // support starts at zeta
                const double t = zeta_ / cap;
                return zeta_ / (alpha_ - 1.0) * (alpha_ - std::pow(t, alpha_ - 1.0));
            }
            case Kind::moments_only:
                throw std::invalid_argument("ClaimLaw: capped moments need a density");
        }
        throw std::logic_error("ClaimLaw: bad kind");
    }

    /// E[min(Z, cap)^2] for cap >= 0.
    double capped_second_moment(double cap) const {
        switch (kind_) {
            case Kind::exponential: {
                // 2 mu (mu - (cap + mu) e^{-cap/mu})
                const double e = std::exp(-cap / mean_);
                return 2.0 * mean_ * (mean_ - (cap + mean_) * e);
            }
            case Kind::pareto: {
                if (cap <= zeta_) return cap * cap;
                const double t = zeta_ / cap;
                return zeta_ * zeta_ / (alpha_ - 2.0) * (alpha_ - 2.0 * std::pow(t, alpha_ - 2.0));
            }
            case Kind::moments_only:
                throw std::invalid_argument("ClaimLaw: capped moments need a density");
        }
        throw std::logic_error("ClaimLaw: bad kind");
    }

  private:
    ClaimLaw() = default;
    Kind kind_ = Kind::moments_only;
    double mean_ = 0.0;
    double second_ = 0.0;
    double zeta_ = 0.0;
    double alpha_ = 0.0;
};

/// Retention family b in [0,1] -> retained-claim moments (M1(b), M2(b)).
/// b=1 keeps every claim (no reinsurance), b=0 cedes everything.
class RetentionModel {
  public:
    enum class Kind { proportional, excess_of_loss, custom };
    using MomentFn = std::function<double(double)>;

    static RetentionModel proportional() { return RetentionModel(Kind::proportional); }

    /// Retained part z ^ cap(b) with cap(b) = b/(1-b).
    static RetentionModel excess_of_loss() { return RetentionModel(Kind::excess_of_loss); }

    /// User-supplied moment pair. The boundary identities M1(0)=M2(0)=0 and
    /// M1(1)=mean, M2(1)=second moment are checked when the family is paired
    /// with a law (RootProfile construction).
    static RetentionModel custom(MomentFn m1, MomentFn m2) {
        RetentionModel m(Kind::custom);
        m.m1_ = std::move(m1);
        m.m2_ = std::move(m2);
        if (!m.m1_ || !m.m2_) throw std::invalid_argument("RetentionModel: null custom moment fn");
        return m;
    }

    Kind kind() const { return kind_; }
    const MomentFn& custom_m1() const { return m1_; }
    const MomentFn& custom_m2() const { return m2_; }

  private:
    explicit RetentionModel(Kind k) : kind_(k) {}
    Kind kind_;
    MomentFn m1_;
    MomentFn m2_;
};

/// Analytic moment pair of the retained claim at level b.
///
/// Excess-of-loss at b=1 evaluates the limit of the closed forms (the cap
/// diverges), giving exactly (mean, second moment).
inline Moments moments(const RetentionModel& model, const ClaimLaw& law, double b) {
    if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("moments: b must lie in [0,1]");
    switch (model.kind()) {
        case RetentionModel::Kind::proportional:
            return {law.mean() * b, law.second_moment() * b * b};
        case RetentionModel::Kind::excess_of_loss: {
            if (!law.has_density())
                throw std::invalid_argument("moments: excess-of-loss needs a claim density");
            if (b == 0.0) return {0.0, 0.0};
            if (b == 1.0) return {law.mean(), law.second_moment()};
            const double cap = b / (1.0 - b);
            return {law.capped_mean(cap), law.capped_second_moment(cap)};
        }
        case RetentionModel::Kind::custom:
            return {model.custom_m1()(b), model.custom_m2()(b)};
    }
    throw std::logic_error("moments: bad retention kind");
}

}  // namespace reins
