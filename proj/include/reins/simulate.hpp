#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "reins/counter_rng.hpp"
#include "reins/roots.hpp"

namespace reins::mc {

/// Monte Carlo controls. horizon <= 0 selects the default truncation
/// ceil(ln(1e4)/rho), i.e. a discount factor of at most 1e-4 at the cut.
struct SimConfig {
    double dt = 1e-3;
    double horizon = 0.0;
    std::int64_t paths = 100000;
    std::uint64_t seed = 42;
    bool antithetic = true;
    int threads = 0;  ///< 0: hardware concurrency; result is identical for any value
};

struct SimEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t paths_used = 0;
    /// Upper bound on the truncation error from cutting the horizon at T:
    /// e^{-rho T} (max(0,-drift) + sigma sqrt(2/pi)) / (1 - e^{-rho}),
    /// worst regime when several apply. Added to tolerance in oracle checks.
    double discount_tail_bound = 0.0;
};

namespace detail {

constexpr double kTwoPi = 6.283185307179586476925287;
constexpr int kBlock = 128;  // streams per kernel block; fits L1 with all state

struct Resolved {
    double dt = 0.0;
    double horizon = 0.0;
    std::int64_t nsteps = 0;
    std::int64_t streams = 0;
    std::int64_t paths = 0;
    int threads = 1;
    bool antithetic = true;
    std::uint64_t seed = 0;
};

inline Resolved resolve(const SimConfig& cfg, double rho) {
    Resolved r;
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be > 0");
    r.dt = cfg.dt;
    r.horizon = cfg.horizon > 0.0 ? cfg.horizon : std::ceil(std::log(1e4) / rho);
    if (!(r.horizon >= 10.0 * cfg.dt))
        throw std::invalid_argument("SimConfig: horizon must be at least 10*dt");
    if (cfg.paths < 100) throw std::invalid_argument("SimConfig: need at least 100 paths");
    r.nsteps = static_cast<std::int64_t>(std::llround(r.horizon / cfg.dt));
    r.antithetic = cfg.antithetic;
    r.streams = cfg.antithetic ? (cfg.paths + 1) / 2 : cfg.paths;
    r.paths = cfg.antithetic ? 2 * r.streams : cfg.paths;
    r.threads = cfg.threads > 0
                    ? cfg.threads
                    : std::max(1u, std::thread::hardware_concurrency());
    r.seed = cfg.seed;
    return r;
}

inline double tail_bound(double drift, double sigma2, double rho, double horizon) {
    const double per_unit = std::max(0.0, -drift) + std::sqrt(sigma2) * 0.7978845608028654;
    return std::exp(-rho * horizon) * per_unit / (1.0 - std::exp(-rho));
}

inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 64) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
};

/// Mean and standard error over independent units, in a fixed order that
/// does not depend on how the units were produced.
inline MeanSE mean_se(std::span<const double> units) {
    MeanSE out;
    const std::size_t n = units.size();
    if (n == 0) return out;
    out.mean = pairwise_sum(units.data(), n) / static_cast<double>(n);
    if (n < 2) return out;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = units[i] - out.mean;
        sq[i] = d * d;
    }
    const double s2 = pairwise_sum(sq.data(), n) / (static_cast<double>(n - 1));
    out.se = std::sqrt(s2 / static_cast<double>(n));
    return out;
}

/// Per-estimator unit values: raw paths, or pair averages under antithetics.
inline std::vector<double> unit_values(const std::vector<double>& per_path, bool antithetic) {
    if (!antithetic) return per_path;
    std::vector<double> units(per_path.size() / 2);
    for (std::size_t i = 0; i < units.size(); ++i)
        units[i] = 0.5 * (per_path[2 * i] + per_path[2 * i + 1]);
    return units;
}

/// One Box-Muller refill: normals (z0, z1) for steps (2j, 2j+1) of each
/// stream in the block. Fixed consumption of two uniforms per pair keeps
/// counters in lockstep across lanes and across policies.
struct NormalBlock {
    alignas(64) double z0[kBlock];
    alignas(64) double z1[kBlock];
    alignas(64) double u1[kBlock];
    alignas(64) double u2[kBlock];
    alignas(64) double rr[kBlock];

    void fill(const std::uint64_t* keys, int n, std::uint64_t pair) {
        const std::uint64_t c0 = 2 * pair;
        for (int i = 0; i < n; ++i) u1[i] = rng::uniform_open(keys[i], c0);
        for (int i = 0; i < n; ++i) u2[i] = rng::uniform_open(keys[i], c0 + 1);
        for (int i = 0; i < n; ++i) rr[i] = std::sqrt(-2.0 * std::log(u1[i]));
        for (int i = 0; i < n; ++i) z0[i] = rr[i] * std::cos(kTwoPi * u2[i]);
        for (int i = 0; i < n; ++i) z1[i] = rr[i] * std::sin(kTwoPi * u2[i]);
    }
};

/// Runs fn(stream_begin, stream_end) over disjoint chunks of streams.
inline void parallel_streams(const Resolved& rc, const std::function<void(std::int64_t, std::int64_t)>& fn) {
    const std::int64_t nblocks = (rc.streams + kBlock - 1) / kBlock;
    const int nthreads = static_cast<int>(std::min<std::int64_t>(rc.threads, std::max<std::int64_t>(1, nblocks)));
    if (nthreads <= 1) {
        fn(0, rc.streams);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    const std::int64_t per = (nblocks + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
        const std::int64_t b0 = t * per, b1 = std::min(nblocks, b0 + per);
        if (b0 >= b1) break;
        pool.emplace_back([&fn, &rc, b0, b1] {
            fn(b0 * kBlock, std::min(rc.streams, b1 * kBlock));
        });
    }
    for (auto& th : pool) th.join();
}

/// Reflected fixed-level batch via the shared free path: with
/// M_t = max_{s<=t}(-Yhat_s), the process started at y is Yhat_t + max(y, M_t)
/// and its injections increase by max(y, M_new) - max(y, M_old). Algebraically
/// identical to stepping X <- (X + dX)^+ per level, but one batch serves every
/// starting surplus in `levels`.
inline void injection_batch(const Resolved& rc, double drift, double sigma2, double rho,
                            std::span<const double> levels,
                            std::vector<std::vector<double>>& per_path) {
    const double ddt = drift * rc.dt;
    const double sdt = std::sqrt(sigma2 * rc.dt);
    const double dfac = std::exp(-rho * rc.dt);
    const std::size_t nlev = levels.size();
    const std::int64_t nsteps = rc.nsteps;

    per_path.assign(nlev, std::vector<double>(static_cast<std::size_t>(rc.paths), 0.0));

    parallel_streams(rc, [&](std::int64_t s0, std::int64_t s1) {
        NormalBlock nb;
        alignas(64) double yA[kBlock], mA[kBlock], nA[kBlock];
        alignas(64) double yB[kBlock], mB[kBlock], nB[kBlock];
        std::uint64_t keys[kBlock];
        std::vector<double> accA(nlev * kBlock), accB(nlev * kBlock);

        for (std::int64_t base = s0; base < s1; base += kBlock) {
            const int n = static_cast<int>(std::min<std::int64_t>(kBlock, s1 - base));
            for (int i = 0; i < n; ++i) {
                keys[i] = rng::stream_key(rc.seed, static_cast<std::uint64_t>(base + i));
                yA[i] = yB[i] = 0.0;
                mA[i] = mB[i] = 0.0;
            }
            std::fill(accA.begin(), accA.end(), 0.0);
            std::fill(accB.begin(), accB.end(), 0.0);

            double disc = 1.0;
            for (std::int64_t k = 0; k < nsteps; ++k) {
                if ((k & 1) == 0) nb.fill(keys, n, static_cast<std::uint64_t>(k >> 1));
                const double* z = (k & 1) ? nb.z1 : nb.z0;
                disc *= dfac;

                for (int i = 0; i < n; ++i) {
                    yA[i] += ddt + sdt * z[i];
                    nA[i] = std::max(mA[i], -yA[i]);
                }
                for (std::size_t L = 0; L < nlev; ++L) {
                    const double yl = levels[L];
                    double* acc = accA.data() + L * kBlock;
                    for (int i = 0; i < n; ++i)
                        acc[i] += disc * (std::max(nA[i], yl) - std::max(mA[i], yl));
                }
                for (int i = 0; i < n; ++i) mA[i] = nA[i];

                if (rc.antithetic) {
                    for (int i = 0; i < n; ++i) {
                        yB[i] += ddt - sdt * z[i];
                        nB[i] = std::max(mB[i], -yB[i]);
                    }
                    for (std::size_t L = 0; L < nlev; ++L) {
                        const double yl = levels[L];
                        double* acc = accB.data() + L * kBlock;
                        for (int i = 0; i < n; ++i)
                            acc[i] += disc * (std::max(nB[i], yl) - std::max(mB[i], yl));
                    }
                    for (int i = 0; i < n; ++i) mB[i] = nB[i];
                }
            }

            for (std::size_t L = 0; L < nlev; ++L)
                for (int i = 0; i < n; ++i) {
                    const std::int64_t s = base + i;
                    if (rc.antithetic) {
                        per_path[L][static_cast<std::size_t>(2 * s)] = accA[L * kBlock + i];
                        per_path[L][static_cast<std::size_t>(2 * s + 1)] = accB[L * kBlock + i];
                    } else {
                        per_path[L][static_cast<std::size_t>(s)] = accA[L * kBlock + i];
                    }
                }
        }
    });
}

struct PolicyDynamics {
    double pre_drift, pre_sigma2;
    double post_drift, post_sigma2;
    double x0;
    double K;
    bool has_switch;
    double x_star;  // meaningful only when has_switch
};

/// Direct reflected scheme with a one-shot regime switch the first time the
/// surplus reaches x_star: deduct K (injecting any shortfall) and continue
/// under the post dynamics.
inline void policy_batch(const Resolved& rc, const PolicyDynamics& pd, double rho,
                         std::vector<double>& per_path) {
    const double ddt1 = pd.pre_drift * rc.dt, sdt1 = std::sqrt(pd.pre_sigma2 * rc.dt);
    const double ddt2 = pd.post_drift * rc.dt, sdt2 = std::sqrt(pd.post_sigma2 * rc.dt);
    const double dfac = std::exp(-rho * rc.dt);
    const std::int64_t nsteps = rc.nsteps;

    per_path.assign(static_cast<std::size_t>(rc.paths), 0.0);

    parallel_streams(rc, [&](std::int64_t s0, std::int64_t s1) {
        NormalBlock nb;
        alignas(64) double xA[kBlock], aA[kBlock], wA[kBlock];  // wA: 1.0 once switched
        alignas(64) double xB[kBlock], aB[kBlock], wB[kBlock];
        std::uint64_t keys[kBlock];

        for (std::int64_t base = s0; base < s1; base += kBlock) {
            const int n = static_cast<int>(std::min<std::int64_t>(kBlock, s1 - base));
            int unswitchedA = pd.has_switch ? n : 0;
            int unswitchedB = (pd.has_switch && rc.antithetic) ? n : 0;
            for (int i = 0; i < n; ++i) {
                keys[i] = rng::stream_key(rc.seed, static_cast<std::uint64_t>(base + i));
                xA[i] = xB[i] = pd.x0;
                aA[i] = aB[i] = 0.0;
                wA[i] = wB[i] = 0.0;
            }
            // reinsure immediately when already at or above the trigger
            if (pd.has_switch && pd.x0 >= pd.x_star) {
                const double nx = pd.x0 - pd.K;
                const double inj = std::max(0.0, -nx);
                for (int i = 0; i < n; ++i) {
                    xA[i] = xB[i] = nx + inj;
                    aA[i] = aB[i] = inj;  // discount factor 1 at t=0
                    wA[i] = wB[i] = 1.0;
                }
                unswitchedA = unswitchedB = 0;
            }

            double disc = 1.0;
            for (std::int64_t k = 0; k < nsteps; ++k) {
                if ((k & 1) == 0) nb.fill(keys, n, static_cast<std::uint64_t>(k >> 1));
                const double* z = (k & 1) ? nb.z1 : nb.z0;
                disc *= dfac;

                for (int i = 0; i < n; ++i) {
                    const double dd = ddt1 + wA[i] * (ddt2 - ddt1);
                    const double sd = sdt1 + wA[i] * (sdt2 - sdt1);
                    double x = xA[i] + dd + sd * z[i];
                    const double inj = std::max(0.0, -x);
                    aA[i] += disc * inj;
                    xA[i] = x + inj;
                }
                if (unswitchedA > 0)
                    for (int i = 0; i < n; ++i)
                        if (wA[i] == 0.0 && xA[i] >= pd.x_star) {
                            const double nx = xA[i] - pd.K;
                            const double inj = std::max(0.0, -nx);
                            aA[i] += disc * inj;
                            xA[i] = nx + inj;
                            wA[i] = 1.0;
                            --unswitchedA;
                        }

                if (rc.antithetic) {
                    for (int i = 0; i < n; ++i) {
                        const double dd = ddt1 + wB[i] * (ddt2 - ddt1);
                        const double sd = sdt1 + wB[i] * (sdt2 - sdt1);
                        double x = xB[i] + dd - sd * z[i];
                        const double inj = std::max(0.0, -x);
                        aB[i] += disc * inj;
                        xB[i] = x + inj;
                    }
                    if (unswitchedB > 0)
                        for (int i = 0; i < n; ++i)
                            if (wB[i] == 0.0 && xB[i] >= pd.x_star) {
                                const double nx = xB[i] - pd.K;
                                const double inj = std::max(0.0, -nx);
                                aB[i] += disc * inj;
                                xB[i] = nx + inj;
                                wB[i] = 1.0;
                                --unswitchedB;
                            }
                }
            }

            for (int i = 0; i < n; ++i) {
                const std::int64_t s = base + i;
                if (rc.antithetic) {
                    per_path[static_cast<std::size_t>(2 * s)] = aA[i];
                    per_path[static_cast<std::size_t>(2 * s + 1)] = aB[i];
                } else {
                    per_path[static_cast<std::size_t>(s)] = aA[i];
                }
            }
        }
    });
}

inline SimEstimate finalize(const std::vector<double>& per_path, const Resolved& rc, double tail) {
    const std::vector<double> units = unit_values(per_path, rc.antithetic);
    const MeanSE ms = mean_se(units);
    return SimEstimate{ms.mean, ms.se, rc.paths, tail};
}

}  // namespace detail

/// MC estimates of the expected discounted injections of the level-b process
/// started at each surplus in `levels` (all simulated from one shared batch).
inline std::vector<SimEstimate> simulate_injection_values(const RootProfile& profile, double b,
                                                          std::span<const double> levels,
                                                          const SimConfig& cfg) {
    for (double y : levels)
        if (!(y >= 0.0)) throw std::invalid_argument("simulate: starting surplus must be >= 0");
    const auto rc = detail::resolve(cfg, profile.params().rho);
    const double drift = profile.drift(b), sigma2 = profile.diffusion(b);
    std::vector<std::vector<double>> per_path;
    detail::injection_batch(rc, drift, sigma2, profile.params().rho, levels, per_path);
    const double tail = detail::tail_bound(drift, sigma2, profile.params().rho, rc.horizon);
    std::vector<SimEstimate> out;
    out.reserve(levels.size());
    for (const auto& v : per_path) out.push_back(detail::finalize(v, rc, tail));
    return out;
}

/// Single-surplus form of the estimator above.
inline SimEstimate simulate_injection_value(const RootProfile& profile, double b, double y,
                                            const SimConfig& cfg) {
    const double levels[1] = {y};
    return simulate_injection_values(profile, b, levels, cfg)[0];
}

namespace detail {

inline PolicyDynamics make_policy_dynamics(const RootProfile& profile, double x0, double b_star,
                                           const std::optional<double>& x_star) {
    if (x_star && !(*x_star >= 0.0))
        throw std::invalid_argument("simulate_policy: x_star must be >= 0");
    if (!(x0 >= 0.0)) throw std::invalid_argument("simulate_policy: x0 must be >= 0");
    PolicyDynamics pd;
    pd.pre_drift = profile.drift(1.0);
    pd.pre_sigma2 = profile.diffusion(1.0);
    pd.post_drift = profile.drift(b_star);
    pd.post_sigma2 = profile.diffusion(b_star);
    pd.x0 = x0;
    pd.K = profile.params().K;
    pd.has_switch = x_star.has_value();
    pd.x_star = x_star.value_or(0.0);
    return pd;
}

inline double policy_tail(const RootProfile& profile, const PolicyDynamics& pd, double horizon) {
    const double t1 = tail_bound(pd.pre_drift, pd.pre_sigma2, profile.params().rho, horizon);
    const double t2 = pd.has_switch
                          ? tail_bound(pd.post_drift, pd.post_sigma2, profile.params().rho, horizon)
                          : t1;
    return std::max(t1, t2);
}

}  // namespace detail

/// Cost of the barrier policy (wait at full retention, reinsure at level
/// b_star when the surplus first reaches x_star): expected discounted
/// injections, including any shortfall injected when K is deducted.
/// An absent x_star means the contract is never activated.
inline SimEstimate simulate_policy(const RootProfile& profile, double x0, double b_star,
                                   std::optional<double> x_star, const SimConfig& cfg) {
    const auto rc = detail::resolve(cfg, profile.params().rho);
    const auto pd = detail::make_policy_dynamics(profile, x0, b_star, x_star);
    std::vector<double> per_path;
    detail::policy_batch(rc, pd, profile.params().rho, per_path);
    return detail::finalize(per_path, rc, detail::policy_tail(profile, pd, rc.horizon));
}

struct Perturbation {
    double db = 0.0;
    double dx = 0.0;
};

struct ProbeResult {
    Perturbation requested;
    double b_used = 0.0;
    double x_used = 0.0;
    double mean_diff = 0.0;  ///< perturbed cost minus optimal cost
    double se_diff = 0.0;
    SimEstimate perturbed;
};

/// Common-random-numbers comparison of perturbed policies against (b*, x*).
/// A nonnegative mean difference (up to noise) is the empirical signature of
/// optimality. Perturbed levels are clamped to [0,1], boundaries to >= 0.
inline std::vector<ProbeResult> optimality_probe(const RootProfile& profile, double x0,
                                                 double b_star, double x_star,
                                                 const SimConfig& cfg,
                                                 std::span<const Perturbation> perturbations) {
    const auto rc = detail::resolve(cfg, profile.params().rho);
    const auto base_pd = detail::make_policy_dynamics(profile, x0, b_star, x_star);
    std::vector<double> base;
    detail::policy_batch(rc, base_pd, profile.params().rho, base);
    const std::vector<double> base_units = detail::unit_values(base, rc.antithetic);

    std::vector<ProbeResult> out;
    out.reserve(perturbations.size());
    std::vector<double> pert, diffs;
    for (const auto& p : perturbations) {
        ProbeResult r;
        r.requested = p;
        r.b_used = std::clamp(b_star + p.db, 0.0, 1.0);
        r.x_used = std::max(0.0, x_star + p.dx);
        const auto pd = detail::make_policy_dynamics(profile, x0, r.b_used, r.x_used);
        detail::policy_batch(rc, pd, profile.params().rho, pert);
        r.perturbed = detail::finalize(pert, rc, detail::policy_tail(profile, pd, rc.horizon));
        const std::vector<double> pert_units = detail::unit_values(pert, rc.antithetic);
        diffs.resize(pert_units.size());
        for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i] = pert_units[i] - base_units[i];
        const auto ms = detail::mean_se(diffs);
        r.mean_diff = ms.mean;
        r.se_diff = ms.se;
        out.push_back(r);
    }
    return out;
}

struct TraceRow {
    std::int64_t path = 0;
    double t = 0.0;
    double x = 0.0;
    double injection = 0.0;  ///< injection applied at this step
    int regime = 0;          ///< 0 before reinsurance, 1 after
};

/// Scalar replay of the first few policy paths for debugging; emits one row
/// per step through `sink`. Capped at 100 paths.
inline void trace_policy_paths(const RootProfile& profile, double x0, double b_star,
                               std::optional<double> x_star, const SimConfig& cfg,
                               std::int64_t max_paths,
                               const std::function<void(const TraceRow&)>& sink) {
    const auto rc = detail::resolve(cfg, profile.params().rho);
    const auto pd = detail::make_policy_dynamics(profile, x0, b_star, x_star);
    const double dfac = std::exp(-profile.params().rho * rc.dt);
    const std::int64_t npaths = std::min<std::int64_t>({rc.paths, max_paths, 100});
    for (std::int64_t p = 0; p < npaths; ++p) {
        const std::int64_t stream = rc.antithetic ? p / 2 : p;
        const double sign = (rc.antithetic && (p & 1)) ? -1.0 : 1.0;
        const std::uint64_t key = rng::stream_key(rc.seed, static_cast<std::uint64_t>(stream));
        double x = pd.x0;
        int regime = 0;
        double t0_inj = 0.0;
        if (pd.has_switch && x >= pd.x_star) {
            const double nx = x - pd.K;
            t0_inj = std::max(0.0, -nx);
            x = nx + t0_inj;
            regime = 1;
        }
        sink(TraceRow{p, 0.0, x, t0_inj, regime});
        double r = 0.0, a = 0.0;
        for (std::int64_t k = 0; k < rc.nsteps; ++k) {
            if ((k & 1) == 0) {
                const std::uint64_t c0 = static_cast<std::uint64_t>(k);
                const double u1 = rng::uniform_open(key, c0);
                const double u2 = rng::uniform_open(key, c0 + 1);
                r = std::sqrt(-2.0 * std::log(u1));
                a = detail::kTwoPi * u2;
            }
            const double z = sign * ((k & 1) ? r * std::sin(a) : r * std::cos(a));
            const double drift = regime ? pd.post_drift : pd.pre_drift;
            const double sig2 = regime ? pd.post_sigma2 : pd.pre_sigma2;
            double nx = x + drift * rc.dt + std::sqrt(sig2 * rc.dt) * z;
            double inj = std::max(0.0, -nx);
            x = nx + inj;
            if (!regime && pd.has_switch && x >= pd.x_star) {
                const double after = x - pd.K;
                const double more = std::max(0.0, -after);
                inj += more;
                x = after + more;
                regime = 1;
            }
            sink(TraceRow{p, (k + 1) * rc.dt, x, inj, regime});
        }
    }
}

}  // namespace reins::mc
