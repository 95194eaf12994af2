#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "reins/policy.hpp"
#include "reins/roots.hpp"

namespace reins::io {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat, override-friendly form of a problem configuration. Fields not used
/// by the selected claim law are ignored by build() but kept for sweeps.
struct RawConfig {
    double lambda = 0.05;
    double eta = 0.3;
    double theta = 0.5;
    double rho = 0.04;
    double K = 10.0;
    std::string law_type = "moments_only";  // exponential | pareto | moments_only
    double mu = 10.0;
    double sigma2 = 200.0;
    double zeta = 10.0;
    double alpha = 3.0;
    std::string retention_type = "proportional";  // proportional | excess_of_loss

    ClaimLaw build_law() const {
        if (law_type == "exponential") return ClaimLaw::exponential(mu);
        if (law_type == "pareto") return ClaimLaw::pareto(zeta, alpha);
        if (law_type == "moments_only") return ClaimLaw::moments_only(mu, sigma2);
        throw ConfigError("unknown claim_law type: " + law_type);
    }

    RetentionModel build_retention() const {
        if (retention_type == "proportional") return RetentionModel::proportional();
        if (retention_type == "excess_of_loss") return RetentionModel::excess_of_loss();
        throw ConfigError("unknown retention type: " + retention_type);
    }

    ModelParams build_params() const { return ModelParams{lambda, eta, theta, rho, K}; }

    RootProfile build_profile() const {
        try {
            return RootProfile(build_params(), build_law(), build_retention());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json law;
        law["type"] = law_type;
        if (law_type == "exponential") {
            law["mu"] = mu;
        } else if (law_type == "pareto") {
            law["zeta"] = zeta;
            law["alpha"] = alpha;
        } else {
            law["mu"] = mu;
            law["sigma2"] = sigma2;
        }
        return nlohmann::json{{"lambda", lambda}, {"eta", eta},   {"theta", theta},
                              {"rho", rho},       {"K", K},       {"claim_law", law},
                              {"retention", nlohmann::json{{"type", retention_type}}}};
    }
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    return j.get<double>();
}

inline void reject_unknown(const nlohmann::json& obj, const std::vector<std::string>& known,
                           const std::string& where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const auto& k : known) ok = ok || item.key() == k;
        if (!ok) throw ConfigError("unknown config key '" + item.key() + "' in " + where);
    }
}

}  // namespace detail

/// Parses the flat JSON schema; unknown keys anywhere are an error.
inline RawConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    detail::reject_unknown(j, {"lambda", "eta", "theta", "rho", "K", "claim_law", "retention"},
                           "top level");
    RawConfig cfg;
    if (j.contains("lambda")) cfg.lambda = detail::require_number(j["lambda"], "lambda");
    if (j.contains("eta")) cfg.eta = detail::require_number(j["eta"], "eta");
    if (j.contains("theta")) cfg.theta = detail::require_number(j["theta"], "theta");
    if (j.contains("rho")) cfg.rho = detail::require_number(j["rho"], "rho");
    if (j.contains("K")) cfg.K = detail::require_number(j["K"], "K");

    if (j.contains("claim_law")) {
        const auto& law = j["claim_law"];
        if (!law.is_object() || !law.contains("type"))
            throw ConfigError("claim_law must be an object with a 'type'");
        cfg.law_type = law["type"].get<std::string>();
        if (cfg.law_type == "exponential") {
            detail::reject_unknown(law, {"type", "mu"}, "claim_law");
            if (law.contains("mu")) cfg.mu = detail::require_number(law["mu"], "mu");
        } else if (cfg.law_type == "pareto") {
            detail::reject_unknown(law, {"type", "zeta", "alpha"}, "claim_law");
            if (law.contains("zeta")) cfg.zeta = detail::require_number(law["zeta"], "zeta");
            if (law.contains("alpha")) cfg.alpha = detail::require_number(law["alpha"], "alpha");
        } else if (cfg.law_type == "moments_only") {
            detail::reject_unknown(law, {"type", "mu", "sigma2"}, "claim_law");
            if (law.contains("mu")) cfg.mu = detail::require_number(law["mu"], "mu");
            if (law.contains("sigma2")) cfg.sigma2 = detail::require_number(law["sigma2"], "sigma2");
        } else {
            throw ConfigError("unknown claim_law type: " + cfg.law_type);
        }
    }
    if (j.contains("retention")) {
        const auto& r = j["retention"];
        if (!r.is_object() || !r.contains("type"))
            throw ConfigError("retention must be an object with a 'type'");
        detail::reject_unknown(r, {"type"}, "retention");
        cfg.retention_type = r["type"].get<std::string>();
        if (cfg.retention_type != "proportional" && cfg.retention_type != "excess_of_loss")
            throw ConfigError("unknown retention type: " + cfg.retention_type);
    }
    return cfg;
}

inline RawConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

inline nlohmann::json solution_to_json(const PolicySolution& sol) {
    nlohmann::json j{{"b_star", sol.b_star},
                     {"gamma_minus_bstar", sol.gamma_b},
                     {"gamma_minus_1", sol.gamma_1},
                     {"gamma_plus_1", sol.gamma_p},
                     {"C1", sol.C1},
                     {"C2", sol.C2},
                     {"B", sol.B},
                     {"H", sol.H},
                     {"case", to_string(sol.policy_case)}};
    if (sol.x_star) j["x_star"] = *sol.x_star;
    return j;
}

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

/// CSV with a canonical-parameters comment line, UTF-8, LF endings.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const nlohmann::json& params)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
        out_ << "# params: " << params.dump() << "\n";
    }

    void header(const std::vector<std::string>& cols) { row_strings(cols); }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Parameter sweeps (the data behind the sensitivity figures)

enum class SweepParameter { rho, mu, sigma2, K, zeta, theta, eta, lambda };

inline const char* to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::rho: return "rho";
        case SweepParameter::mu: return "mu";
        case SweepParameter::sigma2: return "sigma2";
        case SweepParameter::K: return "K";
        case SweepParameter::zeta: return "zeta";
        case SweepParameter::theta: return "theta";
        case SweepParameter::eta: return "eta";
        case SweepParameter::lambda: return "lambda";
    }
    return "?";
}

inline std::optional<SweepParameter> sweep_parameter_from(const std::string& s) {
    if (s == "rho") return SweepParameter::rho;
    if (s == "mu") return SweepParameter::mu;
    if (s == "sigma2") return SweepParameter::sigma2;
    if (s == "K") return SweepParameter::K;
    if (s == "zeta") return SweepParameter::zeta;
    if (s == "theta") return SweepParameter::theta;
    if (s == "eta") return SweepParameter::eta;
    if (s == "lambda") return SweepParameter::lambda;
    return std::nullopt;
}

struct SweepSpec {
    SweepParameter parameter = SweepParameter::rho;
    std::vector<double> grid;
    std::vector<double> value_at;  ///< surplus levels at which to tabulate U
};

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> g;
    if (n <= 1) {
        g.push_back(lo);
        return g;
    }
    g.reserve(n);
    for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
    return g;
}

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    std::string error;
    double b_star = 0.0;
    std::optional<double> x_star;
    std::vector<double> u_values;
};

inline void apply_sweep_value(RawConfig& cfg, SweepParameter p, double v) {
    switch (p) {
        case SweepParameter::rho: cfg.rho = v; return;
        case SweepParameter::mu:
            if (cfg.law_type == "pareto")
                throw ConfigError("sweep parameter mu does not apply to a pareto law");
            cfg.mu = v;
            return;
        case SweepParameter::sigma2:
            if (cfg.law_type != "moments_only")
                throw ConfigError("sweep parameter sigma2 applies only to moments_only laws");
            cfg.sigma2 = v;
            return;
        case SweepParameter::K: cfg.K = v; return;
        case SweepParameter::zeta:
            if (cfg.law_type != "pareto")
                throw ConfigError("sweep parameter zeta applies only to pareto laws");
            cfg.zeta = v;
            return;
        case SweepParameter::theta: cfg.theta = v; return;
        case SweepParameter::eta: cfg.eta = v; return;
        case SweepParameter::lambda: cfg.lambda = v; return;
    }
}

/// Solves the policy along the grid. Applicability of the swept parameter to
/// the configured law is a configuration error; invalid individual values
/// only fail their row.
inline std::vector<SweepRow> run_sweep(const RawConfig& base, const SweepSpec& spec) {
    {
        RawConfig probe = base;  // surface inapplicable parameters up front
        apply_sweep_value(probe, spec.parameter, base.rho);
    }
    std::vector<SweepRow> rows;
    rows.reserve(spec.grid.size());
    for (double v : spec.grid) {
        SweepRow row;
        row.value = v;
        try {
            RawConfig cfg = base;
            apply_sweep_value(cfg, spec.parameter, v);
            const RootProfile profile = cfg.build_profile();
            const PolicySolution sol = solve_policy(profile);
            row.b_star = sol.b_star;
            row.x_star = sol.x_star;
            for (double x : spec.value_at) row.u_values.push_back(sol.U(x));
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_sweep_csv(const std::string& path, const RawConfig& base, const SweepSpec& spec,
                            const std::vector<SweepRow>& rows) {
    nlohmann::json params = base.to_json();
    params["sweep"] = to_string(spec.parameter);
    CsvWriter csv(path, params);
    std::vector<std::string> header{"param", "value", "b_star", "x_star"};
    for (double x : spec.value_at) header.push_back("U_at_" + format_double(x));
    csv.header(header);
    for (const auto& row : rows) {
        std::vector<std::string> cells{to_string(spec.parameter), format_double(row.value)};
        if (row.ok) {
            cells.push_back(format_double(row.b_star));
            cells.push_back(row.x_star ? format_double(*row.x_star) : "");
            for (double u : row.u_values) cells.push_back(format_double(u));
        } else {
            cells.emplace_back();
            cells.emplace_back();
            for (std::size_t i = 0; i < spec.value_at.size(); ++i) cells.emplace_back();
        }
        csv.row_strings(cells);
    }
}

// ---------------------------------------------------------------------------
// Value-function comparison between two configurations

struct CompareRow {
    double x = 0.0;
    double u_a = 0.0;
    double u_b = 0.0;
    double diff = 0.0;
};

struct CompareResult {
    std::vector<CompareRow> rows;
    std::string label_a;
    std::string label_b;
    bool constant_sign = true;
    int sign = 0;  ///< -1 diff <= 0 everywhere, +1 diff >= 0 everywhere, 0 mixed
};

/// Solves both configurations and tabulates U_a - U_b on the grid. The two
/// claim laws must imply the same (mean, second moment) pair.
inline CompareResult run_compare(const RawConfig& a, const RawConfig& b,
                                 const std::vector<double>& x_grid) {
    const RootProfile pa = a.build_profile();
    const RootProfile pb = b.build_profile();
    const double mtol = 1e-9 * std::max(1.0, pa.law().mean());
    const double stol = 1e-9 * std::max(1.0, pa.law().second_moment());
    if (std::abs(pa.law().mean() - pb.law().mean()) > mtol ||
        std::abs(pa.law().second_moment() - pb.law().second_moment()) > stol)
        throw ConfigError("compare: the two configurations imply different claim moments");

    const PolicySolution sa = solve_policy(pa);
    const PolicySolution sb = solve_policy(pb);
    CompareResult out;
    out.label_a = "U_" + a.retention_type;
    out.label_b = "U_" + b.retention_type;
    bool any_pos = false, any_neg = false;
    for (double x : x_grid) {
        CompareRow row;
        row.x = x;
        row.u_a = sa.U(x);
        row.u_b = sb.U(x);
        row.diff = row.u_a - row.u_b;
        any_pos = any_pos || row.diff > 0.0;
        any_neg = any_neg || row.diff < 0.0;
        out.rows.push_back(row);
    }
    out.constant_sign = !(any_pos && any_neg);
    out.sign = out.constant_sign ? (any_pos ? 1 : (any_neg ? -1 : 0)) : 0;
    return out;
}

inline void write_compare_csv(const std::string& path, const RawConfig& a, const RawConfig& b,
                              const CompareResult& res) {
    nlohmann::json params{{"config_a", a.to_json()}, {"config_b", b.to_json()}};
    CsvWriter csv(path, params);
    csv.header({"x", res.label_a, res.label_b, "diff"});
    for (const auto& row : res.rows)
        csv.row_strings({format_double(row.x), format_double(row.u_a), format_double(row.u_b),
                         format_double(row.diff)});
}

}  // namespace reins::io
