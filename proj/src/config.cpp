#include "tauflow/config.hpp"

#include "tauflow/field.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace tauflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

ExperimentKind kind_from(const std::string& v) {
    if (v == "flow") return ExperimentKind::Flow;
    if (v == "expander") return ExperimentKind::Expander;
    if (v == "decay") return ExperimentKind::Decay;
    if (v == "cone") return ExperimentKind::Cone;
    if (v == "transform-check") return ExperimentKind::TransformCheck;
    if (v == "identity-check") return ExperimentKind::IdentityCheck;
    throw ConfigError("key 'kind': unknown value '" + v +
                      "' (expected flow, expander, decay, cone, transform-check or "
                      "identity-check)");
}

BoundaryMode boundary_from(const std::string& v) {
    if (v == "frozen") return BoundaryMode::Frozen;
    if (v == "exact") return BoundaryMode::Exact;
    if (v == "quadratic-hold") return BoundaryMode::QuadraticHold;
    throw ConfigError("key 'boundary': unknown value '" + v +
                      "' (expected frozen, exact or quadratic-hold)");
}

const char* boundary_name(BoundaryMode m) {
    switch (m) {
    case BoundaryMode::Frozen: return "frozen";
    case BoundaryMode::Exact: return "exact";
    case BoundaryMode::QuadraticHold: return "quadratic-hold";
    }
    return "?";
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        // allow "pi/6"-style fractions of pi for angles
        if (v.rfind("pi", 0) == 0) {
            if (v == "pi") return kPi;
            if (v.size() > 3 && v[2] == '/') return kPi / std::stod(v.substr(3), &used);
        }
        const double d = std::stod(v, &used);
        if (used != v.size() && v.rfind("pi", 0) != 0)
            throw ConfigError("key '" + key + "': trailing characters in number '" + v + "'");
        return d;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

long parse_int(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        const long n = std::stol(v, &used, 10);
        if (used != v.size())
            throw ConfigError("key '" + key + "': trailing characters in integer '" + v + "'");
        return n;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(parse_double(key, item.substr(b, e - b + 1)));
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

void set_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "kind") c.kind = kind_from(value);
    else if (key == "tau") c.tau = parse_double(key, value);
    else if (key == "dim") c.dim = static_cast<int>(parse_int(key, value));
    else if (key == "half_width") c.half_width = parse_double(key, value);
    else if (key == "spacing") c.spacing = parse_double(key, value);
    else if (key == "t_end") c.t_end = parse_double(key, value);
    else if (key == "snapshot_times") c.snapshot_times = parse_list(key, value);
    else if (key == "gamma") c.gamma = parse_double(key, value);
    else if (key == "safety") c.safety = parse_double(key, value);
    else if (key == "monitor_stride") c.monitor_stride = static_cast<int>(parse_int(key, value));
    else if (key == "boundary") c.boundary = boundary_from(value);
    else if (key == "condition") c.condition = value;
    else if (key == "zeta") c.zeta = parse_double(key, value);
    else if (key == "rho") c.rho = parse_double(key, value);
    else if (key == "mu") c.mu = parse_double(key, value);
    else if (key == "lambda_cap") c.lambda_cap = parse_double(key, value);
    else if (key == "eta") c.eta = parse_double(key, value);
    else if (key == "preset") c.preset = value;
    else if (key == "quad_c") c.quad_c = parse_double(key, value);
    else if (key == "bump_eps") c.bump_eps = parse_double(key, value);
    else if (key == "bump_radius") c.bump_radius = parse_double(key, value);
    else if (key == "angular_amp") c.angular_amp = parse_double(key, value);
    else if (key == "expression") c.expression = value;
    else if (key == "newton_tol") c.newton_tol = parse_double(key, value);
    else if (key == "newton_max_iter") c.newton_max_iter = static_cast<int>(parse_int(key, value));
    else if (key == "guess_scale") c.guess_scale = parse_double(key, value);
    else if (key == "guess_add_f_const") c.guess_add_f_const = parse_bool(key, value);
    else if (key == "normalized_flow") c.normalized_flow = parse_bool(key, value);
    else if (key == "normalized_flow_tol") c.normalized_flow_tol = parse_double(key, value);
    else if (key == "normalized_s_max") c.normalized_s_max = parse_double(key, value);
    else if (key == "fit_t_start") c.fit_t_start = parse_double(key, value);
    else if (key == "transient_fraction") c.transient_fraction = parse_double(key, value);
    else if (key == "identity_samples") c.identity_samples = static_cast<int>(parse_int(key, value));
    else if (key == "output_dir") c.output_dir = value;
    else if (key == "seed") c.seed = static_cast<unsigned long>(parse_int(key, value));
    else if (key == "assert_max_error") c.assert_max_error = parse_double(key, value);
    else if (key == "assert_gap_max") c.assert_gap_max = parse_double(key, value);
    else if (key == "assert_alpha_min") c.assert_alpha_min = parse_double(key, value);
    else if (key == "assert_alpha_max") c.assert_alpha_max = parse_double(key, value);
    else if (key == "assert_residual_max") c.assert_residual_max = parse_double(key, value);
    else if (key == "assert_cone") c.assert_cone = parse_bool(key, value);
    else if (key == "assert_cone_tol") c.assert_cone_tol = parse_double(key, value);
    else throw ConfigError("unknown key '" + key + "'");
}

} // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    return kind == o.kind && same(tau, o.tau) && dim == o.dim && same(half_width, o.half_width) &&
           same(spacing, o.spacing) && same(t_end, o.t_end) &&
           snapshot_times == o.snapshot_times && same(gamma, o.gamma) &&
           same(safety, o.safety) && monitor_stride == o.monitor_stride &&
           boundary == o.boundary && condition == o.condition && same(zeta, o.zeta) &&
           same(rho, o.rho) && same(mu, o.mu) && same(lambda_cap, o.lambda_cap) &&
           same(eta, o.eta) && preset == o.preset && same(quad_c, o.quad_c) &&
           same(bump_eps, o.bump_eps) && same(bump_radius, o.bump_radius) &&
           same(angular_amp, o.angular_amp) && expression == o.expression &&
           same(newton_tol, o.newton_tol) && newton_max_iter == o.newton_max_iter &&
           same(guess_scale, o.guess_scale) && guess_add_f_const == o.guess_add_f_const &&
           normalized_flow == o.normalized_flow &&
           same(normalized_flow_tol, o.normalized_flow_tol) &&
           same(normalized_s_max, o.normalized_s_max) && same(fit_t_start, o.fit_t_start) &&
           same(transient_fraction, o.transient_fraction) &&
           identity_samples == o.identity_samples && output_dir == o.output_dir &&
           seed == o.seed && same(assert_max_error, o.assert_max_error) &&
           same(assert_gap_max, o.assert_gap_max) && same(assert_alpha_min, o.assert_alpha_min) &&
           same(assert_alpha_max, o.assert_alpha_max) &&
           same(assert_residual_max, o.assert_residual_max) && assert_cone == o.assert_cone &&
           same(assert_cone_tol, o.assert_cone_tol);
}

const char* kind_name(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::Flow: return "flow";
    case ExperimentKind::Expander: return "expander";
    case ExperimentKind::Decay: return "decay";
    case ExperimentKind::Cone: return "cone";
    case ExperimentKind::TransformCheck: return "transform-check";
    case ExperimentKind::IdentityCheck: return "identity-check";
    }
    return "?";
}

void validate_config(const ExperimentConfig& cfg) {
    if (!(cfg.tau >= 0.0) || cfg.tau > kPi / 2.0 + 1e-12)
        throw ConfigError("key 'tau': must lie in [0, pi/2]");
    if (cfg.dim < 1 || cfg.dim > 3) throw ConfigError("key 'dim': must be 1, 2 or 3");
    if (!(cfg.spacing > 0.0)) throw ConfigError("key 'spacing': must be positive");
    if (!(cfg.half_width > 0.0)) throw ConfigError("key 'half_width': must be positive");
    if (2 * static_cast<long>(std::floor(cfg.half_width / cfg.spacing)) + 1 < 5)
        throw ConfigError("key 'half_width': grid needs at least 5 points per axis");
    if (!(cfg.t_end > 0.0) && cfg.kind != ExperimentKind::IdentityCheck &&
        cfg.kind != ExperimentKind::Expander)
        throw ConfigError("key 't_end': must be positive");
    if (cfg.gamma < 0.0 || cfg.gamma > 1.0) throw ConfigError("key 'gamma': must lie in [0, 1]");
    if (!(cfg.safety > 0.0) || cfg.safety > 1.0)
        throw ConfigError("key 'safety': must lie in (0, 1]");
    if (cfg.monitor_stride < 1) throw ConfigError("key 'monitor_stride': must be >= 1");
    for (double t : cfg.snapshot_times)
        if (t < 0.0 || t > cfg.t_end)
            throw ConfigError("key 'snapshot_times': entries must lie in [0, t_end]");

    if (cfg.condition != "none" && cfg.condition != "B" && cfg.condition != "E" &&
        cfg.condition != "L")
        throw ConfigError("key 'condition': expected none, B, E or L");
    if (cfg.kind == ExperimentKind::Cone && cfg.condition == "none")
        throw ConfigError("key 'condition': kind cone needs condition B, E or L");
    if (cfg.condition == "E" && !(cfg.mu > 1.0))
        throw ConfigError("key 'mu': condition E requires mu > 1");
    if (cfg.condition == "E" && !(cfg.lambda_cap >= cfg.mu))
        throw ConfigError("key 'lambda_cap': condition E requires lambda_cap >= mu");
    if (cfg.condition == "B" && !(cfg.zeta > 0.0 && cfg.zeta < 1.0))
        throw ConfigError("key 'zeta': condition B requires zeta in (0, 1)");
    if (cfg.condition == "B" && !(cfg.rho > 0.0))
        throw ConfigError("key 'rho': condition B requires rho > 0");
    if (cfg.condition == "L" && !(cfg.eta > 0.0))
        throw ConfigError("key 'eta': condition L requires eta > 0");

    if (cfg.preset != "quadratic" && cfg.preset != "perturbed-quadratic" &&
        cfg.preset != "homogeneous2" && cfg.preset != "expression")
        throw ConfigError("key 'preset': expected quadratic, perturbed-quadratic, homogeneous2 "
                          "or expression");
    if (cfg.preset == "expression" && cfg.expression.empty())
        throw ConfigError("key 'expression': required when preset = expression");
    if (cfg.boundary == BoundaryMode::Exact && cfg.preset != "quadratic")
        throw ConfigError("key 'boundary': exact boundaries need the quadratic preset");
    if (cfg.preset == "perturbed-quadratic" && !(cfg.bump_radius > 0.0))
        throw ConfigError("key 'bump_radius': must be positive");

    if (cfg.kind == ExperimentKind::TransformCheck) {
        const Branch b = regime_of(cfg.tau).branch;
        if (b != Branch::LogRatio && b != Branch::ArctanRatio)
            throw ConfigError("key 'tau': transform-check needs tau in (0, pi/4) or (pi/4, pi/2)");
    }
    if (cfg.kind == ExperimentKind::IdentityCheck) {
        if (regime_of(cfg.tau).branch != Branch::ArctanRatio)
            throw ConfigError("key 'tau': identity-check needs tau in (pi/4, pi/2)");
        if (cfg.identity_samples < 1)
            throw ConfigError("key 'identity_samples': must be >= 1");
    }
    if (cfg.newton_max_iter < 1) throw ConfigError("key 'newton_max_iter': must be >= 1");
    if (!(cfg.newton_tol > 0.0)) throw ConfigError("key 'newton_tol': must be positive");
    if (cfg.transient_fraction < 0.0 || cfg.transient_fraction >= 1.0)
        throw ConfigError("key 'transient_fraction': must lie in [0, 1)");
    if (cfg.output_dir.empty()) throw ConfigError("key 'output_dir': must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                              line + "'");
        set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    validate_config(cfg);
    return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& key_equals_value) {
    const auto eq = key_equals_value.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + key_equals_value + "': expected key=value");
    set_key(cfg, trim(key_equals_value.substr(0, eq)), trim(key_equals_value.substr(eq + 1)));
}

std::string emit_config(const ExperimentConfig& c) {
    std::ostringstream out;
    auto num = [&](const char* k, double v) { out << k << " = " << format_double(v) << "\n"; };
    auto str = [&](const char* k, const std::string& v) { out << k << " = " << v << "\n"; };
    auto boolean = [&](const char* k, bool v) { out << k << " = " << (v ? "true" : "false") << "\n"; };

    str("kind", kind_name(c.kind));
    num("tau", c.tau);
    out << "dim = " << c.dim << "\n";
    num("half_width", c.half_width);
    num("spacing", c.spacing);
    num("t_end", c.t_end);
    if (!c.snapshot_times.empty()) {
        out << "snapshot_times = ";
        for (size_t i = 0; i < c.snapshot_times.size(); ++i)
            out << (i ? "," : "") << format_double(c.snapshot_times[i]);
        out << "\n";
    }
    num("gamma", c.gamma);
    num("safety", c.safety);
    out << "monitor_stride = " << c.monitor_stride << "\n";
    str("boundary", boundary_name(c.boundary));
    str("condition", c.condition);
    num("zeta", c.zeta);
    num("rho", c.rho);
    num("mu", c.mu);
    num("lambda_cap", c.lambda_cap);
    num("eta", c.eta);
    str("preset", c.preset);
    num("quad_c", c.quad_c);
    num("bump_eps", c.bump_eps);
    num("bump_radius", c.bump_radius);
    num("angular_amp", c.angular_amp);
    if (!c.expression.empty()) str("expression", c.expression);
    num("newton_tol", c.newton_tol);
    out << "newton_max_iter = " << c.newton_max_iter << "\n";
    num("guess_scale", c.guess_scale);
    boolean("guess_add_f_const", c.guess_add_f_const);
    boolean("normalized_flow", c.normalized_flow);
    num("normalized_flow_tol", c.normalized_flow_tol);
    num("normalized_s_max", c.normalized_s_max);
    num("fit_t_start", c.fit_t_start);
    num("transient_fraction", c.transient_fraction);
    out << "identity_samples = " << c.identity_samples << "\n";
    str("output_dir", c.output_dir);
    out << "seed = " << c.seed << "\n";
    auto opt = [&](const char* k, double v) {
        if (!std::isnan(v)) num(k, v);
    };
    opt("assert_max_error", c.assert_max_error);
    opt("assert_gap_max", c.assert_gap_max);
    opt("assert_alpha_min", c.assert_alpha_min);
    opt("assert_alpha_max", c.assert_alpha_max);
    opt("assert_residual_max", c.assert_residual_max);
    boolean("assert_cone", c.assert_cone);
    num("assert_cone_tol", c.assert_cone_tol);
    return out.str();
}

std::optional<ConditionSpec> condition_of(const ExperimentConfig& cfg) {
    if (cfg.condition == "B") return ConditionSpec::b(cfg.zeta, cfg.rho);
    if (cfg.condition == "E") return ConditionSpec::e(cfg.tau, cfg.mu, cfg.lambda_cap);
    if (cfg.condition == "L") return ConditionSpec::l(cfg.tau, cfg.eta);
    return std::nullopt;
}

} // namespace tauflow
