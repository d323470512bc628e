#pragma once

#include "tauflow/analysis.hpp"
#include "tauflow/flow.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tauflow {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Flow, Expander, Decay, Cone, TransformCheck, IdentityCheck };

const char* kind_name(ExperimentKind k);

/// One batch experiment. Parsed from `key = value` text; every field has a
/// documented default that parse_config materializes and emit_config echoes.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Flow;
    double tau = 1.5707963267948966; // pi/2
    int dim = 1;
    double half_width = 2.0;
    double spacing = 0.05;
    double t_end = 1.0;
    std::vector<double> snapshot_times;
    double gamma = 1.0;
    double safety = 0.5;
    int monitor_stride = 10;
    BoundaryMode boundary = BoundaryMode::Frozen;

    // condition under test (kind cone; optional elsewhere)
    std::string condition = "none"; // none | B | E | L
    double zeta = 0.3, rho = 1.0;
    double mu = 1.5, lambda_cap = 3.0;
    double eta = 0.1;

    // initial data
    std::string preset = "quadratic"; // quadratic | perturbed-quadratic | homogeneous2 | expression
    double quad_c = 0.5;
    double bump_eps = 0.01;
    double bump_radius = 1.0;
    double angular_amp = 0.1;
    std::string expression;

    // expander options
    double newton_tol = 1e-9;
    int newton_max_iter = 25;
    double guess_scale = 0.9;
    bool guess_add_f_const = true; // add F_tau(c I) to the scaled guess
    bool normalized_flow = false;
    double normalized_flow_tol = 1e-6;
    double normalized_s_max = 40.0;

    // decay options
    double fit_t_start = 0.5;
    double transient_fraction = 0.0; // series already starts at fit_t_start

    // identity-check options
    int identity_samples = 10000;

    std::string output_dir = "out";
    unsigned long seed = 12345;

    // declared assertions; NaN / false = not asserted
    double assert_max_error = std::numeric_limits<double>::quiet_NaN();
    double assert_gap_max = std::numeric_limits<double>::quiet_NaN();
    double assert_alpha_min = std::numeric_limits<double>::quiet_NaN();
    double assert_alpha_max = std::numeric_limits<double>::quiet_NaN();
    double assert_residual_max = std::numeric_limits<double>::quiet_NaN();
    bool assert_cone = false;
    double assert_cone_tol = 1e-6;

    // NaN-valued assertion fields compare equal to each other (both "unset")
    bool operator==(const ExperimentConfig& other) const;
};

/// Parse the `key = value` format ('#' comments, blank lines ignored). Unknown
/// keys, type mismatches and constraint violations raise ConfigError with a
/// single-line diagnostic naming the key.
ExperimentConfig parse_config(const std::string& text);

/// Apply one `key=value` override on top of a parsed config.
void apply_override(ExperimentConfig& cfg, const std::string& key_equals_value);

/// Re-validate after overrides.
void validate_config(const ExperimentConfig& cfg);

/// Emit the full config (defaults materialized); parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& cfg);

/// The condition spec named by the config, if any.
std::optional<ConditionSpec> condition_of(const ExperimentConfig& cfg);

} // namespace tauflow
