#pragma once

#include "tauflow/field.hpp"

#include <functional>
#include <string>

namespace tauflow {

/// Compile a scalar expression over x1, x2, x3 (aliases: x for x1, r for |x|)
/// into a pointwise function. Supports + - * / ^, parentheses, numeric
/// literals, constants pi and e, and the usual one/two-argument functions
/// (sin, cos, tan, atan, exp, log, sqrt, abs, tanh, pow, min, max).
/// Throws std::invalid_argument with a position diagnostic on parse errors.
std::function<double(const Point&)> compile_expression(const std::string& text, int dim);

} // namespace tauflow
