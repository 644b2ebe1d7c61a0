#pragma once

#include <map>
#include <string>
#include <string_view>

namespace delaystab {

/// Evaluates an arithmetic expression over named parameters: numbers, identifiers, + - * / ^,
/// parentheses, unary signs, and sqrt/abs/exp/log/sin/cos/tan. `pi` is predefined.
/// Throws InputError with the offending position.
double evaluate_expression(std::string_view text, const std::map<std::string, double>& vars = {});

}  // namespace delaystab
