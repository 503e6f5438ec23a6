#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "vvuq/sampling/distribution.hpp"

namespace vvuq {

enum class ParamKind { real, integer };

/// An uncertain (or pinned) input of the simulation.
struct ParameterDef {
  std::string name;
  ParamKind kind = ParamKind::real;
  double default_value = 0.0;
  sampling::Distribution1D distribution = sampling::Distribution1D::constant(0.0);
};

/// Placeholder identifier grammar: [A-Za-z_][A-Za-z0-9_]*
inline bool is_identifier_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool is_identifier_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
inline bool is_valid_identifier(std::string_view s) {
  if (s.empty() || !is_identifier_start(s.front())) return false;
  for (char c : s)
    if (!is_identifier_char(c)) return false;
  return true;
}

}  // namespace vvuq
