#pragma once

#include <functional>
#include <set>
#include <string>
#include <string_view>

#include "vvuq/core/errors.hpp"
#include "vvuq/core/parameter.hpp"

namespace vvuq::campaign {

// Placeholder grammar: <d>name with name = [A-Za-z_][A-Za-z0-9_]*, and <d><d>
// for a literal delimiter. A delimiter followed by anything else is an error.

namespace detail {

template <class OnName>
std::string scan_template(std::string_view text, char delim, OnName&& on_name) {
  std::string out;
  out.reserve(text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') ++line;
    if (c != delim) {
      out.push_back(c);
      continue;
    }
    if (i + 1 < text.size() && text[i + 1] == delim) {
      out.push_back(delim);
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (j >= text.size() || !is_identifier_start(text[j]))
      throw EncodingError("stray '" + std::string(1, delim) + "' at line " + std::to_string(line) +
                          " is neither a placeholder nor an escape");
    while (j < text.size() && is_identifier_char(text[j])) ++j;
    out += on_name(text.substr(i + 1, j - i - 1));
    i = j - 1;
  }
  return out;
}

}  // namespace detail

/// Distinct names referenced by the template.
inline std::set<std::string> placeholders(std::string_view text, char delim = '$') {
  std::set<std::string> names;
  detail::scan_template(text, delim, [&](std::string_view n) {
    names.emplace(n);
    return std::string();
  });
  return names;
}

/// Substitutes every placeholder via `lookup`, which returns the rendered
/// value or throws for unknown names.
inline std::string render(std::string_view text, char delim,
                          const std::function<std::string(std::string_view)>& lookup) {
  return detail::scan_template(text, delim, lookup);
}

}  // namespace vvuq::campaign
