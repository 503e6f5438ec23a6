#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace vvuq::campaign {

enum class RunStatus { NEW, ENCODED, SUBMITTED, COMPLETED, FAILED, COLLATED };

inline constexpr std::array<RunStatus, 6> kAllStatuses{RunStatus::NEW,       RunStatus::ENCODED,
                                                       RunStatus::SUBMITTED, RunStatus::COMPLETED,
                                                       RunStatus::FAILED,    RunStatus::COLLATED};

inline std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::NEW: return "NEW";
    case RunStatus::ENCODED: return "ENCODED";
    case RunStatus::SUBMITTED: return "SUBMITTED";
    case RunStatus::COMPLETED: return "COMPLETED";
    case RunStatus::FAILED: return "FAILED";
    case RunStatus::COLLATED: return "COLLATED";
  }
  return "?";
}

inline std::optional<RunStatus> parse_status(std::string_view s) {
  for (auto st : kAllStatuses)
    if (to_string(st) == s) return st;
  return std::nullopt;
}

/// The only edges of the run lifecycle.
inline bool transition_allowed(RunStatus from, RunStatus to) {
  using S = RunStatus;
  switch (from) {
    case S::NEW: return to == S::ENCODED;
    case S::ENCODED: return to == S::SUBMITTED;
    case S::SUBMITTED: return to == S::COMPLETED || to == S::FAILED;
    case S::COMPLETED: return to == S::COLLATED;
    case S::FAILED: return to == S::ENCODED;
    case S::COLLATED: return false;
  }
  return false;
}

}  // namespace vvuq::campaign
