#pragma once

#include <cstdio>
#include <exception>
#include <functional>
#include <string>

#include "vvuq/core/errors.hpp"

namespace vvuq::cli {

enum Exit { kOk = 0, kRunFailures = 1, kUsage = 2, kRefused = 3, kCorrupt = 4 };

inline int exit_code_for(const Error& e) {
  const auto& c = e.code();
  if (c == "store-corrupt") return kCorrupt;
  if (c == "missing-run" || c == "scorer-error" || c == "executor-error") return kRunFailures;
  return kUsage;
}

/// Runs a subcommand body, mapping library errors to exit codes.
inline int guarded(const char* prog, const std::function<int()>& body) {
  try {
    return body();
  } catch (const StoreCorrupt& e) {
    std::fprintf(stderr, "%s: %s\n", prog, e.what());
    std::fprintf(stderr,
                 "%s: the campaign store failed its integrity checks; restore campaign.db from a backup or "
                 "re-create the campaign with 'uq init --force'\n",
                 prog);
    return kCorrupt;
  } catch (const Error& e) {
    std::fprintf(stderr, "%s: %s\n", prog, e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", prog, e.what());
    return kUsage;
  }
}

}  // namespace vvuq::cli
