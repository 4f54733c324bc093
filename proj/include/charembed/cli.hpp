#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace charembed {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;    // bad flags, unreadable/unwritable paths, bad config
inline constexpr int kExitNumeric = 3;  // non-finite loss or gradient

// Entry point behind the `charembed` binary: train, embed, reconstruct,
// augment, eval. Never throws; failures are reported on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace charembed
