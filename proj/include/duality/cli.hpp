#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace duality::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInfeasible = 3;

/// Runs one command line (without the program name). Subcommands:
/// simulate, surface, chsh, hom, hvcheck, analyze.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace duality::cli
