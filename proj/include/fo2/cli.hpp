#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fo2 {

// Exit codes shared by every subcommand.
//   0  positive answer (satisfiable / invariant / accepted / model found)
//   1  negative answer (unsatisfiable / not invariant / rejected / no model)
//   2  inconclusive (budget exhausted or bound-limited)
//   64 usage error
//   70 internal error
inline constexpr int exit_yes = 0;
inline constexpr int exit_no = 1;
inline constexpr int exit_unknown = 2;
inline constexpr int exit_usage = 64;
inline constexpr int exit_internal = 70;

// Entry point of the fo2sat tool, callable in-process for tests.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace fo2
