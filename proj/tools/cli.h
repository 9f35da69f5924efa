#ifndef HAARPSI_TOOLS_CLI_H_
#define HAARPSI_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace haarpsi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Runs the command line `args` (program name excluded) with human output on
// `out` and warnings/errors on `err`; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace haarpsi::cli

#endif  // HAARPSI_TOOLS_CLI_H_
