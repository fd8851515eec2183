#ifndef CPI_TOOLS_CLI_H_
#define CPI_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace cpi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs the `cpi` command line. |args| excludes the program name. Returns the
// process exit code.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace cpi

#endif  // CPI_TOOLS_CLI_H_
