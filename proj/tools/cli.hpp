#ifndef PKGRID_TOOLS_CLI_HPP
#define PKGRID_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace pkgrid::cli
{
enum ExitCode : int
{
    kSuccess = 0,
    kPipelineFailure = 1,
    kUsageError = 2
};

/// Entry point of the pkgrid tool; args exclude the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace pkgrid::cli
#endif // PKGRID_TOOLS_CLI_HPP
