#ifndef RS2GS_TOOLS_CLI_H_
#define RS2GS_TOOLS_CLI_H_

#include <ostream>

namespace rs2gs {

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rs2gs

#endif  // RS2GS_TOOLS_CLI_H_
