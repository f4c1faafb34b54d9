#ifndef HDRVQA_CLI_H_
#define HDRVQA_CLI_H_

#include <string>
#include <vector>

namespace hdrvqa::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration
// error (including feature-layout mismatches).
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the hdrvqa tool; args excludes the program name.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace hdrvqa::cli

#endif  // HDRVQA_CLI_H_
