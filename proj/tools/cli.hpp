#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace adaam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point behind the `adaam` executable. `args` excludes the program
/// name. Returns 0 on success, 1 on usage errors, 2 on data errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adaam::cli
