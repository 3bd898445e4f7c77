#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "vulnforge/net.hpp"

namespace vulnforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitOperational = 1;
inline constexpr int kExitUsage = 2;

// Runs one vulnforge command. `args` excludes the program name. A non-null
// transport replaces the network for every command that fetches.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::shared_ptr<Transport> transport = nullptr);

}  // namespace vulnforge
