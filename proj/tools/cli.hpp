#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rasptk {

struct CliEnv {
  bool color = false;
};

// Exit status: 0 success or pass, 1 verification failure, 2 usage or config error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliEnv& env = {});

}  // namespace rasptk
