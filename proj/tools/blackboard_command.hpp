#pragma once

#include <cstddef>
#include <string>

#include "CLI11.hpp"

namespace fedsplit::cli {

struct BlackBoardArgs {
  std::string bind = "127.0.0.1:7400";
  std::size_t agents = 2;
  std::string audit;
};

// Registers --bind/--agents/--audit. There is deliberately no key option.
void add_blackboard_options(CLI::App& app, BlackBoardArgs& args);

// Serves until SIGINT/SIGTERM. Returns a process exit code.
int run_blackboard(const BlackBoardArgs& args);

}  // namespace fedsplit::cli
