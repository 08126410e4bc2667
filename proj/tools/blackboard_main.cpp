#include <iostream>

#include "blackboard_command.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Keyless forwarder for encrypted federation frames"};
  fedsplit::cli::BlackBoardArgs args;
  fedsplit::cli::add_blackboard_options(app, args);
  CLI11_PARSE(app, argc, argv);
  try {
    return fedsplit::cli::run_blackboard(args);
  } catch (const std::exception& e) {
    std::cerr << "blackboard: " << e.what() << '\n';
    return 1;
  }
}
