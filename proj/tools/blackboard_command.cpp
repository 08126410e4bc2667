#include "blackboard_command.hpp"

#include <pthread.h>

#include <csignal>
#include <iostream>

#include "fedsplit/blackboard/blackboard.hpp"

namespace fedsplit::cli {

void add_blackboard_options(CLI::App& app, BlackBoardArgs& args) {
  app.add_option("--bind", args.bind, "listen address host:port")->capture_default_str();
  app.add_option("--agents", args.agents, "number of agents per session")
      ->check(CLI::Range(2, 1024))
      ->capture_default_str();
  app.add_option("--audit", args.audit, "write one header line per forwarded frame to this file");
}

int run_blackboard(const BlackBoardArgs& args) {
  BlackBoardOptions opts;
  opts.bind = net::parse_address(args.bind);
  opts.expected_agents = args.agents;
  if (!args.audit.empty()) opts.audit_path = args.audit;

  // Block termination signals before any worker thread exists so that only
  // sigwait() below sees them.
  sigset_t mask;
  sigemptyset(&mask);
  sigaddset(&mask, SIGINT);
  sigaddset(&mask, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &mask, nullptr);

  BlackBoard bb(opts);
  bb.start();
  std::cerr << "blackboard: listening on " << opts.bind.host << ":" << bb.port() << " for "
            << args.agents << " agents\n";

  int sig = 0;
  sigwait(&mask, &sig);
  bb.stop();
  std::cerr << "blackboard: " << bb.audit().size() << " frames forwarded in "
            << bb.sessions_completed() << " completed sessions\n";
  return 0;
}

}  // namespace fedsplit::cli
