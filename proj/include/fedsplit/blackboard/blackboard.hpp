#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "fedsplit/federation/frame.hpp"
#include "fedsplit/federation/net.hpp"
#include "fedsplit/federation/transport.hpp"

namespace fedsplit {

struct BlackBoardOptions {
  net::Address bind{"127.0.0.1", 0};
  std::size_t expected_agents = 2;
  std::size_t queue_capacity = 1024;  // frames per receiver before backpressure
  std::optional<std::filesystem::path> audit_path;
  // Sees every byte read from any agent connection. Test hook.
  std::function<void(std::span<const std::uint8_t>)> ingress_tap;
};

// Keyless store-and-forward sequencer. Accepts expected_agents HELLOs, then
// stamps each incoming frame with the next global seq and queues it to every
// other agent. Never echoes a frame to its sender and never inspects payloads.
//
// When every agent of a session has disconnected the registry and counter
// reset, so one process can serve consecutive sessions.
class BlackBoard {
 public:
  explicit BlackBoard(BlackBoardOptions options);
  ~BlackBoard();

  BlackBoard(const BlackBoard&) = delete;
  BlackBoard& operator=(const BlackBoard&) = delete;

  // Binds and starts the accept loop in the background.
  void start();
  // Blocks until stop() is called.
  void wait();
  void stop();

  std::uint16_t port() const { return port_; }
  std::vector<AuditRecord> audit() const;
  std::size_t sessions_completed() const;

 private:
  struct Connection;

  void accept_loop();
  void reader_loop(std::shared_ptr<Connection> conn);
  void writer_loop(std::shared_ptr<Connection> conn);
  bool register_agent(const std::shared_ptr<Connection>& conn, const SenderId& id);
  void forward(const std::shared_ptr<Connection>& from, Bytes wire, const GradientFrame& header);
  void drop(const std::shared_ptr<Connection>& conn);
  void record(const AuditRecord& r);

  BlackBoardOptions options_;
  net::Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<SenderId, std::shared_ptr<Connection>> registry_;
  std::vector<std::shared_ptr<Connection>> connections_;
  bool session_open_ = false;  // all expected agents have said HELLO
  std::uint64_t next_seq_ = 1;
  std::size_t sessions_completed_ = 0;
  mutable std::mutex audit_mu_;  // audit() must not wait on a stalled forward
  std::vector<AuditRecord> audit_;
  std::ofstream audit_file_;
  std::vector<std::thread> workers_;
};

}  // namespace fedsplit
