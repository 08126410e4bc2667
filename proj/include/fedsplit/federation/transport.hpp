#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "fedsplit/federation/frame.hpp"
#include "fedsplit/federation/net.hpp"

namespace fedsplit {

// Header-only view of a forwarded frame. This is everything a forwarder is
// allowed to learn.
struct AuditRecord {
  std::uint64_t seq = 0;
  std::uint32_t epoch = 0;
  SenderId sender{};
  MsgType msg_type = MsgType::kDelta;
  std::size_t payload_len = 0;  // ciphertext + tag bytes

  friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

// "seq epoch sender_hex msg_type payload_len"
std::string format_audit_line(const AuditRecord& r);

// One agent's connection to the forwarding fabric.
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  // The frame's seq is ignored; the forwarder assigns it.
  virtual void send(const GradientFrame& frame) = 0;
  // Next frame addressed to this agent, in forwarder seq order.
  // TransportError when nothing can arrive (closed, timed out, or, in
  // process, nothing pending).
  virtual GradientFrame receive() = 0;
};

// Forwarder for agents living in one process. Same semantics as the
// networked Black Board: one global seq counter, fan-out to every
// registered agent except the sender, headers-only audit.
class InProcessBus {
 public:
  InProcessBus();

  // Registers an agent. Throws ProtocolError for a duplicate sender id.
  std::unique_ptr<Endpoint> connect(const SenderId& sender);

  std::vector<AuditRecord> audit() const;

 private:
  struct State;
  class BusEndpoint;
  std::shared_ptr<State> state_;
};

// Agent side of a TCP connection to a Black Board. Sends HELLO on connect.
class TcpEndpoint final : public Endpoint {
 public:
  static std::unique_ptr<TcpEndpoint> connect(
      const net::Address& bb, const SenderId& sender,
      std::chrono::milliseconds receive_timeout = std::chrono::seconds(30));

  void send(const GradientFrame& frame) override;
  GradientFrame receive() override;

 private:
  explicit TcpEndpoint(net::Socket s) : socket_(std::move(s)) {}
  net::Socket socket_;
};

}  // namespace fedsplit
