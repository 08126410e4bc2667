#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "fedsplit/bytes.hpp"

namespace fedsplit::net {

// Owning POSIX socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close();
  // Wakes up any thread blocked in recv/accept on this socket.
  void shutdown();

 private:
  int fd_ = -1;
};

struct Address {
  std::string host;
  std::uint16_t port = 0;

  std::string str() const { return host + ":" + std::to_string(port); }
};

// "host:port"; throws std::invalid_argument.
Address parse_address(const std::string& s);

// Bound, listening socket. Port 0 picks an ephemeral port; see local_port().
Socket listen_tcp(const Address& bind, int backlog = 16);
std::uint16_t local_port(const Socket& s);
Socket accept_tcp(const Socket& listener);
Socket connect_tcp(const Address& addr, std::chrono::milliseconds timeout = std::chrono::seconds(10));

void set_receive_timeout(const Socket& s, std::chrono::milliseconds timeout);

// Throw TransportError on failure. recv_exact also fails on orderly EOF.
void send_all(const Socket& s, std::span<const std::uint8_t> bytes);
void recv_exact(const Socket& s, std::span<std::uint8_t> out);

// Reads one length-prefixed frame (prefix included in the result). Returns
// nullopt on clean EOF at a frame boundary. DecodeError on a bad length.
std::optional<Bytes> read_frame(const Socket& s);

}  // namespace fedsplit::net
