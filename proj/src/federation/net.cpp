#include "fedsplit/federation/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <thread>

#include "fedsplit/errors.hpp"
#include "fedsplit/federation/frame.hpp"

namespace fedsplit::net {
namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_in resolve(const Address& addr) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(addr.port);
  const std::string host = addr.host.empty() || addr.host == "*" ? "0.0.0.0" : addr.host;
  if (inet_pton(AF_INET, host.c_str(), &sa.sin_addr) == 1) return sa;

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw TransportError("cannot resolve host '" + host + "'");
  }
  sa.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return sa;
}

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Address parse_address(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("address must be host:port");
  Address a;
  a.host = s.substr(0, colon);
  const std::string port = s.substr(colon + 1);
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
    a.port = static_cast<std::uint16_t>(p);
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid port in address '" + s + "'");
  }
  return a;
}

Socket listen_tcp(const Address& bind, int backlog) {
  Socket s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s.valid()) throw TransportError(errno_text("socket"));
  const int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in sa = resolve(bind);
  if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
    throw TransportError(errno_text(("bind " + bind.str()).c_str()));
  }
  if (::listen(s.fd(), backlog) != 0) throw TransportError(errno_text("listen"));
  return s;
}

std::uint16_t local_port(const Socket& s) {
  sockaddr_in sa{};
  socklen_t len = sizeof(sa);
  if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&sa), &len) != 0) {
    throw TransportError(errno_text("getsockname"));
  }
  return ntohs(sa.sin_port);
}

Socket accept_tcp(const Socket& listener) {
  for (;;) {
    const int fd = ::accept(listener.fd(), nullptr, nullptr);
    if (fd >= 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return Socket(fd);
    }
    if (errno == EINTR) continue;
    throw TransportError(errno_text("accept"));
  }
}

Socket connect_tcp(const Address& addr, std::chrono::milliseconds timeout) {
  const sockaddr_in sa = resolve(addr);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) throw TransportError(errno_text("socket"));
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) == 0) {
      const int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return s;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw TransportError(errno_text(("connect " + addr.str()).c_str()));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

void set_receive_timeout(const Socket& s, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(s.fd(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

void send_all(const Socket& s, std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(s.fd(), bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("send"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

namespace {

// Returns bytes read before EOF; throws on error/timeout.
std::size_t recv_some(const Socket& s, std::span<std::uint8_t> out) {
  std::size_t got = 0;
  while (got < out.size()) {
    const ssize_t n = ::recv(s.fd(), out.data() + got, out.size() - got, 0);
    if (n == 0) break;
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportError("receive timed out");
      throw TransportError(errno_text("recv"));
    }
    got += static_cast<std::size_t>(n);
  }
  return got;
}

}  // namespace

void recv_exact(const Socket& s, std::span<std::uint8_t> out) {
  if (recv_some(s, out) != out.size()) throw TransportError("connection closed by peer");
}

std::optional<Bytes> read_frame(const Socket& s) {
  Bytes buf(kLengthPrefixBytes);
  const std::size_t got = recv_some(s, buf);
  if (got == 0) return std::nullopt;
  if (got != buf.size()) throw TransportError("connection closed inside length prefix");
  const std::size_t total = *peek_frame_size(buf);
  buf.resize(total);
  recv_exact(s, std::span(buf).subspan(kLengthPrefixBytes));
  return buf;
}

}  // namespace fedsplit::net
