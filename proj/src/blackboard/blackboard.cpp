#include "fedsplit/blackboard/blackboard.hpp"

#include <iostream>

#include "fedsplit/errors.hpp"

namespace fedsplit {

struct BlackBoard::Connection {
  explicit Connection(net::Socket s) : socket(std::move(s)) {}

  net::Socket socket;
  SenderId id{};
  bool registered = false;

  std::mutex qmu;
  std::condition_variable qcv;
  std::deque<Bytes> queue;
  bool closed = false;
};

BlackBoard::BlackBoard(BlackBoardOptions options) : options_(std::move(options)) {
  if (options_.expected_agents < 2) throw std::invalid_argument("black board needs >= 2 agents");
  if (options_.queue_capacity == 0) throw std::invalid_argument("queue capacity must be > 0");
}

BlackBoard::~BlackBoard() { stop(); }

void BlackBoard::start() {
  if (options_.audit_path) {
    audit_file_.open(*options_.audit_path, std::ios::trunc);
    if (!audit_file_) throw std::runtime_error("cannot open audit file " + options_.audit_path->string());
  }
  listener_ = net::listen_tcp(options_.bind);
  port_ = net::local_port(listener_);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void BlackBoard::wait() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return stopping_.load(); });
}

void BlackBoard::stop() {
  if (stopping_.exchange(true)) {
    if (accept_thread_.joinable()) accept_thread_.join();
    return;
  }
  listener_.shutdown();
  std::vector<std::shared_ptr<Connection>> conns;
  {
    std::lock_guard lock(mu_);
    conns = connections_;
  }
  for (auto& c : conns) {
    {
      std::lock_guard ql(c->qmu);
      c->closed = true;
    }
    c->qcv.notify_all();
    c->socket.shutdown();
  }
  cv_.notify_all();
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  listener_.close();
}

std::vector<AuditRecord> BlackBoard::audit() const {
  std::lock_guard lock(audit_mu_);
  return audit_;
}

std::size_t BlackBoard::sessions_completed() const {
  std::lock_guard lock(mu_);
  return sessions_completed_;
}

void BlackBoard::accept_loop() {
  while (!stopping_) {
    net::Socket s;
    try {
      s = net::accept_tcp(listener_);
    } catch (const TransportError&) {
      if (stopping_) return;
      continue;
    }
    auto conn = std::make_shared<Connection>(std::move(s));
    std::lock_guard lock(mu_);
    if (stopping_) return;
    connections_.push_back(conn);
    workers_.emplace_back([this, conn] { reader_loop(conn); });
    workers_.emplace_back([this, conn] { writer_loop(conn); });
  }
}

bool BlackBoard::register_agent(const std::shared_ptr<Connection>& conn, const SenderId& id) {
  std::lock_guard lock(mu_);
  if (session_open_ || registry_.contains(id)) return false;
  conn->id = id;
  conn->registered = true;
  registry_.emplace(id, conn);
  if (registry_.size() == options_.expected_agents) session_open_ = true;
  cv_.notify_all();
  return true;
}

void BlackBoard::record(const AuditRecord& r) {
  std::lock_guard lock(audit_mu_);
  audit_.push_back(r);
  if (audit_file_.is_open()) audit_file_ << format_audit_line(r) << '\n' << std::flush;
}

void BlackBoard::forward(const std::shared_ptr<Connection>& from, Bytes wire,
                         const GradientFrame& header) {
  std::unique_lock lock(mu_);
  const std::uint64_t seq = next_seq_++;
  stamp_seq(wire, seq);
  record({seq, header.epoch, header.sender_id, header.msg_type,
          header.ciphertext.size() + header.auth_tag.size()});
  // Enqueue under the sequencing lock so every receiver sees seq order.
  for (auto& [id, conn] : registry_) {
    if (conn == from) continue;
    std::unique_lock ql(conn->qmu);
    // stop() cannot reach this queue while we hold mu_, so poll for it.
    while (!conn->qcv.wait_for(ql, std::chrono::milliseconds(50), [&] {
      return conn->closed || conn->queue.size() < options_.queue_capacity;
    })) {
      if (stopping_) return;
    }
    if (conn->closed) continue;
    conn->queue.push_back(wire);
    ql.unlock();
    conn->qcv.notify_all();
  }
}

void BlackBoard::drop(const std::shared_ptr<Connection>& conn) {
  {
    std::lock_guard ql(conn->qmu);
    conn->closed = true;
  }
  conn->qcv.notify_all();
  conn->socket.shutdown();

  std::lock_guard lock(mu_);
  if (conn->registered) {
    auto it = registry_.find(conn->id);
    if (it != registry_.end() && it->second == conn) registry_.erase(it);
    conn->registered = false;
    if (registry_.empty()) {
      session_open_ = false;
      next_seq_ = 1;
      ++sessions_completed_;
    }
  }
  std::erase(connections_, conn);
  cv_.notify_all();
}

void BlackBoard::reader_loop(std::shared_ptr<Connection> conn) {
  try {
    auto hello = net::read_frame(conn->socket);
    if (!hello) {
      drop(conn);
      return;
    }
    if (options_.ingress_tap) options_.ingress_tap(*hello);
    const GradientFrame h = decode_frame(*hello);
    if (h.msg_type != MsgType::kHello || !register_agent(conn, h.sender_id)) {
      drop(conn);
      return;
    }

    for (;;) {
      auto wire = net::read_frame(conn->socket);
      if (!wire) break;
      if (options_.ingress_tap) options_.ingress_tap(*wire);
      const GradientFrame header = decode_frame(*wire);
      if (header.msg_type == MsgType::kHello || header.sender_id != conn->id) break;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] {
          return stopping_ || session_open_ || !conn->registered;
        });
        if (stopping_) break;
      }
      forward(conn, std::move(*wire), header);
    }
  } catch (const std::exception& e) {
    if (!stopping_) std::cerr << "blackboard: dropping connection: " << e.what() << '\n';
  }
  drop(conn);
}

void BlackBoard::writer_loop(std::shared_ptr<Connection> conn) {
  for (;;) {
    Bytes wire;
    {
      std::unique_lock ql(conn->qmu);
      conn->qcv.wait(ql, [&] { return conn->closed || !conn->queue.empty(); });
      if (conn->queue.empty()) return;
      wire = std::move(conn->queue.front());
      conn->queue.pop_front();
    }
    conn->qcv.notify_all();
    try {
      net::send_all(conn->socket, wire);
    } catch (const TransportError&) {
      drop(conn);
      return;
    }
  }
}

}  // namespace fedsplit
