#include "fedsplit/federation/transport.hpp"

#include <sstream>

#include "fedsplit/errors.hpp"

namespace fedsplit {

std::string format_audit_line(const AuditRecord& r) {
  std::ostringstream os;
  os << r.seq << ' ' << r.epoch << ' ' << sender_hex(r.sender) << ' ' << to_string(r.msg_type)
     << ' ' << r.payload_len;
  return os.str();
}

struct InProcessBus::State {
  std::mutex mu;
  std::uint64_t next_seq = 1;
  std::map<SenderId, std::deque<Bytes>> inboxes;
  std::vector<AuditRecord> audit;
};

class InProcessBus::BusEndpoint final : public Endpoint {
 public:
  BusEndpoint(std::shared_ptr<State> state, SenderId self)
      : state_(std::move(state)), self_(self) {}

  void send(const GradientFrame& frame) override {
    if (frame.sender_id != self_) throw ProtocolError("frame sender does not match endpoint");
    Bytes wire = encode_frame(frame);
    std::lock_guard lock(state_->mu);
    const std::uint64_t seq = state_->next_seq++;
    stamp_seq(wire, seq);
    state_->audit.push_back({seq, frame.epoch, frame.sender_id, frame.msg_type,
                             frame.ciphertext.size() + frame.auth_tag.size()});
    for (auto& [id, inbox] : state_->inboxes) {
      if (id != self_) inbox.push_back(wire);
    }
  }

  GradientFrame receive() override {
    Bytes wire;
    {
      std::lock_guard lock(state_->mu);
      auto& inbox = state_->inboxes.at(self_);
      if (inbox.empty()) throw TransportError("no frame pending for receiver");
      wire = std::move(inbox.front());
      inbox.pop_front();
    }
    return decode_frame(wire);
  }

 private:
  std::shared_ptr<State> state_;
  SenderId self_;
};

InProcessBus::InProcessBus() : state_(std::make_shared<State>()) {}

std::unique_ptr<Endpoint> InProcessBus::connect(const SenderId& sender) {
  std::lock_guard lock(state_->mu);
  if (!state_->inboxes.emplace(sender, std::deque<Bytes>{}).second) {
    throw ProtocolError("duplicate sender id " + sender_hex(sender));
  }
  return std::make_unique<BusEndpoint>(state_, sender);
}

std::vector<AuditRecord> InProcessBus::audit() const {
  std::lock_guard lock(state_->mu);
  return state_->audit;
}

std::unique_ptr<TcpEndpoint> TcpEndpoint::connect(const net::Address& bb, const SenderId& sender,
                                                  std::chrono::milliseconds receive_timeout) {
  net::Socket s = net::connect_tcp(bb);
  net::set_receive_timeout(s, receive_timeout);
  net::send_all(s, encode_frame(make_hello(sender)));
  return std::unique_ptr<TcpEndpoint>(new TcpEndpoint(std::move(s)));
}

void TcpEndpoint::send(const GradientFrame& frame) {
  GradientFrame f = frame;
  f.seq = 0;
  net::send_all(socket_, encode_frame(f));
}

GradientFrame TcpEndpoint::receive() {
  auto wire = net::read_frame(socket_);
  if (!wire) throw TransportError("black board closed the connection");
  return decode_frame(*wire);
}

}  // namespace fedsplit
