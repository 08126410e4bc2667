#include "fedsplit/federation/session.hpp"

#include <algorithm>

#include "fedsplit/errors.hpp"

namespace fedsplit {

void apply_remote(SplitModel& model, const LayerDelta& delta) {
  DenseLayer& global = model.global_layer();
  if (delta.layer_id != global.id) {
    throw ProtocolError("delta for layer '" + delta.layer_id + "' but GLOBAL layer is '" +
                        global.id + "'");
  }
  if (!global.weights.same_shape(delta.weights) || global.bias.size() != delta.bias.size()) {
    throw ProtocolError("delta shape does not match GLOBAL layer");
  }
  add_delta(global, {delta.weights, delta.bias});
}

FederationSession::FederationSession(SenderId self, SharedKey key,
                                     std::unique_ptr<Endpoint> endpoint)
    : self_(self), key_(std::move(key)), endpoint_(std::move(endpoint)) {}

GradientFrame FederationSession::broadcast(const LayerDelta& delta, std::uint32_t epoch) {
  GradientFrame f = seal(delta, key_, epoch, self_);
  endpoint_->send(f);
  return f;
}

void FederationSession::apply_pending(SplitModel& model, std::size_t count) {
  struct Pending {
    AppliedFrame meta;
    LayerDelta delta;
  };
  std::vector<Pending> batch;
  batch.reserve(count);
  std::uint64_t prev = last_applied_seq_;
  for (std::size_t i = 0; i < count; ++i) {
    GradientFrame f = endpoint_->receive();
    if (f.msg_type != MsgType::kDelta) {
      throw ProtocolError("expected DELTA, got " + to_string(f.msg_type));
    }
    if (f.sender_id == self_) throw ProtocolError("received own frame back");
    if (f.seq <= prev) {
      throw ProtocolError("seq " + std::to_string(f.seq) + " not above " + std::to_string(prev));
    }
    prev = f.seq;
    batch.push_back({{f.seq, f.epoch, f.sender_id}, open(f, key_)});
  }
  // Validate every delta before touching the model.
  const DenseLayer& global = model.global_layer();
  for (const auto& p : batch) {
    if (p.delta.layer_id != global.id || !global.weights.same_shape(p.delta.weights) ||
        global.bias.size() != p.delta.bias.size()) {
      throw ProtocolError("delta does not match GLOBAL layer");
    }
  }
  for (auto& p : batch) {
    apply_remote(model, p.delta);
    last_applied_seq_ = p.meta.seq;
    applied_.push_back(p.meta);
  }
}

EpochResult run_epoch(std::span<Participant> participants, std::uint32_t epoch) {
  EpochResult result;
  result.returns.reserve(participants.size());
  result.training.reserve(participants.size());

  for (auto& p : participants) {
    const double eps = p.agent->hyperparams().epsilon_at(epoch);
    const auto r = rollout(*p.agent, p.env, derive_seed(p.episode_seed, epoch), eps);
    result.returns.push_back(r.episode_return);
  }

  // Position among federated participants decides how many frames precede
  // and follow this agent's broadcast.
  std::size_t federated = 0;
  for (const auto& p : participants) federated += p.session != nullptr;

  std::size_t position = 0;
  for (auto& p : participants) {
    if (p.session) p.session->apply_pending(p.agent->model(), position);
    TrainResult t = train_offline(*p.agent);
    if (p.session) {
      p.session->broadcast(t.global_delta, epoch);
      ++position;
    }
    result.training.push_back(std::move(t));
  }

  position = 0;
  for (auto& p : participants) {
    if (!p.session) continue;
    p.session->apply_pending(p.agent->model(), federated - 1 - position);
    ++position;
  }
  return result;
}

}  // namespace fedsplit
