#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fedsplit/dqn/agent.hpp"
#include "fedsplit/envs/env.hpp"
#include "fedsplit/federation/crypto.hpp"
#include "fedsplit/federation/frame.hpp"
#include "fedsplit/federation/transport.hpp"

namespace fedsplit {

// GLOBAL layer += delta. ProtocolError if the delta names another layer or
// its shape differs from the model's GLOBAL layer.
void apply_remote(SplitModel& model, const LayerDelta& delta);

struct AppliedFrame {
  std::uint64_t seq = 0;
  std::uint32_t epoch = 0;
  SenderId sender{};
};

// One agent's view of the federation: its key, its endpoint, and the
// seq-ordered record of remote deltas it has applied.
class FederationSession {
 public:
  FederationSession(SenderId self, SharedKey key, std::unique_ptr<Endpoint> endpoint);

  const SenderId& id() const { return self_; }

  // Seals and sends the delta. Returns the frame as sent (seq still 0).
  GradientFrame broadcast(const LayerDelta& delta, std::uint32_t epoch);

  // Receives exactly `count` frames, authenticates and decodes all of them,
  // and only then applies them in seq order. A failure anywhere leaves the
  // model untouched.
  void apply_pending(SplitModel& model, std::size_t count);

  std::uint64_t last_applied_seq() const { return last_applied_seq_; }
  const std::vector<AppliedFrame>& applied() const { return applied_; }

 private:
  SenderId self_;
  SharedKey key_;
  std::unique_ptr<Endpoint> endpoint_;
  std::uint64_t last_applied_seq_ = 0;
  std::vector<AppliedFrame> applied_;
};

struct Participant {
  Agent* agent = nullptr;
  EnvConfig env;
  std::uint64_t episode_seed = 0;        // episode k uses derive_seed(episode_seed, k)
  FederationSession* session = nullptr;  // null for an agent training alone
};

struct EpochResult {
  std::vector<double> returns;  // per participant, turn order
  std::vector<TrainResult> training;
};

// One epoch of the turn-based schedule. Participants are in turn order.
//   1. Each agent in turn rolls out one episode.
//   2. Each agent in turn applies the deltas broadcast earlier in this
//      epoch, trains offline, and broadcasts its GLOBAL delta.
//   3. Barrier: each agent applies the deltas broadcast after its own.
// After step 3 every federated agent holds the same GLOBAL layer.
// Transport failures surface as TransportError; partial frame sets are never
// applied.
EpochResult run_epoch(std::span<Participant> participants, std::uint32_t epoch);

}  // namespace fedsplit
