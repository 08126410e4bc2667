#include <gtest/gtest.h>

#include <memory>

#include "fedsplit/errors.hpp"
#include "fedsplit/federation/session.hpp"
#include "fedsplit/random.hpp"

using namespace fedsplit;

namespace {

SenderId id_of(std::uint8_t b) {
  SenderId s{};
  s.fill(b);
  return s;
}

LayerDelta ones_delta(double v) {
  return {kGlobalLayerId, Matrix(32, 16, v), Vector(16, v)};
}

// N agents on one bus, all starting from the same model.
struct Fleet {
  InProcessBus bus;
  SharedKey key = SharedKey::generate();
  std::vector<std::unique_ptr<Agent>> agents;
  std::vector<std::unique_ptr<FederationSession>> sessions;
  std::vector<Participant> participants;

  Fleet(std::size_t n, std::uint64_t seed, const std::vector<EnvConfig>& envs = {}) {
    const auto model_seed = derive_seed(seed, "model");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string name(1, static_cast<char>('A' + i));
      AgentHyperparams hp;
      hp.train_steps_per_epoch = 8;
      agents.push_back(std::make_unique<Agent>(name, init_model(model_seed, split_topology(name), name),
                                               hp, derive_seed(seed, name)));
      const SenderId sid = id_of(static_cast<std::uint8_t>(i + 1));
      sessions.push_back(std::make_unique<FederationSession>(sid, key, bus.connect(sid)));
    }
    for (std::size_t i = 0; i < n; ++i) {
      participants.push_back({agents[i].get(), envs.empty() ? EnvConfig{} : envs[i],
                              derive_seed(seed, static_cast<std::uint64_t>(i)), sessions[i].get()});
    }
  }
};

}  // namespace

TEST(InProcessBus, NoEchoAndGlobalSeq) {
  InProcessBus bus;
  auto a = bus.connect(id_of(1));
  auto b = bus.connect(id_of(2));
  auto c = bus.connect(id_of(3));
  const SharedKey k = SharedKey::generate();
  a->send(seal(ones_delta(1), k, 0, id_of(1)));
  b->send(seal(ones_delta(2), k, 0, id_of(2)));

  EXPECT_EQ(c->receive().seq, 1u);
  EXPECT_EQ(c->receive().seq, 2u);
  EXPECT_EQ(b->receive().seq, 1u);
  EXPECT_EQ(a->receive().seq, 2u);
  EXPECT_THROW(a->receive(), TransportError);
  EXPECT_THROW(b->receive(), TransportError);

  const auto audit = bus.audit();
  ASSERT_EQ(audit.size(), 2u);
  EXPECT_EQ(audit[0].sender, id_of(1));
  EXPECT_EQ(audit[1].payload_len, encode_delta_payload(ones_delta(0)).size() + kTagBytes);
  EXPECT_EQ(format_audit_line(audit[0]),
            "1 0 01010101010101010101010101010101 DELTA " + std::to_string(audit[0].payload_len));
}

TEST(InProcessBus, RejectsDuplicateAndSpoofedSender) {
  InProcessBus bus;
  auto a = bus.connect(id_of(1));
  EXPECT_THROW(bus.connect(id_of(1)), ProtocolError);
  EXPECT_THROW(a->send(make_hello(id_of(9))), ProtocolError);
}

TEST(ApplyRemote, ShapeAndLayerChecks) {
  SplitModel m = init_model(1, split_topology("A"), "A");
  const SplitModel before = m;
  LayerDelta wrong_layer = ones_delta(1);
  wrong_layer.layer_id = "A.1";
  EXPECT_THROW(apply_remote(m, wrong_layer), ProtocolError);
  EXPECT_THROW(apply_remote(m, {kGlobalLayerId, Matrix(16, 32), Vector(32)}), ProtocolError);
  EXPECT_EQ(m, before);
  apply_remote(m, ones_delta(0.5));
  EXPECT_EQ(m.layer("A.1"), before.layer("A.1"));
  EXPECT_EQ(m.global_layer().weights(3, 4), before.global_layer().weights(3, 4) + 0.5);
}

TEST(FederationSession, AppliesInSeqOrderAndLogs) {
  InProcessBus bus;
  const SharedKey k = SharedKey::generate();
  FederationSession a(id_of(1), k, bus.connect(id_of(1)));
  FederationSession b(id_of(2), k, bus.connect(id_of(2)));
  FederationSession c(id_of(3), k, bus.connect(id_of(3)));
  a.broadcast(ones_delta(0.25), 4);
  b.broadcast(ones_delta(0.5), 4);
  SplitModel m = init_model(3, split_topology("C"), "C");
  const double w0 = m.global_layer().weights(0, 0);
  c.apply_pending(m, 2);
  EXPECT_EQ(m.global_layer().weights(0, 0), (w0 + 0.25) + 0.5);
  EXPECT_EQ(c.last_applied_seq(), 2u);
  ASSERT_EQ(c.applied().size(), 2u);
  EXPECT_EQ(c.applied()[0].sender, id_of(1));
  EXPECT_EQ(c.applied()[1].epoch, 4u);
}

TEST(FederationSession, RejectsForeignKeyWithoutTouchingModel) {
  InProcessBus bus;
  FederationSession a(id_of(1), SharedKey::generate(), bus.connect(id_of(1)));
  FederationSession b(id_of(2), SharedKey::generate(), bus.connect(id_of(2)));
  a.broadcast(ones_delta(1), 0);
  SplitModel m = init_model(3, split_topology("B"), "B");
  const SplitModel before = m;
  EXPECT_THROW(b.apply_pending(m, 1), AuthError);
  EXPECT_EQ(m, before);
}

TEST(FederationSession, MismatchedLayerLeavesModelUntouched) {
  InProcessBus bus;
  const SharedKey k = SharedKey::generate();
  FederationSession a(id_of(1), k, bus.connect(id_of(1)));
  FederationSession b(id_of(2), k, bus.connect(id_of(2)));
  a.broadcast(ones_delta(1), 0);
  a.broadcast({kGlobalLayerId, Matrix(4, 4), Vector(4)}, 0);
  SplitModel m = init_model(3, split_topology("B"), "B");
  const SplitModel before = m;
  EXPECT_THROW(b.apply_pending(m, 2), ProtocolError);
  EXPECT_EQ(m, before);
}

TEST(RunEpoch, ThreeReplicasStayBitIdentical) {
  Fleet fleet(3, 99);
  for (std::uint32_t e = 0; e < 6; ++e) {
    const EpochResult r = run_epoch(fleet.participants, e);
    ASSERT_EQ(r.returns.size(), 3u);
    const DenseLayer& g0 = fleet.agents[0]->model().global_layer();
    for (std::size_t i = 1; i < 3; ++i) EXPECT_EQ(fleet.agents[i]->model().global_layer(), g0) << "epoch " << e;
  }
  // Every replica applied all frames but its own.
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(fleet.sessions[i]->applied().size(), 6u * 2);
  EXPECT_EQ(fleet.bus.audit().size(), 6u * 3);
}

TEST(RunEpoch, GlobalLayerIsSumOfAllDeltasInSeqOrder) {
  Fleet fleet(2, 7);
  const DenseLayer start = fleet.agents[0]->model().global_layer();
  ASSERT_EQ(start, fleet.agents[1]->model().global_layer());
  const EpochResult r = run_epoch(fleet.participants, 0);
  DenseLayer expect = start;
  add_delta(expect, {r.training[0].global_delta.weights, r.training[0].global_delta.bias});
  add_delta(expect, {r.training[1].global_delta.weights, r.training[1].global_delta.bias});
  EXPECT_EQ(fleet.agents[0]->model().global_layer(), expect);
  EXPECT_EQ(fleet.agents[1]->model().global_layer(), expect);
}

TEST(RunEpoch, SoloParticipantIgnoresFederation) {
  Agent solo("A", init_model(1, split_topology("A"), "A"), {}, 1);
  std::vector<Participant> ps{{&solo, EnvConfig{}, 5, nullptr}};
  const EpochResult r = run_epoch(ps, 0);
  EXPECT_EQ(r.returns.size(), 1u);
  EXPECT_GT(r.returns[0], 0.0);
}
