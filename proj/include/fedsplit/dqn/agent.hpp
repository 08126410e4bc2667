#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedsplit/dqn/replay_buffer.hpp"
#include "fedsplit/envs/env.hpp"
#include "fedsplit/nn/model.hpp"
#include "fedsplit/random.hpp"

namespace fedsplit {

struct AgentHyperparams {
  double gamma = 0.9;
  double lr = 0.2;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  double epsilon_decay = 0.95;  // per epoch
  std::size_t batch_size = 32;
  std::size_t train_steps_per_epoch = 64;
  std::size_t buffer_capacity = 10000;
  // Multiplies raw rewards before they enter the TD target. Defaults to
  // (1 - gamma) so that targets stay inside the Sigmoid head's (0, 1) range.
  std::optional<double> reward_scale;

  double effective_reward_scale() const { return reward_scale.value_or(1.0 - gamma); }
  // max(end, start * decay^epoch)
  double epsilon_at(std::size_t epoch) const;
  void validate() const;
};

class Agent {
 public:
  Agent(std::string id, SplitModel model, AgentHyperparams hp, std::uint64_t seed);

  const std::string& id() const { return id_; }
  const SplitModel& model() const { return model_; }
  SplitModel& model() { return model_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  ReplayBuffer& buffer() { return buffer_; }
  const AgentHyperparams& hyperparams() const { return hp_; }
  Rng& action_rng() { return action_rng_; }
  Rng& replay_rng() { return replay_rng_; }

 private:
  std::string id_;
  SplitModel model_;
  AgentHyperparams hp_;
  ReplayBuffer buffer_;
  Rng action_rng_;
  Rng replay_rng_;
};

// Epsilon-greedy over the model's Q outputs. Ties go to the lowest action.
// Always consumes exactly one uniform draw, plus one more when exploring.
int select_action(const SplitModel& model, const Observation& obs, double epsilon, Rng& rng);

struct RolloutResult {
  std::vector<Transition> transitions;
  double episode_return = 0.0;  // sum of raw rewards
};

// Runs one episode from reset(config, env_seed) to done, pushing every
// transition into the agent's replay buffer.
RolloutResult rollout(Agent& agent, const EnvConfig& config, std::uint64_t env_seed,
                      double epsilon);

struct TrainResult {
  // Summed additive change to the GLOBAL layer over all SGD steps. After
  // training the agent's own GLOBAL layer equals snapshot + delta, computed
  // the same way a remote replica computes it.
  LayerDelta global_delta;
  std::size_t steps = 0;
  double min_target = 0.0;
  double max_target = 0.0;
  double mean_loss = 0.0;
};

// train_steps_per_epoch minibatch SGD steps of TD(0) on squared error of the
// taken action's output. Empty buffer -> zero delta, model untouched.
TrainResult train_offline(Agent& agent);

// One minibatch gradient of mean squared TD error on the taken actions.
GradientBundle td_gradient(const SplitModel& model, std::span<const Transition> batch,
                           double gamma, double reward_scale, double* loss = nullptr,
                           double* min_target = nullptr, double* max_target = nullptr);

}  // namespace fedsplit
