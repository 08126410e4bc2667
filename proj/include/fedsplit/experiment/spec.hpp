#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedsplit/dqn/agent.hpp"
#include "fedsplit/envs/env.hpp"
#include "fedsplit/federation/net.hpp"

namespace fedsplit {

enum class Group { kSame, kSimilar, kDiffTall, kDiffFat, kTotallyDiff };
enum class Mode { kCoop, kSoloA, kSoloB };
enum class TransportKind { kInProcess, kNetwork };

std::string to_string(Group g);
std::string to_string(Mode m);
std::string to_string(TransportKind t);
Group group_from_string(const std::string& s);
Mode mode_from_string(const std::string& s);
TransportKind transport_from_string(const std::string& s);

struct AgentSetup {
  std::string id;
  EnvConfig env;
  AgentHyperparams hp;
};

struct ExperimentSpec {
  Group group = Group::kSame;
  Mode mode = Mode::kCoop;
  std::size_t epochs = 200;
  std::size_t runs = 10;
  std::uint64_t base_seed = 0;
  std::array<AgentSetup, 2> agents;  // turn order: A then B
  TransportKind transport = TransportKind::kInProcess;
  // External Black Board. Without it, Network mode starts a private one on
  // the loopback interface for each run.
  std::optional<net::Address> blackboard;
  // Hex shared key. A fresh random key per run when absent.
  std::optional<std::string> key_hex;

  void validate() const;
};

// Environment pair (A, B) for each experiment group.
//   SAME          both default CartPole
//   SIMILAR       B: gravity 12.0
//   DIFF_TALL     B: gravity 12.0, pole_half_length 1.0
//   DIFF_FAT      B: gravity 12.0, pole_half_length 0.25, pole_mass 0.2
//   TOTALLY_DIFF  B: MountainCarMod
std::array<EnvConfig, 2> group_envs(Group g);

ExperimentSpec make_spec(Group g, Mode m);

// Flat sectioned key/value text:
//
//   # comment
//   [experiment]        group, mode, runs, epochs, seed
//   [env.A] / [env.B]   kind, gravity, cart_mass, pole_mass, pole_half_length,
//                       force_mag, max_steps, angle_limit, position_limit
//   [agent.A] / [agent.B]
//                       gamma, lr, epsilon_start, epsilon_end, epsilon_decay,
//                       batch_size, train_steps_per_epoch, buffer_capacity,
//                       reward_scale
//   [federation]        transport, bb, key
//
// Values are bare tokens; surrounding double quotes are stripped.
using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

// Throws std::invalid_argument with a line number on syntax errors.
ConfigSections parse_config(const std::string& text);
ConfigSections load_config(const std::string& path);

// Applies [experiment] first (which may reset env defaults for the group),
// then the remaining sections. Unknown sections or keys are errors.
void apply_config(const ConfigSections& cfg, ExperimentSpec& spec);

}  // namespace fedsplit
