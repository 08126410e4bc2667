#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <string>

namespace fedsplit {

enum class EnvKind : std::uint8_t { kCartPole, kMountainCarMod };

// Physical parameters of a CartPole variant. MountainCarMod only uses
// max_steps; its dynamics constants are fixed.
struct EnvConfig {
  EnvKind kind = EnvKind::kCartPole;
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_length = 0.5;
  double force_mag = 10.0;
  int max_steps = 200;
  double angle_limit = 12.0 * std::numbers::pi / 180.0;
  double position_limit = 2.4;

  // Throws std::invalid_argument unless every physical quantity is > 0 and
  // max_steps >= 1.
  void validate() const;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

inline constexpr std::size_t kObservationDim = 4;
inline constexpr std::size_t kActionCount = 2;

using Observation = std::array<double, kObservationDim>;

// CartPole: (x, x_dot, theta, theta_dot).
// MountainCarMod: (position, velocity, 0, 0).
struct EnvState {
  std::array<double, 4> vars{};
  int step_count = 0;
  bool done = false;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool done = false;
};

// Classic-control constants.
namespace cartpole {
inline constexpr double kTau = 0.02;
}
namespace mountain_car {
inline constexpr double kMinPosition = -1.2;
inline constexpr double kMaxPosition = 0.6;
inline constexpr double kMaxSpeed = 0.07;
inline constexpr double kGoalPosition = 0.5;
inline constexpr double kForce = 0.001;
inline constexpr double kGravity = 0.0025;
}  // namespace mountain_car

EnvState reset(const EnvConfig& config, std::uint64_t seed);

// One transition. Rejects (std::logic_error) a state that is already done and
// (std::invalid_argument) actions outside {0, 1}.
StepResult step(const EnvConfig& config, const EnvState& state, int action);

Observation observe(const EnvState& state);

std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& s);

}  // namespace fedsplit
