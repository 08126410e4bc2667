#include "fedsplit/envs/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fedsplit/random.hpp"

namespace fedsplit {

void EnvConfig::validate() const {
  if (!(gravity > 0 && cart_mass > 0 && pole_mass > 0 && pole_half_length > 0 &&
        force_mag > 0 && angle_limit > 0 && position_limit > 0)) {
    throw std::invalid_argument("env config: physical quantities must be positive");
  }
  if (max_steps < 1) throw std::invalid_argument("env config: max_steps must be >= 1");
}

EnvState reset(const EnvConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  EnvState s;
  if (config.kind == EnvKind::kCartPole) {
    for (double& v : s.vars) v = rng.uniform(-0.05, 0.05);
  } else {
    s.vars = {rng.uniform(-0.6, -0.4), 0.0, 0.0, 0.0};
  }
  return s;
}

namespace {

StepResult step_cartpole(const EnvConfig& c, const EnvState& s, int action) {
  const double x = s.vars[0];
  const double x_dot = s.vars[1];
  const double theta = s.vars[2];
  const double theta_dot = s.vars[3];

  const double force = action == 1 ? c.force_mag : -c.force_mag;
  const double total_mass = c.cart_mass + c.pole_mass;
  const double polemass_length = c.pole_mass * c.pole_half_length;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);

  const double temp = (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (c.gravity * sin_t - cos_t * temp) /
      (c.pole_half_length * (4.0 / 3.0 - c.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

  StepResult r;
  r.next.vars = {x + cartpole::kTau * x_dot, x_dot + cartpole::kTau * x_acc,
                 theta + cartpole::kTau * theta_dot, theta_dot + cartpole::kTau * theta_acc};
  r.next.step_count = s.step_count + 1;
  r.reward = 1.0;
  r.done = std::abs(r.next.vars[2]) > c.angle_limit || std::abs(r.next.vars[0]) > c.position_limit ||
           r.next.step_count >= c.max_steps;
  r.next.done = r.done;
  return r;
}

StepResult step_mountain_car(const EnvConfig& c, const EnvState& s, int action) {
  using namespace mountain_car;
  double position = s.vars[0];
  double velocity = s.vars[1];
  const double push = action == 1 ? 1.0 : -1.0;

  velocity += push * kForce - std::cos(3.0 * position) * kGravity;
  velocity = std::clamp(velocity, -kMaxSpeed, kMaxSpeed);
  position += velocity;
  position = std::clamp(position, kMinPosition, kMaxPosition);
  if (position == kMinPosition && velocity < 0) velocity = 0.0;

  StepResult r;
  r.next.vars = {position, velocity, 0.0, 0.0};
  r.next.step_count = s.step_count + 1;
  const bool at_goal = position >= kGoalPosition;
  r.reward = at_goal ? 1.0 : 0.0;
  r.done = at_goal || r.next.step_count >= c.max_steps;
  r.next.done = r.done;
  return r;
}

}  // namespace

StepResult step(const EnvConfig& config, const EnvState& state, int action) {
  if (state.done) throw std::logic_error("step() on a finished episode");
  if (action != 0 && action != 1) throw std::invalid_argument("action must be 0 or 1");
  return config.kind == EnvKind::kCartPole ? step_cartpole(config, state, action)
                                           : step_mountain_car(config, state, action);
}

Observation observe(const EnvState& state) { return state.vars; }

std::string to_string(EnvKind kind) {
  return kind == EnvKind::kCartPole ? "cartpole" : "mountaincar-mod";
}

EnvKind env_kind_from_string(const std::string& s) {
  if (s == "cartpole") return EnvKind::kCartPole;
  if (s == "mountaincar-mod" || s == "mountaincar") return EnvKind::kMountainCarMod;
  throw std::invalid_argument("unknown env kind '" + s + "'");
}

}  // namespace fedsplit
