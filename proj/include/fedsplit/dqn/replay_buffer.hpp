#pragma once

#include <cstddef>
#include <vector>

#include "fedsplit/envs/env.hpp"
#include "fedsplit/random.hpp"

namespace fedsplit {

struct Transition {
  Observation state{};
  int action = 0;
  double reward = 0.0;  // raw env reward
  Observation next_state{};
  bool done = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

// Fixed-capacity ring. Oldest transitions are overwritten once full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  // Uniform with replacement over current contents. Empty buffer -> empty result.
  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  const Transition& operator[](std::size_t i) const { return items_[i]; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

}  // namespace fedsplit
