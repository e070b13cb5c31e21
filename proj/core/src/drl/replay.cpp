#include "forgeline/drl/replay.hpp"

#include <unordered_set>

#include "forgeline/common/error.hpp"

namespace forgeline::drl {

ReplayMemory::ReplayMemory(std::size_t capacity, std::size_t state_dim)
    : capacity_(capacity), dim_(state_dim) {
  if (capacity == 0 || state_dim == 0) throw ConfigError("replay memory needs positive capacity and state size");
}

void ReplayMemory::push(const Transition& t) {
  if (static_cast<std::size_t>(t.state.size()) != dim_ || static_cast<std::size_t>(t.next_state.size()) != dim_) {
    throw DimensionError("transition state size does not match replay memory");
  }
  ++inserted_;
  if (size_ < capacity_) {
    states_.insert(states_.end(), t.state.data(), t.state.data() + dim_);
    next_states_.insert(next_states_.end(), t.next_state.data(), t.next_state.data() + dim_);
    actions_.push_back(t.action);
    rewards_.push_back(t.reward);
    dones_.push_back(t.done ? 1 : 0);
    insertion_.push_back(inserted_);
    ++size_;
    head_ = size_ % capacity_;
    return;
  }
  std::copy(t.state.data(), t.state.data() + dim_, states_.begin() + static_cast<std::ptrdiff_t>(head_ * dim_));
  std::copy(t.next_state.data(), t.next_state.data() + dim_,
            next_states_.begin() + static_cast<std::ptrdiff_t>(head_ * dim_));
  actions_[head_] = t.action;
  rewards_[head_] = t.reward;
  dones_[head_] = t.done ? 1 : 0;
  insertion_[head_] = inserted_;
  head_ = (head_ + 1) % capacity_;
}

std::size_t ReplayMemory::slot(std::size_t age_index) const {
  if (age_index >= size_) throw DimensionError("replay index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : head_;
  return (oldest + age_index) % capacity_;
}

std::uint64_t ReplayMemory::oldest_insertion() const {
  return size_ == 0 ? 0 : insertion_[slot(0)];
}

std::uint64_t ReplayMemory::insertion_number(std::size_t i) const { return insertion_[slot(i)]; }

Transition ReplayMemory::at(std::size_t i) const {
  const std::size_t s = slot(i);
  Transition t;
  t.state = Eigen::Map<const Eigen::VectorXd>(states_.data() + s * dim_, static_cast<Eigen::Index>(dim_));
  t.next_state =
      Eigen::Map<const Eigen::VectorXd>(next_states_.data() + s * dim_, static_cast<Eigen::Index>(dim_));
  t.action = actions_[s];
  t.reward = rewards_[s];
  t.done = dones_[s] != 0;
  return t;
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t batch, Rng& rng) const {
  if (batch > size_) throw ConfigError("cannot sample a batch larger than the replay memory");
  std::vector<std::size_t> picked;
  picked.reserve(batch);
  // Floyd's algorithm: uniform subset without replacement.
  std::unordered_set<std::size_t> seen;
  seen.reserve(batch * 2);
  for (std::size_t j = size_ - batch; j < size_; ++j) {
    std::uniform_int_distribution<std::size_t> dist(0, j);
    std::size_t candidate = dist(rng);
    if (!seen.insert(candidate).second) {
      candidate = j;
      seen.insert(candidate);
    }
    picked.push_back(candidate);
  }
  return picked;
}

TransitionBatch ReplayMemory::gather(const std::vector<std::size_t>& positions) const {
  const auto n = static_cast<Eigen::Index>(positions.size());
  const auto d = static_cast<Eigen::Index>(dim_);
  TransitionBatch b;
  b.states.resize(d, n);
  b.next_states.resize(d, n);
  b.rewards.resize(n);
  b.dones.resize(n);
  b.actions.resize(positions.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::size_t s = slot(positions[static_cast<std::size_t>(j)]);
    b.states.col(j) = Eigen::Map<const Eigen::VectorXd>(states_.data() + s * dim_, d);
    b.next_states.col(j) = Eigen::Map<const Eigen::VectorXd>(next_states_.data() + s * dim_, d);
    b.actions[static_cast<std::size_t>(j)] = actions_[s];
    b.rewards(j) = rewards_[s];
    b.dones(j) = dones_[s] ? 1.0 : 0.0;
  }
  return b;
}

TransitionBatch ReplayMemory::sample(std::size_t batch, Rng& rng) const {
  return gather(sample_indices(batch, rng));
}

}  // namespace forgeline::drl
