#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "forgeline/drl/mlp.hpp"

namespace forgeline::drl {

struct Transition {
  Eigen::VectorXd state;
  int action = 0;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool done = false;
};

/// Columns are samples.
struct TransitionBatch {
  Eigen::MatrixXd states;
  std::vector<int> actions;
  Eigen::VectorXd rewards;
  Eigen::MatrixXd next_states;
  Eigen::VectorXd dones;  // 1.0 for terminal transitions

  std::size_t size() const { return actions.size(); }
};

/// Fixed-capacity ring of transitions; the oldest is evicted first.
class ReplayMemory {
 public:
  ReplayMemory(std::size_t capacity, std::size_t state_dim);

  void push(const Transition& t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t state_dim() const { return dim_; }
  std::uint64_t total_inserted() const { return inserted_; }

  /// 1-based insertion number of the oldest retained transition (0 when empty).
  std::uint64_t oldest_insertion() const;
  /// Transition `i` in age order, 0 being the oldest retained.
  Transition at(std::size_t i) const;
  std::uint64_t insertion_number(std::size_t i) const;

  /// Distinct positions (age order) drawn uniformly without replacement.
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;
  TransitionBatch sample(std::size_t batch, Rng& rng) const;
  TransitionBatch gather(const std::vector<std::size_t>& positions) const;

 private:
  std::size_t slot(std::size_t age_index) const;

  std::size_t capacity_;
  std::size_t dim_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // next slot to write
  std::uint64_t inserted_ = 0;
  std::vector<double> states_;
  std::vector<double> next_states_;
  std::vector<int> actions_;
  std::vector<double> rewards_;
  std::vector<unsigned char> dones_;
  std::vector<std::uint64_t> insertion_;
};

}  // namespace forgeline::drl
