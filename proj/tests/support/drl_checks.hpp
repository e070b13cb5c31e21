#pragma once

#include <cstdint>

namespace forgeline::testing {

/// Largest relative error between analytic and central-difference gradients
/// over `points` random networks and inputs kept away from ReLU kinks.
double mlp_gradient_error(int points, std::uint64_t seed);
double dqn_loss_gradient_error(int points, std::uint64_t seed);
double ppo_actor_gradient_error(int points, std::uint64_t seed);
double ppo_critic_gradient_error(int points, std::uint64_t seed);

}  // namespace forgeline::testing
