#pragma once

#include <memory>

#include <Eigen/Core>

#include "itsr/environment.hpp"
#include "itsr/nn/network.hpp"

namespace itsr {

struct NetworkOutput {
  Eigen::VectorXd policy;  // masked, sums to 1 over legal actions
  double value = 0.0;      // strictly inside (-1, 1)
};

/// Evaluates states against one fixed target image.
class PairEvaluator {
 public:
  virtual ~PairEvaluator() = default;
  virtual NetworkOutput evaluate(const State& current, const ActionMask& legal) = 0;
};

/// Anything that can guide search. `bind` is thread-safe; evaluators are not shared.
class PolicyModel {
 public:
  virtual ~PolicyModel() = default;
  virtual std::unique_ptr<PairEvaluator> bind(const Image& target) const = 0;
};

/// Wraps a network; the target embedding is computed once per bind.
class NetworkModel final : public PolicyModel {
 public:
  explicit NetworkModel(const nn::PolicyValueNet<float>& net) : net_(net) {}
  std::unique_ptr<PairEvaluator> bind(const Image& target) const override;

 private:
  const nn::PolicyValueNet<float>& net_;
};

/// Uniform priors over legal actions, zero value.
class UniformModel final : public PolicyModel {
 public:
  std::unique_ptr<PairEvaluator> bind(const Image& target) const override;
};

}  // namespace itsr
