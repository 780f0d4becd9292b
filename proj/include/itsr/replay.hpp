#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include <Eigen/Core>

#include "itsr/environment.hpp"

namespace itsr {

/// One training example: the state pair, its legal actions, the policy target and the value target.
struct ReplayItem {
  StatePair state;
  ActionMask legal;
  Eigen::VectorXd policy;
  double value = 0.0;
};

class EmptyBuffer : public std::runtime_error {
 public:
  EmptyBuffer() : std::runtime_error("replay buffer is empty") {}
};

/// Fixed-capacity FIFO; the oldest item is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {}

  void push(ReplayItem item) {
    if (capacity_ == 0) return;
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(item));
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  const ReplayItem& operator[](std::size_t i) const { return items_[i]; }
  void clear() { items_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<ReplayItem> items_;
};

/// Uniform draw of `batch_size` items: with replacement when the buffer holds fewer
/// items than requested, without replacement otherwise.
std::vector<const ReplayItem*> sample_batch(const ReplayBuffer& buffer, std::size_t batch_size, Rng& rng);
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t batch_size, Rng& rng);

}  // namespace itsr
