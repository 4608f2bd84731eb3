#pragma once

#include <Eigen/Core>

#include "socsim/contracts.hpp"
#include "socsim/genmodel/genmodel.hpp"
#include "socsim/numerics/rng.hpp"

namespace socsim {

// Fixed-capacity FIFO artifact store. Appending at capacity evicts the
// oldest entry; replace() swaps an entry in place and preserves occupancy.
class MemoryBuffer {
 public:
  explicit MemoryBuffer(int capacity)
      : data_(kObsDim, capacity), capacity_(capacity) {
    require(capacity >= 1, "buffer: capacity must be positive");
  }

  int capacity() const { return capacity_; }
  int size() const { return size_; }
  bool empty() const { return size_ == 0; }

  void push(const Artifact& o) {
    require(o.allFinite(), "buffer: non-finite artifact");
    if (size_ < capacity_) {
      data_.col(storage_index(size_)) = o;
      ++size_;
    } else {
      data_.col(head_) = o;  // overwrite the oldest
      head_ = (head_ + 1) % capacity_;
    }
  }

  // i = 0 is the oldest entry.
  Artifact at(int i) const {
    require(i >= 0 && i < size_, "buffer: index out of range");
    return data_.col(storage_index(i));
  }

  void replace(int i, const Artifact& o) {
    require(i >= 0 && i < size_, "buffer: index out of range");
    require(o.allFinite(), "buffer: non-finite artifact");
    data_.col(storage_index(i)) = o;
  }

  int sample_index(RngStream& rng) const {
    require(size_ > 0, "buffer: cannot sample from an empty buffer");
    return rng.uniform_int(size_);
  }

  // n uniform draws with replacement.
  Eigen::MatrixXd sample(int n, RngStream& rng) const {
    require(n > 0, "buffer: sample count must be positive");
    require(size_ > 0, "buffer: cannot sample from an empty buffer");
    Eigen::MatrixXd out(kObsDim, n);
    for (int i = 0; i < n; ++i) out.col(i) = at(rng.uniform_int(size_));
    return out;
  }

  // All entries, oldest first.
  Eigen::MatrixXd contents() const {
    Eigen::MatrixXd out(kObsDim, size_);
    for (int i = 0; i < size_; ++i) out.col(i) = at(i);
    return out;
  }

 private:
  int storage_index(int i) const { return (head_ + i) % capacity_; }

  Eigen::MatrixXd data_;
  int capacity_ = 0;
  int size_ = 0;
  int head_ = 0;
};

}  // namespace socsim
