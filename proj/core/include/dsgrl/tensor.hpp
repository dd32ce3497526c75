#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "dsgrl/matrix.hpp"

namespace dsgrl {

class Tape;

namespace detail {
struct TensorRec {
  Matrix value;
  Matrix grad;                 // allocated lazily, same shape as value
  bool requires_grad = false;  // leaf parameter
  bool interior = false;       // produced by a recorded op
  std::uint64_t tape_id = 0;   // tape that produced it (interior only)
};
}  // namespace detail

// Shared handle to a value and its gradient. Copies alias the same storage,
// so an op capturing inputs by value keeps them alive for the backward pass.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Matrix value, bool requires_grad = false);

  static Tensor zeros(index_t rows, index_t cols, bool requires_grad = false);

  bool defined() const noexcept { return rec_ != nullptr; }

  // Handle semantics: const methods may still mutate the shared record.
  const Matrix& value() const;
  Matrix& value_mut() const;

  // Gradient accumulator; allocated on demand, zero-filled.
  Matrix& grad() const;
  bool has_grad() const noexcept;
  void zero_grad() const;

  index_t rows() const { return value().rows(); }
  index_t cols() const { return value().cols(); }

  bool requires_grad() const;
  bool interior() const;
  std::uint64_t tape_id() const;

  void mark_interior(std::uint64_t tape_id) const;

  // Identity of the underlying record, for debugging and containers.
  const void* id() const noexcept { return rec_.get(); }

 private:
  std::shared_ptr<detail::TensorRec> rec_;
};

// Records backward closures for one forward pass. Construction makes the
// tape active for the current thread; destruction restores the previous one.
// A tape is single-use: backward() replays the steps once and consumes it.
class Tape {
 public:
  Tape();
  ~Tape();

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::uint64_t id() const noexcept { return id_; }
  std::size_t size() const noexcept { return steps_.size(); }
  bool consumed() const noexcept { return consumed_; }

  void record(std::function<void()> step);

  // Seeds d(loss)/d(loss) = 1 and replays the recorded steps in reverse.
  // `loss` must be a 1x1 tensor produced on this tape.
  void backward(Tensor& loss);

  static Tape* active() noexcept;

 private:
  std::uint64_t id_;
  std::vector<std::function<void()>> steps_;
  bool consumed_ = false;
  Tape* previous_ = nullptr;
};

// True when gradients must flow into `t` on `tape`: either a parameter leaf
// or an interior value produced by this same tape.
bool connected(const Tensor& t, const Tape& tape);

}  // namespace dsgrl
