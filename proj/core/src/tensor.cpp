#include "dsgrl/tensor.hpp"

#include <atomic>
#include <utility>

#include "dsgrl/error.hpp"

namespace dsgrl {

namespace {
thread_local Tape* g_active_tape = nullptr;
std::atomic<std::uint64_t> g_next_tape_id{1};
}  // namespace

Tensor::Tensor(Matrix value, bool requires_grad)
    : rec_(std::make_shared<detail::TensorRec>()) {
  rec_->value = std::move(value);
  rec_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(index_t rows, index_t cols, bool requires_grad) {
  return Tensor(Matrix(rows, cols), requires_grad);
}

const Matrix& Tensor::value() const {
  if (!rec_) throw LifecycleError("use of empty tensor");
  return rec_->value;
}

Matrix& Tensor::value_mut() const {
  if (!rec_) throw LifecycleError("use of empty tensor");
  return rec_->value;
}

Matrix& Tensor::grad() const {
  if (!rec_) throw LifecycleError("use of empty tensor");
  if (rec_->grad.size() == 0 && rec_->value.size() != 0)
    rec_->grad = Matrix(rec_->value.rows(), rec_->value.cols());
  return rec_->grad;
}

bool Tensor::has_grad() const noexcept {
  return rec_ && rec_->grad.size() == rec_->value.size() && rec_->value.size() != 0;
}

void Tensor::zero_grad() const {
  if (rec_ && rec_->grad.size() != 0) rec_->grad.fill(0.0);
}

bool Tensor::requires_grad() const { return rec_ && rec_->requires_grad; }

bool Tensor::interior() const { return rec_ && rec_->interior; }

std::uint64_t Tensor::tape_id() const { return rec_ ? rec_->tape_id : 0; }

void Tensor::mark_interior(std::uint64_t tape_id) const {
  if (!rec_) throw LifecycleError("use of empty tensor");
  rec_->interior = true;
  rec_->tape_id = tape_id;
  // Pre-allocate the accumulator so backward closures can add uncondit.
  grad();
}

Tape::Tape() : id_(g_next_tape_id.fetch_add(1)) {
  previous_ = g_active_tape;
  g_active_tape = this;
}

Tape::~Tape() { g_active_tape = previous_; }

Tape* Tape::active() noexcept { return g_active_tape; }

void Tape::record(std::function<void()> step) {
  if (consumed_) throw LifecycleError("recording on a consumed tape");
  steps_.push_back(std::move(step));
}

void Tape::backward(Tensor& loss) {
  if (consumed_) throw LifecycleError("backward on a consumed tape");
  if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1)
    throw ShapeError("backward expects a 1x1 loss tensor");
  if (!loss.interior() || loss.tape_id() != id_)
    throw LifecycleError("loss was not recorded on this tape");
  loss.grad()(0, 0) = 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
  steps_.clear();
  consumed_ = true;
}

bool connected(const Tensor& t, const Tape& tape) {
  if (!t.defined()) return false;
  if (t.requires_grad()) return true;
  return t.interior() && t.tape_id() == tape.id();
}

}  // namespace dsgrl
