#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "textpix/tensor.hpp"

namespace textpix {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  bool valid() const { return tape != nullptr; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
};

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  MatVec,
  VecMat,
  Add,
  AddRowBroadcast,
  Mul,
  Scale,
  Divide,
  Sigmoid,
  Tanh,
  Softmax,
  LogSoftmax,
  Slice,
  Concat,
  Stack,
  EmbedLookup,
  Pick,
  Sum,
  SumScalars,
  MeanScalars,
};

// Records operations in execution order and replays them backwards.
//
// Leaves either reference an external tensor (parameters; it must outlive the tape) or own
// a copy (constants, imported state). Non-copyable because Vars hold a pointer to it.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // References `source` without copying; gradients are tracked when `requires_grad`.
  Var leaf(const Tensor& source, bool requires_grad = true);
  // Owns `value`; never receives a gradient.
  Var constant(Tensor value);
  Var variable(Tensor value);  // owned leaf that does receive a gradient

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;

  // Fills gradients of `loss` with respect to every recorded node. `loss` must be a
  // single-element tensor recorded on this tape. Previous gradients are discarded.
  void backward(Var loss);

  // Gradient of the last backward() target with respect to `v`. Empty when `v` does not
  // depend on a tracked leaf or when backward() has not run.
  std::span<const double> grad(Var v) const;
  Tensor grad_tensor(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  std::size_t backward_visits() const { return backward_visits_; }

  // Used by the primitive implementations to append a node.
  Var record(Op op, Tensor value, std::span<const Var> inputs, std::int64_t aux = 0,
             double scalar = 0.0);

 private:
  struct Node {
    Op op = Op::Leaf;
    Tensor value;
    const Tensor* external = nullptr;
    std::vector<std::uint32_t> inputs;
    std::vector<double> grad;
    std::int64_t aux = 0;
    double scalar = 0.0;
    bool requires_grad = false;
  };

  const Node& node(Var v) const;
  void check_owned(Var v) const;
  void propagate(const Node& n);
  std::vector<double>& grad_buffer(std::uint32_t id);

  std::vector<Node> nodes_;
  bool have_grads_ = false;
  std::size_t backward_visits_ = 0;
};

// ---- primitives -------------------------------------------------------------------------
// All inputs must live on the same tape. Vectors are rank-1, matrices rank-2.

Var matmul(Var a, Var b);     // [m x k] * [k x n] -> [m x n]
Var matvec(Var w, Var x);     // [m x k] * [k]     -> [m]
Var vecmat(Var x, Var w);     // [k] * [k x n]     -> [n]
Var add(Var a, Var b);        // same shape
Var add_row_broadcast(Var m, Var row);  // [n x d] + [d] on every row
Var mul(Var a, Var b);        // elementwise, same shape
Var scale(Var a, double factor);
Var divide(Var a, double divisor);
Var sigmoid(Var t);
Var tanh_op(Var t);
Var softmax(Var logits);      // rank-1, non-empty
Var log_softmax(Var logits);  // rank-1, non-empty
Var slice(Var v, std::size_t offset, std::size_t length);  // of a rank-1 tensor
Var concat(Var a, Var b);     // rank-1 + rank-1
Var stack_rows(std::span<const Var> rows);  // k rank-1 tensors of width d -> [k x d]
Var embed_lookup(Var table, std::size_t id);  // row `id` of a [V x d] table
Var pick(Var v, std::size_t index);           // scalar element of a rank-1 tensor
Var sum(Var t);                                // scalar sum of all entries
Var sum_scalars(std::span<const Var> terms);   // left-to-right sum of single-element nodes
// Mean of single-element nodes, accumulated in extended precision and rounded once.
Var mean_scalars(std::span<const Var> terms);

}  // namespace textpix
