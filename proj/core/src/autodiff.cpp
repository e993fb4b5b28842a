#include "textpix/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "textpix/error.hpp"

namespace textpix {

const Tensor& Var::value() const {
  if (!tape) throw ValueError("use of an unbound Var");
  return tape->value(*this);
}

// ---- Tape -------------------------------------------------------------------------------

Var Tape::leaf(const Tensor& source, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.value = Tensor();
  n.external = &source;
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::variable(Tensor value) {
  Var v = constant(std::move(value));
  nodes_[v.id].requires_grad = true;
  return v;
}

void Tape::check_owned(Var v) const {
  if (v.tape != this) throw ValueError("Var was recorded on a different tape");
  if (v.id >= nodes_.size()) throw ValueError("Var id out of range for this tape");
}

const Tape::Node& Tape::node(Var v) const {
  check_owned(v);
  return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.value;
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

Var Tape::record(Op op, Tensor value, std::span<const Var> inputs, std::int64_t aux,
                 double scalar) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  n.aux = aux;
  n.scalar = scalar;
  n.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    check_owned(in);
    n.inputs.push_back(in.id);
    n.requires_grad = n.requires_grad || nodes_[in.id].requires_grad;
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

std::vector<double>& Tape::grad_buffer(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) {
    const std::size_t len = n.external ? n.external->size() : n.value.size();
    n.grad.assign(len, 0.0);
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ValueError("backward: loss was not recorded on this tape");
  check_owned(loss);
  if (value(loss).size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " +
                     shape_to_string(value(loss).shape()));
  }
  for (Node& n : nodes_) n.grad.clear();
  backward_visits_ = 0;
  have_grads_ = true;
  if (!nodes_[loss.id].requires_grad) return;
  grad_buffer(loss.id)[0] = 1.0;
  for (std::int64_t id = loss.id; id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || n.grad.empty()) continue;
    ++backward_visits_;
    if (n.op != Op::Leaf) propagate(n);
  }
}

std::span<const double> Tape::grad(Var v) const {
  const Node& n = node(v);
  return n.grad;
}

Tensor Tape::grad_tensor(Var v) const {
  const Tensor& val = value(v);
  const Node& n = node(v);
  if (n.grad.empty()) return Tensor(val.shape());
  return Tensor(val.shape(), n.grad);
}

void Tape::propagate(const Node& n) {
  const double* g = n.grad.data();
  const Tensor& out = n.value;
  auto in_value = [&](std::size_t k) -> const Tensor& {
    const Node& in = nodes_[n.inputs[k]];
    return in.external ? *in.external : in.value;
  };
  auto in_grad = [&](std::size_t k) -> double* {
    if (!nodes_[n.inputs[k]].requires_grad) return nullptr;
    return grad_buffer(n.inputs[k]).data();
  };

  switch (n.op) {
    case Op::Leaf:
      break;
    case Op::MatMul: {
      const Tensor& a = in_value(0);
      const Tensor& b = in_value(1);
      const std::size_t m = a.shape()[0], k = a.shape()[1], cols = b.shape()[1];
      const double* pa = a.data().data();
      const double* pb = b.data().data();
      if (double* ga = in_grad(0)) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < cols; ++j) acc += g[i * cols + j] * pb[p * cols + j];
            ga[i * k + p] += acc;
          }
      }
      if (double* gb = in_grad(1)) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double ap = pa[i * k + p];
            for (std::size_t j = 0; j < cols; ++j) gb[p * cols + j] += ap * g[i * cols + j];
          }
      }
      break;
    }
    case Op::MatVec: {
      const Tensor& w = in_value(0);
      const Tensor& x = in_value(1);
      const std::size_t m = w.shape()[0], k = w.shape()[1];
      const double* pw = w.data().data();
      const double* px = x.data().data();
      if (double* gw = in_grad(0)) {
        for (std::size_t i = 0; i < m; ++i) {
          const double gi = g[i];
          double* row = gw + i * k;
          for (std::size_t p = 0; p < k; ++p) row[p] += gi * px[p];
        }
      }
      if (double* gx = in_grad(1)) {
        for (std::size_t i = 0; i < m; ++i) {
          const double gi = g[i];
          const double* row = pw + i * k;
          for (std::size_t p = 0; p < k; ++p) gx[p] += row[p] * gi;
        }
      }
      break;
    }
    case Op::VecMat: {
      const Tensor& x = in_value(0);
      const Tensor& w = in_value(1);
      const std::size_t k = w.shape()[0], cols = w.shape()[1];
      const double* pw = w.data().data();
      const double* px = x.data().data();
      if (double* gx = in_grad(0)) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < cols; ++j) acc += pw[p * cols + j] * g[j];
          gx[p] += acc;
        }
      }
      if (double* gw = in_grad(1)) {
        for (std::size_t p = 0; p < k; ++p)
          for (std::size_t j = 0; j < cols; ++j) gw[p * cols + j] += px[p] * g[j];
      }
      break;
    }
    case Op::Add: {
      for (std::size_t k = 0; k < 2; ++k)
        if (double* gi = in_grad(k))
          for (std::size_t i = 0; i < out.size(); ++i) gi[i] += g[i];
      break;
    }
    case Op::AddRowBroadcast: {
      const std::size_t cols = in_value(1).size();
      const std::size_t rows = out.size() / cols;
      if (double* gm = in_grad(0))
        for (std::size_t i = 0; i < out.size(); ++i) gm[i] += g[i];
      if (double* gr = in_grad(1))
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) gr[c] += g[r * cols + c];
      break;
    }
    case Op::Mul: {
      const double* pa = in_value(0).data().data();
      const double* pb = in_value(1).data().data();
      if (double* ga = in_grad(0))
        for (std::size_t i = 0; i < out.size(); ++i) ga[i] += g[i] * pb[i];
      if (double* gb = in_grad(1))
        for (std::size_t i = 0; i < out.size(); ++i) gb[i] += g[i] * pa[i];
      break;
    }
    case Op::Scale: {
      if (double* ga = in_grad(0))
        for (std::size_t i = 0; i < out.size(); ++i) ga[i] += g[i] * n.scalar;
      break;
    }
    case Op::Divide: {
      if (double* ga = in_grad(0))
        for (std::size_t i = 0; i < out.size(); ++i) ga[i] += g[i] / n.scalar;
      break;
    }
    case Op::Sigmoid: {
      const double* y = out.data().data();
      if (double* ga = in_grad(0))
        for (std::size_t i = 0; i < out.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
      break;
    }
    case Op::Tanh: {
      const double* y = out.data().data();
      if (double* ga = in_grad(0))
        for (std::size_t i = 0; i < out.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
      break;
    }
    case Op::Softmax: {
      const double* y = out.data().data();
      if (double* ga = in_grad(0)) {
        double dot = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) dot += g[i] * y[i];
        for (std::size_t i = 0; i < out.size(); ++i) ga[i] += y[i] * (g[i] - dot);
      }
      break;
    }
    case Op::LogSoftmax: {
      const double* y = out.data().data();
      if (double* ga = in_grad(0)) {
        double total = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) total += g[i];
        for (std::size_t i = 0; i < out.size(); ++i) ga[i] += g[i] - std::exp(y[i]) * total;
      }
      break;
    }
    case Op::Slice: {
      if (double* ga = in_grad(0)) {
        const auto offset = static_cast<std::size_t>(n.aux);
        for (std::size_t i = 0; i < out.size(); ++i) ga[offset + i] += g[i];
      }
      break;
    }
    case Op::Concat: {
      const std::size_t left = in_value(0).size();
      if (double* ga = in_grad(0))
        for (std::size_t i = 0; i < left; ++i) ga[i] += g[i];
      if (double* gb = in_grad(1))
        for (std::size_t i = left; i < out.size(); ++i) gb[i - left] += g[i];
      break;
    }
    case Op::Stack: {
      const std::size_t width = out.shape()[1];
      for (std::size_t r = 0; r < n.inputs.size(); ++r)
        if (double* gr = in_grad(r))
          for (std::size_t c = 0; c < width; ++c) gr[c] += g[r * width + c];
      break;
    }
    case Op::EmbedLookup: {
      if (double* gt = in_grad(0)) {
        const std::size_t width = out.size();
        double* row = gt + static_cast<std::size_t>(n.aux) * width;
        for (std::size_t c = 0; c < width; ++c) row[c] += g[c];
      }
      break;
    }
    case Op::Pick: {
      if (double* ga = in_grad(0)) ga[static_cast<std::size_t>(n.aux)] += g[0];
      break;
    }
    case Op::Sum: {
      if (double* ga = in_grad(0)) {
        const std::size_t len = in_value(0).size();
        for (std::size_t i = 0; i < len; ++i) ga[i] += g[0];
      }
      break;
    }
    case Op::SumScalars: {
      for (std::size_t k = 0; k < n.inputs.size(); ++k)
        if (double* gk = in_grad(k)) gk[0] += g[0];
      break;
    }
    case Op::MeanScalars: {
      const double share = g[0] / static_cast<double>(n.inputs.size());
      for (std::size_t k = 0; k < n.inputs.size(); ++k)
        if (double* gk = in_grad(k)) gk[0] += share;
      break;
    }
  }
}

// ---- primitives -------------------------------------------------------------------------

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  if (!a.tape || !b.tape) throw ValueError(std::string(op) + ": unbound input");
  if (a.tape != b.tape) throw ValueError(std::string(op) + ": inputs live on different tapes");
  return *a.tape;
}

Tape& tape_of(Var a, const char* op) {
  if (!a.tape) throw ValueError(std::string(op) + ": unbound input");
  return *a.tape;
}

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) +
                     ", got " + shape_to_string(t.shape()));
  }
}

[[noreturn]] void dim_error(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_to_string(a.shape()) +
                   " and " + shape_to_string(b.shape()));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_vector(const Tensor& t, const char* op) {
  require_rank(t, 1, op, "input");
  if (t.size() == 0) throw ValueError(std::string(op) + ": empty vector");
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = same_tape(a, b, "matmul");
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  require_rank(ta, 2, "matmul", "left factor");
  require_rank(tb, 2, "matmul", "right factor");
  const std::size_t m = ta.shape()[0], k = ta.shape()[1], cols = tb.shape()[1];
  if (tb.shape()[0] != k) dim_error("matmul", ta, tb);
  Tensor out({m, cols});
  const double* pa = ta.data().data();
  const double* pb = tb.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double ap = pa[i * k + p];
      for (std::size_t j = 0; j < cols; ++j) po[i * cols + j] += ap * pb[p * cols + j];
    }
  const Var in[] = {a, b};
  return tape.record(Op::MatMul, std::move(out), in);
}

Var matvec(Var w, Var x) {
  Tape& tape = same_tape(w, x, "matvec");
  const Tensor& tw = w.value();
  const Tensor& tx = x.value();
  require_rank(tw, 2, "matvec", "matrix");
  require_rank(tx, 1, "matvec", "vector");
  const std::size_t m = tw.shape()[0], k = tw.shape()[1];
  if (tx.size() != k) dim_error("matvec", tw, tx);
  Tensor out({m});
  const double* pw = tw.data().data();
  const double* px = tx.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = pw + i * k;
    double acc = 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += row[p] * px[p];
    po[i] = acc;
  }
  const Var in[] = {w, x};
  return tape.record(Op::MatVec, std::move(out), in);
}

Var vecmat(Var x, Var w) {
  Tape& tape = same_tape(x, w, "vecmat");
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  require_rank(tx, 1, "vecmat", "vector");
  require_rank(tw, 2, "vecmat", "matrix");
  const std::size_t k = tw.shape()[0], cols = tw.shape()[1];
  if (tx.size() != k) dim_error("vecmat", tx, tw);
  Tensor out({cols});
  const double* pw = tw.data().data();
  const double* px = tx.data().data();
  double* po = out.data().data();
  for (std::size_t p = 0; p < k; ++p) {
    const double xp = px[p];
    for (std::size_t j = 0; j < cols; ++j) po[j] += xp * pw[p * cols + j];
  }
  const Var in[] = {x, w};
  return tape.record(Op::VecMat, std::move(out), in);
}

Var add(Var a, Var b) {
  Tape& tape = same_tape(a, b, "add");
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  if (ta.shape() != tb.shape()) dim_error("add", ta, tb);
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] + tb[i];
  const Var in[] = {a, b};
  return tape.record(Op::Add, std::move(out), in);
}

Var add_row_broadcast(Var m, Var row) {
  Tape& tape = same_tape(m, row, "add_row_broadcast");
  const Tensor& tm = m.value();
  const Tensor& tr = row.value();
  require_rank(tm, 2, "add_row_broadcast", "matrix");
  require_rank(tr, 1, "add_row_broadcast", "row");
  const std::size_t rows = tm.shape()[0], cols = tm.shape()[1];
  if (tr.size() != cols) dim_error("add_row_broadcast", tm, tr);
  Tensor out(tm.shape());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = tm[r * cols + c] + tr[c];
  const Var in[] = {m, row};
  return tape.record(Op::AddRowBroadcast, std::move(out), in);
}

Var mul(Var a, Var b) {
  Tape& tape = same_tape(a, b, "mul");
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  if (ta.shape() != tb.shape()) dim_error("mul", ta, tb);
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] * tb[i];
  const Var in[] = {a, b};
  return tape.record(Op::Mul, std::move(out), in);
}

Var scale(Var a, double factor) {
  Tape& tape = tape_of(a, "scale");
  const Tensor& ta = a.value();
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] * factor;
  const Var in[] = {a};
  return tape.record(Op::Scale, std::move(out), in, 0, factor);
}

Var divide(Var a, double divisor) {
  Tape& tape = tape_of(a, "divide");
  if (divisor == 0.0) throw ValueError("divide: zero divisor");
  const Tensor& ta = a.value();
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] / divisor;
  const Var in[] = {a};
  return tape.record(Op::Divide, std::move(out), in, 0, divisor);
}

Var sigmoid(Var t) {
  Tape& tape = tape_of(t, "sigmoid");
  const Tensor& x = t.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = stable_sigmoid(x[i]);
  const Var in[] = {t};
  return tape.record(Op::Sigmoid, std::move(out), in);
}

Var tanh_op(Var t) {
  Tape& tape = tape_of(t, "tanh");
  const Tensor& x = t.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
  const Var in[] = {t};
  return tape.record(Op::Tanh, std::move(out), in);
}

Var softmax(Var logits) {
  Tape& tape = tape_of(logits, "softmax");
  const Tensor& x = logits.value();
  require_vector(x, "softmax");
  const double peak = *std::max_element(x.data().begin(), x.data().end());
  Tensor out(x.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - peak);
    total += out[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i) out[i] /= total;
  const Var in[] = {logits};
  return tape.record(Op::Softmax, std::move(out), in);
}

Var log_softmax(Var logits) {
  Tape& tape = tape_of(logits, "log_softmax");
  const Tensor& x = logits.value();
  require_vector(x, "log_softmax");
  const auto top = std::max_element(x.data().begin(), x.data().end());
  const double peak = *top;
  const auto top_index = static_cast<std::size_t>(top - x.data().begin());
  // tail = sum of exp(x - peak) without the peak's own 1; log1p keeps its low bits
  double tail = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (i != top_index) tail += std::exp(x[i] - peak);
  const double log_rest = tail < 1.0 ? std::log1p(tail) : std::log(1.0 + tail);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - peak) - log_rest;
  const Var in[] = {logits};
  return tape.record(Op::LogSoftmax, std::move(out), in);
}

Var slice(Var v, std::size_t offset, std::size_t length) {
  Tape& tape = tape_of(v, "slice");
  const Tensor& x = v.value();
  require_rank(x, 1, "slice", "input");
  if (length == 0 || offset + length > x.size()) {
    throw ShapeError("slice: range [" + std::to_string(offset) + ", " +
                     std::to_string(offset + length) + ") outside " + shape_to_string(x.shape()));
  }
  std::vector<double> part(x.data().begin() + static_cast<std::ptrdiff_t>(offset),
                           x.data().begin() + static_cast<std::ptrdiff_t>(offset + length));
  const Var in[] = {v};
  return tape.record(Op::Slice, Tensor::vector(std::move(part)), in,
                     static_cast<std::int64_t>(offset));
}

Var concat(Var a, Var b) {
  Tape& tape = same_tape(a, b, "concat");
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  require_rank(ta, 1, "concat", "left input");
  require_rank(tb, 1, "concat", "right input");
  std::vector<double> joined;
  joined.reserve(ta.size() + tb.size());
  joined.insert(joined.end(), ta.data().begin(), ta.data().end());
  joined.insert(joined.end(), tb.data().begin(), tb.data().end());
  const Var in[] = {a, b};
  return tape.record(Op::Concat, Tensor::vector(std::move(joined)), in);
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw ValueError("stack_rows: no rows");
  Tape& tape = tape_of(rows[0], "stack_rows");
  const std::size_t width = rows[0].value().size();
  Tensor out({rows.size(), width});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].tape != &tape) throw ValueError("stack_rows: rows live on different tapes");
    const Tensor& row = rows[r].value();
    require_rank(row, 1, "stack_rows", "row");
    if (row.size() != width) dim_error("stack_rows", rows[0].value(), row);
    std::copy(row.data().begin(), row.data().end(), out.data().begin() + r * width);
  }
  return tape.record(Op::Stack, std::move(out), rows);
}

Var embed_lookup(Var table, std::size_t id) {
  Tape& tape = tape_of(table, "embed_lookup");
  const Tensor& t = table.value();
  require_rank(t, 2, "embed_lookup", "table");
  const std::size_t rows = t.shape()[0], width = t.shape()[1];
  if (id >= rows) {
    throw ValueError("embed_lookup: id " + std::to_string(id) + " outside table of " +
                     std::to_string(rows) + " rows");
  }
  std::vector<double> row(t.data().begin() + static_cast<std::ptrdiff_t>(id * width),
                          t.data().begin() + static_cast<std::ptrdiff_t>((id + 1) * width));
  const Var in[] = {table};
  return tape.record(Op::EmbedLookup, Tensor::vector(std::move(row)), in,
                     static_cast<std::int64_t>(id));
}

Var pick(Var v, std::size_t index) {
  Tape& tape = tape_of(v, "pick");
  const Tensor& x = v.value();
  require_rank(x, 1, "pick", "input");
  if (index >= x.size()) {
    throw ValueError("pick: index " + std::to_string(index) + " outside " +
                     shape_to_string(x.shape()));
  }
  const Var in[] = {v};
  return tape.record(Op::Pick, Tensor::scalar(x[index]), in, static_cast<std::int64_t>(index));
}

Var sum(Var t) {
  Tape& tape = tape_of(t, "sum");
  double total = 0.0;
  for (double x : t.value().data()) total += x;
  const Var in[] = {t};
  return tape.record(Op::Sum, Tensor::scalar(total), in);
}

Var sum_scalars(std::span<const Var> terms) {
  if (terms.empty()) throw ValueError("sum_scalars: no terms");
  Tape& tape = tape_of(terms[0], "sum_scalars");
  double total = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].tape != &tape) throw ValueError("sum_scalars: terms live on different tapes");
    const Tensor& t = terms[i].value();
    if (t.size() != 1) throw ShapeError("sum_scalars: term is not a scalar");
    total = (i == 0) ? t[0] : total + t[0];
  }
  return tape.record(Op::SumScalars, Tensor::scalar(total), terms);
}

Var mean_scalars(std::span<const Var> terms) {
  if (terms.empty()) throw ValueError("mean_scalars: no terms");
  Tape& tape = tape_of(terms[0], "mean_scalars");
  long double total = 0.0L;
  for (const Var& term : terms) {
    if (term.tape != &tape) throw ValueError("mean_scalars: terms live on different tapes");
    const Tensor& t = term.value();
    if (t.size() != 1) throw ShapeError("mean_scalars: term is not a scalar");
    total += t[0];
  }
  const double mean = static_cast<double>(total / static_cast<long double>(terms.size()));
  return tape.record(Op::MeanScalars, Tensor::scalar(mean), terms);
}

}  // namespace textpix
