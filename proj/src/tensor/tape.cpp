#include "linkpoison/tensor/tape.hpp"

#include <algorithm>
#include <utility>

#include "linkpoison/errors.hpp"

namespace linkpoison::tensor {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kMulConst: return "mul_const";
    case OpKind::kScale: return "scale";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kRelu: return "relu";
    case OpKind::kLeakyRelu: return "leaky_relu";
    case OpKind::kElu: return "elu";
    case OpKind::kPow: return "pow";
    case OpKind::kClamp: return "clamp";
    case OpKind::kSum: return "sum";
    case OpKind::kRowSum: return "row_sum";
    case OpKind::kColSum: return "col_sum";
    case OpKind::kBroadcastScalar: return "broadcast_scalar";
    case OpKind::kBroadcastCol: return "broadcast_col";
    case OpKind::kBroadcastRow: return "broadcast_row";
    case OpKind::kGather: return "gather";
    case OpKind::kScatter: return "scatter";
    case OpKind::kGatherRows: return "gather_rows";
    case OpKind::kScatterRows: return "scatter_rows";
    case OpKind::kMaskedSoftmax: return "masked_row_softmax";
  }
  return "unknown";
}

const Matrix& Var::value() const { return tape_->node(id_).value; }

bool Var::requires_grad() const { return tape_->node(id_).requires_grad; }

const Matrix& GradientTable::at(NodeId id) const {
  auto it = grads_.find(id);
  if (it == grads_.end()) throw Error("no gradient recorded for node " + std::to_string(id));
  return it->second;
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  Node n;
  n.kind = OpKind::kLeaf;
  n.requires_grad = requires_grad;
  n.value = std::move(value);
  Var v = record(std::move(n));
  leaves_.push_back(v.id());
  return v;
}

Var Tape::constant(Matrix value) {
  Node n;
  n.kind = OpKind::kConstant;
  n.value = std::move(value);
  return record(std::move(n));
}

Var Tape::record(Node node) {
  if (!node.value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op_name(node.kind) +
                       " (" + node.value.shape_string() + ")");
  }
  for (std::uint8_t k = 0; k < node.arity; ++k) {
    if (node.parents[k] >= nodes_.size()) throw Error("tape: parent does not precede node");
  }
  nodes_.push_back(std::move(node));
  return {this, static_cast<NodeId>(nodes_.size() - 1)};
}

namespace {

Matrix positive_mask(const Matrix& x, double below) {
  Matrix m(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) m[i] = x[i] > 0.0 ? 1.0 : below;
  return m;
}

struct NumericBackend {
  const Tape& tape;
  std::vector<Matrix>& grads;
  std::vector<char>& seen;

  const Matrix& in(const Node& n, int k) const { return tape.node(n.parents[k]).value; }
  const Matrix& out(NodeId id) const { return tape.node(id).value; }
  const Matrix& value(NodeId id) const { return tape.node(id).value; }

  void accumulate(NodeId target, Matrix g) {
    if (!seen[target]) {
      grads[target] = std::move(g);
      seen[target] = 1;
      return;
    }
    auto dst = grads[target].data();
    auto src = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
};

struct SymbolicBackend {
  Tape& tape;
  std::vector<Var>& grads;

  Var in(const Node& n, int k) const { return {&tape, n.parents[k]}; }
  Var out(NodeId id) const { return {&tape, id}; }
  const Matrix& value(NodeId id) const { return tape.node(id).value; }

  void accumulate(NodeId target, Var g) {
    grads[target] = grads[target].valid() ? add(grads[target], g) : g;
  }
};

// Gradient rules, written once against the shared kernel names so they run on
// plain matrices (numeric pass) or on traced values (recorded pass).
template <class Backend, class G>
void apply_rule(Backend& be, NodeId id, const Node& n, const G& g,
                const std::vector<char>& relevant) {
  auto need = [&](int k) { return relevant[n.parents[k]] != 0; };
  auto parent = [&](int k) { return n.parents[k]; };

  switch (n.kind) {
    case OpKind::kLeaf:
    case OpKind::kConstant:
      return;
    case OpKind::kMatMul: {
      const bool ta = n.flag_a;
      const bool tb = n.flag_b;
      if (need(0)) {
        const auto& rhs = be.in(n, 1);
        be.accumulate(parent(0), ta ? matmul(rhs, g, tb, true) : matmul(g, rhs, false, !tb));
      }
      if (need(1)) {
        const auto& lhs = be.in(n, 0);
        be.accumulate(parent(1), tb ? matmul(g, lhs, true, ta) : matmul(lhs, g, !ta, false));
      }
      return;
    }
    case OpKind::kTranspose:
      if (need(0)) be.accumulate(parent(0), transpose(g));
      return;
    case OpKind::kAdd:
      if (need(0)) be.accumulate(parent(0), g);
      if (need(1)) be.accumulate(parent(1), g);
      return;
    case OpKind::kSub:
      if (need(0)) be.accumulate(parent(0), g);
      if (need(1)) be.accumulate(parent(1), scale(g, -1.0));
      return;
    case OpKind::kMul:
      if (need(0)) be.accumulate(parent(0), mul(g, be.in(n, 1)));
      if (need(1)) be.accumulate(parent(1), mul(g, be.in(n, 0)));
      return;
    case OpKind::kMulConst:
      if (need(0)) be.accumulate(parent(0), mul_const(g, n.constant));
      return;
    case OpKind::kScale:
      if (need(0)) be.accumulate(parent(0), scale(g, n.a));
      return;
    case OpKind::kAddScalar:
      if (need(0)) be.accumulate(parent(0), g);
      return;
    case OpKind::kSigmoid:
      if (need(0)) {
        const auto& y = be.out(id);
        be.accumulate(parent(0), mul(g, mul(y, add_scalar(scale(y, -1.0), 1.0))));
      }
      return;
    case OpKind::kExp:
      if (need(0)) be.accumulate(parent(0), mul(g, be.out(id)));
      return;
    case OpKind::kLog:
      if (need(0)) be.accumulate(parent(0), mul(g, pow(be.in(n, 0), -1.0)));
      return;
    case OpKind::kRelu:
      if (need(0)) {
        auto mask = std::make_shared<const Matrix>(positive_mask(be.value(parent(0)), 0.0));
        be.accumulate(parent(0), mul_const(g, mask));
      }
      return;
    case OpKind::kLeakyRelu:
      if (need(0)) {
        auto mask = std::make_shared<const Matrix>(positive_mask(be.value(parent(0)), n.a));
        be.accumulate(parent(0), mul_const(g, mask));
      }
      return;
    case OpKind::kElu:
      if (need(0)) {
        const Matrix& x = be.value(parent(0));
        auto pos = std::make_shared<const Matrix>(positive_mask(x, 0.0));
        auto neg = std::make_shared<const Matrix>(add_scalar(scale(*pos, -1.0), 1.0));
        // d/dx elu = 1 for x > 0, exp(x) = y + 1 otherwise.
        be.accumulate(parent(0), add(mul_const(g, pos),
                                     mul_const(mul(g, add_scalar(be.out(id), 1.0)), neg)));
      }
      return;
    case OpKind::kPow:
      if (need(0)) be.accumulate(parent(0), mul(g, scale(pow(be.in(n, 0), n.a - 1.0), n.a)));
      return;
    case OpKind::kClamp:
      if (need(0)) {
        const Matrix& x = be.value(parent(0));
        Matrix m(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.size(); ++i) m[i] = (x[i] > n.a && x[i] < n.b) ? 1.0 : 0.0;
        be.accumulate(parent(0), mul_const(g, std::make_shared<const Matrix>(std::move(m))));
      }
      return;
    case OpKind::kSum: {
      const Matrix& x = be.value(parent(0));
      if (need(0)) be.accumulate(parent(0), broadcast_scalar(g, x.rows(), x.cols()));
      return;
    }
    case OpKind::kRowSum:
      if (need(0)) be.accumulate(parent(0), broadcast_col(g, be.value(parent(0)).cols()));
      return;
    case OpKind::kColSum:
      if (need(0)) be.accumulate(parent(0), broadcast_row(g, be.value(parent(0)).rows()));
      return;
    case OpKind::kBroadcastScalar:
      if (need(0)) be.accumulate(parent(0), sum(g));
      return;
    case OpKind::kBroadcastCol:
      if (need(0)) be.accumulate(parent(0), row_sum(g));
      return;
    case OpKind::kBroadcastRow:
      if (need(0)) be.accumulate(parent(0), col_sum(g));
      return;
    case OpKind::kGather: {
      const Matrix& x = be.value(parent(0));
      if (need(0)) be.accumulate(parent(0), scatter(g, n.indices, x.rows(), x.cols()));
      return;
    }
    case OpKind::kScatter:
      if (need(0)) be.accumulate(parent(0), gather(g, n.indices));
      return;
    case OpKind::kGatherRows:
      if (need(0)) be.accumulate(parent(0), scatter_rows(g, n.indices, be.value(parent(0)).rows()));
      return;
    case OpKind::kScatterRows:
      if (need(0)) be.accumulate(parent(0), gather_rows(g, n.indices));
      return;
    case OpKind::kMaskedSoftmax:
      if (need(0)) {
        const auto& y = be.out(id);
        const std::size_t cols = be.value(id).cols();
        be.accumulate(parent(0), mul(y, sub(g, broadcast_col(row_sum(mul(g, y)), cols))));
      }
      return;
  }
}

}  // namespace

std::vector<char> Tape::reaches(NodeId root, std::span<const Var> wrt) const {
  std::vector<char> rel(static_cast<std::size_t>(root) + 1, 0);
  std::vector<char> wanted;
  if (!wrt.empty()) {
    wanted.assign(rel.size(), 0);
    for (const Var& v : wrt) {
      if (&v.tape() != this) throw Error("backward: leaf belongs to another tape");
      if (v.id() <= root) wanted[v.id()] = 1;
    }
  }
  // Interior nodes may be requested too (e.g. parameters after an update);
  // they count as sources just like leaves.
  for (NodeId i = 0; i <= root; ++i) {
    const Node& n = nodes_[i];
    if (n.kind == OpKind::kLeaf) {
      rel[i] = n.requires_grad && (wanted.empty() || wanted[i]);
    } else if (n.requires_grad) {
      rel[i] = !wanted.empty() && wanted[i];
      for (std::uint8_t k = 0; k < n.arity; ++k) rel[i] = rel[i] || rel[n.parents[k]];
    }
  }
  return rel;
}

GradientTable Tape::backward(const Var& root, std::span<const Var> wrt) const {
  if (&root.tape() != this) throw Error("backward: root belongs to another tape");
  if (!root.value().is_scalar()) {
    throw ShapeError("backward: root must be 1x1, got " + root.value().shape_string());
  }
  const NodeId r = root.id();
  const std::vector<char> rel = reaches(r, wrt);
  std::vector<Matrix> grads(static_cast<std::size_t>(r) + 1);
  std::vector<char> seen(grads.size(), 0);
  NumericBackend be{*this, grads, seen};
  if (rel[r]) be.accumulate(r, Matrix::scalar(1.0));

  std::vector<char> keep(grads.size(), 0);
  for (const Var& v : wrt)
    if (v.id() <= r) keep[v.id()] = 1;
  for (NodeId i = r + 1; i-- > 0;) {
    if (!rel[i] || !seen[i]) continue;
    const Node& n = nodes_[i];
    if (n.kind == OpKind::kLeaf) continue;
    if (keep[i]) {
      const Matrix g = grads[i];
      apply_rule(be, i, n, g, rel);
      continue;
    }
    Matrix g = std::move(grads[i]);
    seen[i] = 0;
    apply_rule(be, i, n, g, rel);
  }

  GradientTable table;
  auto report = [&](NodeId id) {
    const Node& n = nodes_[id];
    if (id <= r && seen[id]) {
      table.set(id, std::move(grads[id]));
    } else {
      table.set(id, Matrix(n.value.rows(), n.value.cols()));
    }
  };
  if (wrt.empty()) {
    for (NodeId id : leaves_)
      if (nodes_[id].requires_grad) report(id);
  } else {
    for (const Var& v : wrt) {
      if (!table.contains(v.id())) report(v.id());
    }
  }
  return table;
}

std::vector<Var> Tape::grad(const Var& root, std::span<const Var> wrt) {
  if (&root.tape() != this) throw Error("grad: root belongs to another tape");
  if (!root.value().is_scalar()) {
    throw ShapeError("grad: root must be 1x1, got " + root.value().shape_string());
  }
  const NodeId r = root.id();
  const std::vector<char> rel = reaches(r, wrt);
  std::vector<Var> grads(static_cast<std::size_t>(r) + 1);
  SymbolicBackend be{*this, grads};
  if (rel[r]) be.accumulate(r, constant(Matrix::scalar(1.0)));

  for (NodeId i = r + 1; i-- > 0;) {
    if (!rel[i] || !grads[i].valid()) continue;
    const Node& n = nodes_[i];
    if (n.kind == OpKind::kLeaf) continue;
    Var g = grads[i];
    apply_rule(be, i, n, g, rel);
  }

  std::vector<Var> out;
  out.reserve(wrt.size());
  for (const Var& v : wrt) {
    if (v.id() <= r && grads[v.id()].valid()) {
      out.push_back(grads[v.id()]);
    } else {
      out.push_back(constant(Matrix(v.rows(), v.cols())));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Traced operations

namespace {

Tape& tape_of(const Var& a, const Var& b) {
  if (&a.tape() != &b.tape()) throw Error("operands live on different tapes");
  return a.tape();
}

Var unary(OpKind kind, const Var& a, Matrix value) {
  Node n;
  n.kind = kind;
  n.arity = 1;
  n.parents[0] = a.id();
  n.requires_grad = a.requires_grad();
  n.value = std::move(value);
  return a.tape().record(std::move(n));
}

Var unary(Node n, const Var& a) {
  n.arity = 1;
  n.parents[0] = a.id();
  n.requires_grad = a.requires_grad();
  return a.tape().record(std::move(n));
}

Var binary(OpKind kind, const Var& a, const Var& b, Matrix value) {
  Tape& t = tape_of(a, b);
  Node n;
  n.kind = kind;
  n.arity = 2;
  n.parents = {a.id(), b.id()};
  n.requires_grad = a.requires_grad() || b.requires_grad();
  n.value = std::move(value);
  return t.record(std::move(n));
}

}  // namespace

Var matmul(const Var& a, const Var& b, bool transpose_a, bool transpose_b) {
  Tape& t = tape_of(a, b);
  Node n;
  n.kind = OpKind::kMatMul;
  n.arity = 2;
  n.parents = {a.id(), b.id()};
  n.requires_grad = a.requires_grad() || b.requires_grad();
  n.flag_a = transpose_a;
  n.flag_b = transpose_b;
  n.value = matmul(a.value(), b.value(), transpose_a, transpose_b);
  return t.record(std::move(n));
}

Var transpose(const Var& a) { return unary(OpKind::kTranspose, a, transpose(a.value())); }
Var add(const Var& a, const Var& b) { return binary(OpKind::kAdd, a, b, add(a.value(), b.value())); }
Var sub(const Var& a, const Var& b) { return binary(OpKind::kSub, a, b, sub(a.value(), b.value())); }
Var mul(const Var& a, const Var& b) { return binary(OpKind::kMul, a, b, mul(a.value(), b.value())); }

Var mul_const(const Var& a, std::shared_ptr<const Matrix> c) {
  Node n;
  n.kind = OpKind::kMulConst;
  n.value = mul(a.value(), *c);
  n.constant = std::move(c);
  return unary(std::move(n), a);
}

Var mul_const(const Var& a, const Matrix& c) {
  return mul_const(a, std::make_shared<const Matrix>(c));
}

Var scale(const Var& a, double s) {
  Node n;
  n.kind = OpKind::kScale;
  n.a = s;
  n.value = scale(a.value(), s);
  return unary(std::move(n), a);
}

Var add_scalar(const Var& a, double s) {
  Node n;
  n.kind = OpKind::kAddScalar;
  n.a = s;
  n.value = add_scalar(a.value(), s);
  return unary(std::move(n), a);
}

Var sigmoid(const Var& a) { return unary(OpKind::kSigmoid, a, sigmoid(a.value())); }
Var exp(const Var& a) { return unary(OpKind::kExp, a, exp(a.value())); }
Var log(const Var& a) { return unary(OpKind::kLog, a, log(a.value())); }
Var relu(const Var& a) { return unary(OpKind::kRelu, a, relu(a.value())); }

Var leaky_relu(const Var& a, double slope) {
  Node n;
  n.kind = OpKind::kLeakyRelu;
  n.a = slope;
  n.value = leaky_relu(a.value(), slope);
  return unary(std::move(n), a);
}

Var elu(const Var& a) { return unary(OpKind::kElu, a, elu(a.value())); }

Var pow(const Var& a, double p) {
  Node n;
  n.kind = OpKind::kPow;
  n.a = p;
  n.value = pow(a.value(), p);
  return unary(std::move(n), a);
}

Var clamp(const Var& a, double lo, double hi) {
  Node n;
  n.kind = OpKind::kClamp;
  n.a = lo;
  n.b = hi;
  n.value = clamp(a.value(), lo, hi);
  return unary(std::move(n), a);
}

Var sum(const Var& a) { return unary(OpKind::kSum, a, sum(a.value())); }

Var mean(const Var& a) {
  const double count = static_cast<double>(std::max<std::size_t>(a.value().size(), 1));
  return scale(sum(a), 1.0 / count);
}

Var frobenius_norm(const Var& a) { return pow(sum(mul(a, a)), 0.5); }

Var row_sum(const Var& a) { return unary(OpKind::kRowSum, a, row_sum(a.value())); }
Var col_sum(const Var& a) { return unary(OpKind::kColSum, a, col_sum(a.value())); }

Var broadcast_scalar(const Var& s, std::size_t rows, std::size_t cols) {
  return unary(OpKind::kBroadcastScalar, s, broadcast_scalar(s.value(), rows, cols));
}

Var broadcast_col(const Var& v, std::size_t cols) {
  return unary(OpKind::kBroadcastCol, v, broadcast_col(v.value(), cols));
}

Var broadcast_row(const Var& v, std::size_t rows) {
  return unary(OpKind::kBroadcastRow, v, broadcast_row(v.value(), rows));
}

Var gather(const Var& a, std::shared_ptr<const IndexList> indices) {
  Node n;
  n.kind = OpKind::kGather;
  n.value = gather(a.value(), *indices);
  n.indices = std::move(indices);
  return unary(std::move(n), a);
}

Var scatter(const Var& v, std::shared_ptr<const IndexList> indices, std::size_t rows,
            std::size_t cols) {
  Node n;
  n.kind = OpKind::kScatter;
  n.value = scatter(v.value(), *indices, rows, cols);
  n.indices = std::move(indices);
  return unary(std::move(n), v);
}

Var gather_rows(const Var& a, std::shared_ptr<const IndexList> rows) {
  Node n;
  n.kind = OpKind::kGatherRows;
  n.value = gather_rows(a.value(), *rows);
  n.indices = std::move(rows);
  return unary(std::move(n), a);
}

Var scatter_rows(const Var& v, std::shared_ptr<const IndexList> rows, std::size_t total_rows) {
  Node n;
  n.kind = OpKind::kScatterRows;
  n.value = scatter_rows(v.value(), *rows, total_rows);
  n.indices = std::move(rows);
  return unary(std::move(n), v);
}

Var masked_row_softmax(const Var& logits, std::shared_ptr<const Matrix> mask) {
  Node n;
  n.kind = OpKind::kMaskedSoftmax;
  n.value = masked_row_softmax(logits.value(), *mask);
  n.constant = std::move(mask);
  return unary(std::move(n), logits);
}

Matrix mul_const(const Matrix& a, const std::shared_ptr<const Matrix>& c) { return mul(a, *c); }

Matrix gather(const Matrix& a, const std::shared_ptr<const IndexList>& indices) {
  return gather(a, std::span<const std::size_t>(*indices));
}

Matrix scatter(const Matrix& v, const std::shared_ptr<const IndexList>& indices,
               std::size_t rows, std::size_t cols) {
  return scatter(v, std::span<const std::size_t>(*indices), rows, cols);
}

Matrix gather_rows(const Matrix& a, const std::shared_ptr<const IndexList>& rows) {
  return gather_rows(a, std::span<const std::size_t>(*rows));
}

Matrix scatter_rows(const Matrix& v, const std::shared_ptr<const IndexList>& rows,
                    std::size_t total_rows) {
  return scatter_rows(v, std::span<const std::size_t>(*rows), total_rows);
}

}  // namespace linkpoison::tensor
