#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "linkpoison/tensor/matrix.hpp"

namespace linkpoison::tensor {

using NodeId = std::uint32_t;

enum class OpKind : std::uint8_t {
  kLeaf,
  kConstant,
  kMatMul,
  kTranspose,
  kAdd,
  kSub,
  kMul,
  kMulConst,
  kScale,
  kAddScalar,
  kSigmoid,
  kExp,
  kLog,
  kRelu,
  kLeakyRelu,
  kElu,
  kPow,
  kClamp,
  kSum,
  kRowSum,
  kColSum,
  kBroadcastScalar,
  kBroadcastCol,
  kBroadcastRow,
  kGather,
  kScatter,
  kGatherRows,
  kScatterRows,
  kMaskedSoftmax,
};

const char* op_name(OpKind kind);

using IndexList = std::vector<std::size_t>;

struct Node {
  OpKind kind = OpKind::kConstant;
  std::uint8_t arity = 0;
  bool requires_grad = false;
  std::array<NodeId, 2> parents{};
  Matrix value;

  // Per-kind attributes: scale factors, exponents, clamp bounds, transpose
  // flags, target shapes, and shared constant operands.
  double a = 0.0;
  double b = 0.0;
  bool flag_a = false;
  bool flag_b = false;
  std::size_t dim0 = 0;
  std::size_t dim1 = 0;
  std::shared_ptr<const Matrix> constant;
  std::shared_ptr<const IndexList> indices;
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid as long as the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  NodeId id() const noexcept { return id_; }
  Tape& tape() const { return *tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }
  bool requires_grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  NodeId id_ = 0;
};

/// Gradients keyed by leaf node id.
class GradientTable {
 public:
  const Matrix& operator[](const Var& leaf) const { return at(leaf.id()); }
  const Matrix& at(NodeId id) const;
  bool contains(NodeId id) const { return grads_.count(id) != 0; }
  std::size_t size() const { return grads_.size(); }
  void set(NodeId id, Matrix g) { grads_[id] = std::move(g); }

 private:
  std::unordered_map<NodeId, Matrix> grads_;
};

/// Append-only computation record. Nodes are stored in creation order, which
/// is a topological order because a node can only reference existing nodes.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Matrix value, bool requires_grad = true);
  Var constant(Matrix value);

  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const NodeId> leaves() const noexcept { return leaves_; }

  /// Numeric reverse pass from a scalar root. Returns an entry for every
  /// requires-grad leaf (zeros when the root does not depend on it). When
  /// `wrt` is non-empty only those leaves are reported and only the part of
  /// the tape that reaches them is visited. The tape is not modified.
  GradientTable backward(const Var& root, std::span<const Var> wrt = {}) const;

  /// Reverse pass that records the gradient computation on this tape, so the
  /// returned gradients are themselves differentiable.
  std::vector<Var> grad(const Var& root, std::span<const Var> wrt);

  Var record(Node node);

 private:
  std::vector<char> reaches(NodeId root, std::span<const Var> wrt) const;

  std::deque<Node> nodes_;
  std::vector<NodeId> leaves_;
};

// Traced counterparts of the value kernels in matrix.hpp.
Var matmul(const Var& a, const Var& b, bool transpose_a = false, bool transpose_b = false);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var mul_const(const Var& a, std::shared_ptr<const Matrix> c);
Var mul_const(const Var& a, const Matrix& c);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var sigmoid(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var elu(const Var& a);
Var pow(const Var& a, double p);
Var clamp(const Var& a, double lo, double hi);
Var sum(const Var& a);
Var mean(const Var& a);
Var frobenius_norm(const Var& a);
Var row_sum(const Var& a);
Var col_sum(const Var& a);
Var broadcast_scalar(const Var& s, std::size_t rows, std::size_t cols);
Var broadcast_col(const Var& v, std::size_t cols);
Var broadcast_row(const Var& v, std::size_t rows);
Var gather(const Var& a, std::shared_ptr<const IndexList> indices);
Var scatter(const Var& v, std::shared_ptr<const IndexList> indices, std::size_t rows,
            std::size_t cols);
Var gather_rows(const Var& a, std::shared_ptr<const IndexList> rows);
Var scatter_rows(const Var& v, std::shared_ptr<const IndexList> rows, std::size_t total_rows);
Var masked_row_softmax(const Var& logits, std::shared_ptr<const Matrix> mask);

// Value-level overloads taking shared operands, so gradient rules can pass
// node attributes through unchanged in either mode.
Matrix mul_const(const Matrix& a, const std::shared_ptr<const Matrix>& c);
Matrix gather(const Matrix& a, const std::shared_ptr<const IndexList>& indices);
Matrix scatter(const Matrix& v, const std::shared_ptr<const IndexList>& indices,
               std::size_t rows, std::size_t cols);
Matrix gather_rows(const Matrix& a, const std::shared_ptr<const IndexList>& rows);
Matrix scatter_rows(const Matrix& v, const std::shared_ptr<const IndexList>& rows,
                    std::size_t total_rows);

}  // namespace linkpoison::tensor
