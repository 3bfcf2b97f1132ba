// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#ifndef LONGINK_AUTODIFF_HPP
#define LONGINK_AUTODIFF_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "longink/error.hpp"

namespace longink::ad {

using Matrix = Eigen::MatrixXd;

class Tape;

/// One value in the computation graph. Nodes are created in topological
/// order by construction, which is what Tape::backward relies on.
struct Node {
  Matrix value;
  Matrix grad;  // empty until the node is reached during backward
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void()> backward_fn;
  Tape* tape = nullptr;
  bool requires_grad = false;

  void add_grad(const Matrix& g) {
    if (grad.size() == 0)
      grad = g;
    else
      grad += g;
  }
};

/// Cheap handle to a Node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  [[nodiscard]] bool defined() const { return node_ != nullptr; }
  [[nodiscard]] const Matrix& value() const { return node_->value; }
  [[nodiscard]] const Matrix& grad() const { return node_->grad; }
  [[nodiscard]] long rows() const { return node_->value.rows(); }
  [[nodiscard]] long cols() const { return node_->value.cols(); }
  [[nodiscard]] double scalar() const;
  [[nodiscard]] bool requires_grad() const { return node_->requires_grad; }
  [[nodiscard]] Node* raw() const { return node_.get(); }
  [[nodiscard]] const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Records the graph for one loss evaluation. Recording can be switched
/// off for pure forward passes (sampling, evaluation); ops then produce
/// free-standing value nodes with no history.
class Tape {
 public:
  Var leaf(Matrix value, bool requires_grad = false);
  Var constant(Matrix value) { return leaf(std::move(value), false); }

  /// Creates an op node from already-computed `value`. If recording is
  /// on and any parent requires gradients, the node is registered and
  /// the caller must fill in node->backward_fn.
  Var op(Matrix value, std::initializer_list<Var> parents);

  /// Backpropagates from a 1x1 loss through every registered node.
  void backward(const Var& loss);

  void clear();
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  [[nodiscard]] bool recording() const { return recording_; }
  void set_recording(bool on) { recording_ = on; }

  /// Process-unique id, used to detect stale parameter bindings.
  [[nodiscard]] std::uint64_t id() const { return id_; }

  class NoGrad {
   public:
    explicit NoGrad(Tape& tape) : tape_(tape), saved_(tape.recording_) {
      tape_.recording_ = false;
    }
    ~NoGrad() { tape_.recording_ = saved_; }

   private:
    Tape& tape_;
    bool saved_;
  };

 private:
  static std::uint64_t next_id();
  std::vector<std::shared_ptr<Node>> nodes_;
  bool recording_ = true;
  std::uint64_t id_ = next_id();
};

// Graph ops. Every op checks shapes, evaluates eagerly through Eigen and
// registers an exact reverse-mode gradient.

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var neg(const Var& a);
Var mul(const Var& a, const Var& b);  // elementwise
Var div(const Var& a, const Var& b);  // elementwise
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add_scalar(const Var& a, double c);
Var scalar_mul(const Var& a, double c);
Var add_rowvec(const Var& m, const Var& row);  // row is 1 x D
Var scale_rows(const Var& a, const Eigen::VectorXd& factors);  // constant
Var mul_colvec(const Var& a, const Var& col);  // col is B x 1
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var sqrt(const Var& a);
Var softmax_rows(const Var& a);
Var logsumexp_rows(const Var& a);  // -> B x 1
Var concat_cols(const Var& a, const Var& b);
Var concat_rows(const Var& a, const Var& b);
Var slice_cols(const Var& a, long first, long n);
Var slice_rows(const Var& a, long first, long n);
Var sum(const Var& a);   // -> 1 x 1
Var mean(const Var& a);  // -> 1 x 1
Var row_sum(const Var& a);  // -> B x 1
Var col_sum(const Var& a);  // -> 1 x D

}  // namespace longink::ad

#endif  // LONGINK_AUTODIFF_HPP
