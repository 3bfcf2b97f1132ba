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

#include "longink/autodiff.hpp"

#include <atomic>
#include <cmath>

namespace longink::ad {

std::uint64_t Tape::next_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

double Var::scalar() const {
  if (rows() != 1 || cols() != 1)
    throw Error(ErrorKind::shape, "scalar() on non 1x1 value");
  return node_->value(0, 0);
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  if (!value.allFinite())
    throw Error(ErrorKind::numeric, "non-finite leaf value");
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->tape = this;
  node->requires_grad = requires_grad && recording_;
  if (node->requires_grad) nodes_.push_back(node);
  return Var(node);
}

Var Tape::op(Matrix value, std::initializer_list<Var> parents) {
  if (!value.allFinite())
    throw Error(ErrorKind::numeric, "non-finite op result");
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->tape = this;
  if (recording_) {
    for (const Var& p : parents)
      if (p.defined() && p.requires_grad()) {
        node->requires_grad = true;
        break;
      }
  }
  if (node->requires_grad) {
    node->parents.reserve(parents.size());
    for (const Var& p : parents) node->parents.push_back(p.node());
    nodes_.push_back(node);
  }
  return Var(node);
}

void Tape::backward(const Var& loss) {
  if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1)
    throw Error(ErrorKind::shape, "backward requires a scalar loss");
  if (!loss.requires_grad()) return;  // loss reaches no parameters
  loss.raw()->grad = Matrix::Ones(1, 1);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node* node = it->get();
    if (node->grad.size() == 0 || !node->backward_fn) continue;
    node->backward_fn();
  }
}

void Tape::clear() {
  // Break parent links first so no destructor chain can recurse through
  // a deep graph.
  for (auto& node : nodes_) {
    node->parents.clear();
    node->backward_fn = nullptr;
  }
  while (!nodes_.empty()) nodes_.pop_back();
}

namespace {

Tape* tape_of(const Var& a) { return a.raw()->tape; }

void check_same_shape(const Var& a, const Var& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::shape, std::string(what) + ": shape mismatch");
}

}  // namespace

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  Var out = tape_of(a)->op(a.value() + b.value(), {a, b});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    Node* pb = b.raw();
    o->backward_fn = [o, pa, pb] {
      if (pa->requires_grad) pa->add_grad(o->grad);
      if (pb->requires_grad) pb->add_grad(o->grad);
    };
  }
  return out;
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  Var out = tape_of(a)->op(a.value() - b.value(), {a, b});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    Node* pb = b.raw();
    o->backward_fn = [o, pa, pb] {
      if (pa->requires_grad) pa->add_grad(o->grad);
      if (pb->requires_grad) pb->add_grad(-o->grad);
    };
  }
  return out;
}

Var neg(const Var& a) { return scalar_mul(a, -1.0); }

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  Var out = tape_of(a)->op(a.value().cwiseProduct(b.value()), {a, b});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    Node* pb = b.raw();
    o->backward_fn = [o, pa, pb] {
      if (pa->requires_grad) pa->add_grad(o->grad.cwiseProduct(pb->value));
      if (pb->requires_grad) pb->add_grad(o->grad.cwiseProduct(pa->value));
    };
  }
  return out;
}

Var div(const Var& a, const Var& b) {
  check_same_shape(a, b, "div");
  Var out = tape_of(a)->op(a.value().cwiseQuotient(b.value()), {a, b});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    Node* pb = b.raw();
    o->backward_fn = [o, pa, pb] {
      if (pa->requires_grad) pa->add_grad(o->grad.cwiseQuotient(pb->value));
      if (pb->requires_grad)
        pb->add_grad(-o->grad.cwiseProduct(o->value).cwiseQuotient(pb->value));
    };
  }
  return out;
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows())
    throw Error(ErrorKind::shape, "matmul: inner dimensions differ");
  Var out = tape_of(a)->op(a.value() * b.value(), {a, b});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    Node* pb = b.raw();
    o->backward_fn = [o, pa, pb] {
      if (pa->requires_grad) pa->add_grad(o->grad * pb->value.transpose());
      if (pb->requires_grad) pb->add_grad(pa->value.transpose() * o->grad);
    };
  }
  return out;
}

Var transpose(const Var& a) {
  Var out = tape_of(a)->op(a.value().transpose(), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    o->backward_fn = [o, pa] { pa->add_grad(o->grad.transpose()); };
  }
  return out;
}

Var add_scalar(const Var& a, double c) {
  Var out = tape_of(a)->op(Matrix((a.value().array() + c).matrix()), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    o->backward_fn = [o, pa] { pa->add_grad(o->grad); };
  }
  return out;
}

Var scalar_mul(const Var& a, double c) {
  Var out = tape_of(a)->op(a.value() * c, {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    o->backward_fn = [o, pa, c] { pa->add_grad(o->grad * c); };
  }
  return out;
}

Var add_rowvec(const Var& m, const Var& row) {
  if (row.rows() != 1 || row.cols() != m.cols())
    throw Error(ErrorKind::shape, "add_rowvec: row must be 1 x cols(m)");
  Matrix v = m.value();
  v.rowwise() += row.value().row(0);
  Var out = tape_of(m)->op(std::move(v), {m, row});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pm = m.raw();
    Node* pr = row.raw();
    o->backward_fn = [o, pm, pr] {
      if (pm->requires_grad) pm->add_grad(o->grad);
      if (pr->requires_grad) pr->add_grad(o->grad.colwise().sum());
    };
  }
  return out;
}

Var scale_rows(const Var& a, const Eigen::VectorXd& factors) {
  if (factors.size() != a.rows())
    throw Error(ErrorKind::shape, "scale_rows: factor count != rows");
  Matrix v = factors.asDiagonal() * a.value();
  Var out = tape_of(a)->op(std::move(v), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    const Eigen::VectorXd f = factors;
    o->backward_fn = [o, pa, f] { pa->add_grad(f.asDiagonal() * o->grad); };
  }
  return out;
}

Var mul_colvec(const Var& a, const Var& col) {
  if (col.cols() != 1 || col.rows() != a.rows())
    throw Error(ErrorKind::shape, "mul_colvec: col must be rows(a) x 1");
  Matrix v =
      (a.value().array().colwise() * col.value().col(0).array()).matrix();
  Var out = tape_of(a)->op(std::move(v), {a, col});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    Node* pc = col.raw();
    o->backward_fn = [o, pa, pc] {
      if (pa->requires_grad)
        pa->add_grad(
            (o->grad.array().colwise() * pc->value.col(0).array()).matrix());
      if (pc->requires_grad)
        pc->add_grad(o->grad.cwiseProduct(pa->value).rowwise().sum());
    };
  }
  return out;
}

Var tanh(const Var& a) {
  Matrix v = a.value().array().tanh().matrix();
  Var out = tape_of(a)->op(std::move(v), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    o->backward_fn = [o, pa] {
      pa->add_grad(
          (o->grad.array() * (1.0 - o->value.array().square())).matrix());
    };
  }
  return out;
}

Var sigmoid(const Var& a) {
  Matrix v = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  Var out = tape_of(a)->op(std::move(v), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    o->backward_fn = [o, pa] {
      pa->add_grad((o->grad.array() * o->value.array() *
                    (1.0 - o->value.array()))
                       .matrix());
    };
  }
  return out;
}

Var exp(const Var& a) {
  Matrix v = a.value().array().exp().matrix();
  Var out = tape_of(a)->op(std::move(v), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    o->backward_fn = [o, pa] {
      pa->add_grad(o->grad.cwiseProduct(o->value));
    };
  }
  return out;
}

Var log(const Var& a) {
  Matrix v = a.value().array().log().matrix();
  Var out = tape_of(a)->op(std::move(v), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    o->backward_fn = [o, pa] {
      pa->add_grad(o->grad.cwiseQuotient(pa->value));
    };
  }
  return out;
}

Var sqrt(const Var& a) {
  Matrix v = a.value().array().sqrt().matrix();
  Var out = tape_of(a)->op(std::move(v), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    o->backward_fn = [o, pa] {
      pa->add_grad((o->grad.array() / (2.0 * o->value.array())).matrix());
    };
  }
  return out;
}

Var softmax_rows(const Var& a) {
  Eigen::ArrayXXd z = a.value().array();
  const Eigen::VectorXd row_max = a.value().rowwise().maxCoeff();
  z.colwise() -= row_max.array();
  z = z.exp();
  const Eigen::VectorXd norm = z.matrix().rowwise().sum();
  Matrix s = (z.colwise() / norm.array()).matrix();
  Var out = tape_of(a)->op(std::move(s), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    o->backward_fn = [o, pa] {
      const Eigen::VectorXd dot =
          o->grad.cwiseProduct(o->value).rowwise().sum();
      Matrix g = o->grad;
      g.colwise() -= dot;
      pa->add_grad(o->value.cwiseProduct(g));
    };
  }
  return out;
}

Var logsumexp_rows(const Var& a) {
  const Eigen::VectorXd row_max = a.value().rowwise().maxCoeff();
  Eigen::ArrayXXd z = a.value().array();
  z.colwise() -= row_max.array();
  z = z.exp();
  const Eigen::VectorXd norm = z.matrix().rowwise().sum();
  Matrix v = (row_max.array() + norm.array().log()).matrix();
  Matrix softmax = (z.colwise() / norm.array()).matrix();
  Var out = tape_of(a)->op(std::move(v), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    o->backward_fn = [o, pa, softmax = std::move(softmax)] {
      pa->add_grad(
          (softmax.array().colwise() * o->grad.col(0).array()).matrix());
    };
  }
  return out;
}

Var concat_cols(const Var& a, const Var& b) {
  if (a.rows() != b.rows())
    throw Error(ErrorKind::shape, "concat_cols: row count differs");
  Matrix v(a.rows(), a.cols() + b.cols());
  v << a.value(), b.value();
  Var out = tape_of(a)->op(std::move(v), {a, b});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    Node* pb = b.raw();
    const long ac = a.cols();
    const long bc = b.cols();
    o->backward_fn = [o, pa, pb, ac, bc] {
      if (pa->requires_grad) pa->add_grad(o->grad.leftCols(ac));
      if (pb->requires_grad) pb->add_grad(o->grad.rightCols(bc));
    };
  }
  return out;
}

Var concat_rows(const Var& a, const Var& b) {
  if (a.cols() != b.cols())
    throw Error(ErrorKind::shape, "concat_rows: column count differs");
  Matrix v(a.rows() + b.rows(), a.cols());
  v << a.value(), b.value();
  Var out = tape_of(a)->op(std::move(v), {a, b});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    Node* pb = b.raw();
    const long ar = a.rows();
    const long br = b.rows();
    o->backward_fn = [o, pa, pb, ar, br] {
      if (pa->requires_grad) pa->add_grad(o->grad.topRows(ar));
      if (pb->requires_grad) pb->add_grad(o->grad.bottomRows(br));
    };
  }
  return out;
}

Var slice_cols(const Var& a, long first, long n) {
  if (first < 0 || n < 0 || first + n > a.cols())
    throw Error(ErrorKind::shape, "slice_cols: out of range");
  Var out = tape_of(a)->op(a.value().middleCols(first, n), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    const long rows = a.rows();
    const long cols = a.cols();
    o->backward_fn = [o, pa, first, n, rows, cols] {
      Matrix g = Matrix::Zero(rows, cols);
      g.middleCols(first, n) = o->grad;
      pa->add_grad(g);
    };
  }
  return out;
}

Var slice_rows(const Var& a, long first, long n) {
  if (first < 0 || n < 0 || first + n > a.rows())
    throw Error(ErrorKind::shape, "slice_rows: out of range");
  Var out = tape_of(a)->op(a.value().middleRows(first, n), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    const long rows = a.rows();
    const long cols = a.cols();
    o->backward_fn = [o, pa, first, n, rows, cols] {
      Matrix g = Matrix::Zero(rows, cols);
      g.middleRows(first, n) = o->grad;
      pa->add_grad(g);
    };
  }
  return out;
}

Var sum(const Var& a) {
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  Var out = tape_of(a)->op(std::move(v), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    const long rows = a.rows();
    const long cols = a.cols();
    o->backward_fn = [o, pa, rows, cols] {
      pa->add_grad(Matrix::Constant(rows, cols, o->grad(0, 0)));
    };
  }
  return out;
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.rows() * a.cols());
  return scalar_mul(sum(a), 1.0 / n);
}

Var row_sum(const Var& a) {
  Matrix v = a.value().rowwise().sum();
  Var out = tape_of(a)->op(std::move(v), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    const long cols = a.cols();
    o->backward_fn = [o, pa, cols] {
      pa->add_grad(o->grad.col(0).replicate(1, cols));
    };
  }
  return out;
}

Var col_sum(const Var& a) {
  Matrix v = a.value().colwise().sum();
  Var out = tape_of(a)->op(std::move(v), {a});
  if (out.requires_grad()) {
    Node* o = out.raw();
    Node* pa = a.raw();
    const long rows = a.rows();
    o->backward_fn = [o, pa, rows] {
      pa->add_grad(o->grad.replicate(rows, 1));
    };
  }
  return out;
}

}  // namespace longink::ad
