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

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "longink/checkpoint.hpp"
#include "longink/lstm.hpp"
#include "longink/params.hpp"
#include "longink/random.hpp"

using namespace longink;
using ad::Matrix;
using ad::Tape;
using ad::Var;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("matmul with identity returns the operand") {
  Tape tape;
  Matrix a(3, 2);
  a << 1, 2, 3, 4, 5, 6;
  Var va = tape.constant(a);
  Var id = tape.constant(Matrix::Identity(3, 3));
  CHECK((ad::matmul(id, va).value() - a).norm() == doctest::Approx(0.0));
}

TEST_CASE("softmax of equal logits is uniform") {
  Tape tape;
  Var logits = tape.constant(Matrix::Constant(1, 4, 0.37));
  const Matrix s = ad::softmax_rows(logits).value();
  for (int j = 0; j < 4; ++j) CHECK(s(0, j) == doctest::Approx(0.25));
}

TEST_CASE("tanh backward matches the closed form derivative") {
  Tape tape;
  ParamStore ps;
  ps.create("x", Matrix::Constant(1, 1, 0.3));
  Var y = ad::tanh(ps.use(tape, "x"));
  tape.backward(y);
  const double expected = 1.0 - std::tanh(0.3) * std::tanh(0.3);
  CHECK(ps.gradients().at("x")(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.91513).epsilon(1e-4));
}

TEST_CASE("gradient of x^2 at 3 is 6; unreached parameters get zero") {
  Tape tape;
  ParamStore ps;
  ps.create("x", Matrix::Constant(1, 1, 3.0));
  ps.create("w", Matrix::Constant(2, 2, 1.0));
  Var x = ps.use(tape, "x");
  Var loss = ad::mul(x, x);
  tape.backward(loss);
  auto grads = ps.gradients();
  CHECK(grads.at("x")(0, 0) == doctest::Approx(6.0));
  CHECK(grads.at("w").norm() == 0.0);
}

TEST_CASE("backward rejects non scalar losses") {
  Tape tape;
  ParamStore ps;
  ps.create("x", Matrix::Constant(2, 2, 1.0));
  Var v = ad::mul(ps.use(tape, "x"), ps.use(tape, "x"));
  CHECK_THROWS_AS(tape.backward(v), Error);
}

TEST_CASE("shape mismatches are rejected") {
  Tape tape;
  Var a = tape.constant(Matrix::Zero(2, 3));
  Var b = tape.constant(Matrix::Zero(3, 2));
  CHECK_THROWS_AS(ad::add(a, b), Error);
  CHECK_THROWS_AS(ad::mul(a, b), Error);
  CHECK_THROWS_AS(ad::matmul(a, a), Error);
  CHECK_THROWS_AS(ad::slice_cols(a, 2, 5), Error);
}

TEST_CASE("non-finite op results raise NumericError") {
  Tape tape;
  Var a = tape.constant(Matrix::Constant(1, 1, -1.0));
  CHECK_THROWS_AS(ad::log(a), Error);
  Var big = tape.constant(Matrix::Constant(1, 1, 1e308));
  CHECK_THROWS_AS(ad::exp(big), Error);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  ParamStore ps;
  ps.create("w", Matrix::Constant(2, 2, 0.5));
  std::map<std::string, Matrix> grads{{"w", Matrix::Zero(2, 2)}};
  ps.adam_step(grads, AdamConfig{});
  CHECK((ps.at("w").array() == 0.5).all());
}

TEST_CASE("adam: zero learning rate updates moments only") {
  ParamStore ps;
  ps.create("w", Matrix::Constant(1, 1, 0.5));
  std::map<std::string, Matrix> grads{{"w", Matrix::Constant(1, 1, 2.0)}};
  AdamConfig cfg;
  cfg.lr = 0.0;
  ps.adam_step(grads, cfg);
  CHECK(ps.at("w")(0, 0) == 0.5);
  CHECK(ps.step_count("w") == 1);
}

TEST_CASE("adam single step matches the bias-corrected formula") {
  ParamStore ps;
  ps.create("w", Matrix::Zero(1, 1));
  std::map<std::string, Matrix> grads{{"w", Matrix::Constant(1, 1, 1.0)}};
  AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.clip_norm = 0.0;
  ps.adam_step(grads, cfg);
  // m-hat = v-hat = 1 after one unit-gradient step, so delta = -lr.
  CHECK(std::abs(ps.at("w")(0, 0) + 0.1) <= 1e-8);
}

TEST_CASE("adam rejects non-finite gradients") {
  ParamStore ps;
  ps.create("w", Matrix::Zero(1, 1));
  std::map<std::string, Matrix> grads{
      {"w", Matrix::Constant(1, 1, std::nan(""))}};
  CHECK_THROWS_AS(ps.adam_step(grads, AdamConfig{}), Error);
}

TEST_CASE("finite differences: quadratic loss is essentially exact") {
  ParamStore ps;
  std::mt19937_64 rng(1);
  ps.create("x", glorot_uniform(3, 3, rng));
  auto build = [&](Tape& tape) {
    Var x = ps.use(tape, "x");
    return ad::sum(ad::mul(x, x));
  };
  const FiniteDiffReport report = finite_diff_check(ps, build, 1e-5, 1e-8, 0, 9);
  CHECK(report.passed);
  CHECK(report.max_rel_error <= 1e-8);
}

TEST_CASE("finite differences: composite loss over every op family") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ParamStore ps;
    std::mt19937_64 rng = rng_stream(seed, 101);
    ps.create("X", glorot_uniform(3, 4, rng));
    ps.create("W", glorot_uniform(4, 5, rng));
    ps.create("b", glorot_uniform(1, 5, rng));
    Eigen::VectorXd row_factors(3);
    row_factors << 0.5, 1.0, 2.0;
    auto build = [&](Tape& tape) {
      Var X = ps.use(tape, "X");
      Var W = ps.use(tape, "W");
      Var b = ps.use(tape, "b");
      Var A = ad::tanh(ad::add_rowvec(ad::matmul(X, W), b));
      Var S = ad::softmax_rows(A);
      Var L1 = ad::logsumexp_rows(ad::mul(A, ad::sigmoid(A)));
      Var C = ad::concat_cols(A, S);
      Var D = ad::slice_cols(C, 2, 6);
      Var denom = ad::add_scalar(
          ad::sqrt(ad::add_scalar(ad::mul(D, D), 1.0)), 1.0);
      Var E = ad::div(ad::exp(ad::scalar_mul(D, 0.1)), denom);
      Var F = ad::mul_colvec(E, ad::row_sum(A));
      Var G = ad::scale_rows(F, row_factors);
      Var H = ad::concat_rows(G, ad::neg(G));
      Var logs = ad::log(ad::add_scalar(ad::mul(S, S), 1e-3));
      Var parts = ad::add(
          ad::add(ad::mean(H), ad::scalar_mul(ad::sum(L1), 0.01)),
          ad::add(ad::mean(ad::transpose(logs)),
                  ad::add(ad::mean(ad::col_sum(ad::sub(A, S))),
                          ad::mean(ad::row_sum(ad::slice_rows(C, 1, 2))))));
      return parts;
    };
    const FiniteDiffReport report =
        finite_diff_check(ps, build, 1e-5, 1e-4, 5, seed);
    INFO("seed ", seed, " worst ", report.worst_param, " err ",
         report.max_rel_error);
    CHECK(report.passed);
  }
}

TEST_CASE("lstm step gradients pass finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ParamStore ps;
    std::mt19937_64 rng = rng_stream(seed, 77);
    init_lstm(ps, "cell", 3, 4, rng);
    const Matrix x0 = glorot_uniform(2, 3, rng);
    const Matrix x1 = glorot_uniform(2, 3, rng);
    Eigen::VectorXd mask(2);
    mask << 1.0, 0.0;  // second row padded at step 2
    auto build = [&](Tape& tape) {
      LstmState state = lstm_zero_state(tape, 2, 4);
      state = lstm_step(ps, tape, "cell", tape.constant(x0), state);
      state = lstm_step(ps, tape, "cell", tape.constant(x1), state, &mask);
      return ad::mean(ad::add(state.h, state.c));
    };
    const FiniteDiffReport report =
        finite_diff_check(ps, build, 1e-5, 1e-4, 8, seed);
    CHECK(report.passed);
  }
}

TEST_CASE("checkpoint save-load-save is byte identical") {
  Checkpoint ckpt;
  std::mt19937_64 rng(21);
  ckpt.params.create("alpha", glorot_uniform(3, 5, rng));
  ckpt.params.create("beta", glorot_uniform(1, 7, rng));
  ckpt.meta["model_kind"] = "style";
  ckpt.meta["normalization"] = {{"mean", {0.1, -0.2}}, {"std", {1.0, 2.0}}};
  save_checkpoint(ckpt, "ckpt_a");
  Checkpoint loaded = load_checkpoint("ckpt_a");
  CHECK(loaded.meta.at("model_kind") == "style");
  save_checkpoint(loaded, "ckpt_b");
  CHECK(slurp("ckpt_a.json") == slurp("ckpt_b.json"));
  CHECK(slurp("ckpt_a.bin") == slurp("ckpt_b.bin"));
  for (const auto* f : {"ckpt_a.json", "ckpt_a.bin", "ckpt_b.json",
                        "ckpt_b.bin"})
    std::remove(f);
}

TEST_CASE("training steps are bit reproducible for a fixed seed") {
  auto run = [](std::uint64_t seed) {
    ParamStore ps;
    std::mt19937_64 rng = rng_stream(seed, 5);
    ps.create("W", glorot_uniform(4, 4, rng));
    const Matrix data = glorot_uniform(4, 4, rng);
    AdamConfig cfg;
    cfg.lr = 1e-2;
    for (int step = 0; step < 20; ++step) {
      Tape tape;
      Var W = ps.use(tape, "W");
      Var err = ad::sub(ad::matmul(W, tape.constant(data)),
                        tape.constant(Matrix::Identity(4, 4)));
      Var loss = ad::mean(ad::mul(err, err));
      tape.backward(loss);
      ps.adam_step(ps.gradients(), cfg);
      tape.clear();
      ps.release_bindings();
    }
    return ps.at("W");
  };
  const Matrix a = run(9);
  const Matrix b = run(9);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}
