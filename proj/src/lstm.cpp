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

#include "longink/lstm.hpp"

namespace longink {

void init_lstm(ParamStore& params, const std::string& prefix, long in_dim,
               long hidden, std::mt19937_64& rng) {
  params.create(prefix + ".W", glorot_uniform(in_dim + hidden, 4 * hidden, rng));
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(1, 4 * hidden);
  b.middleCols(hidden, hidden).setOnes();  // forget gate
  params.create(prefix + ".b", std::move(b));
}

LstmState lstm_zero_state(ad::Tape& tape, long batch, long hidden) {
  LstmState s;
  s.h = tape.constant(Eigen::MatrixXd::Zero(batch, hidden));
  s.c = tape.constant(Eigen::MatrixXd::Zero(batch, hidden));
  return s;
}

LstmState lstm_step(ParamStore& params, ad::Tape& tape,
                    const std::string& prefix, const ad::Var& x,
                    const LstmState& prev,
                    const Eigen::VectorXd* mask) {
  const long hidden = prev.h.cols();
  ad::Var W = params.use(tape, prefix + ".W");
  ad::Var b = params.use(tape, prefix + ".b");
  ad::Var gates =
      ad::add_rowvec(ad::matmul(ad::concat_cols(x, prev.h), W), b);
  ad::Var i = ad::sigmoid(ad::slice_cols(gates, 0, hidden));
  ad::Var f = ad::sigmoid(ad::slice_cols(gates, hidden, hidden));
  ad::Var g = ad::tanh(ad::slice_cols(gates, 2 * hidden, hidden));
  ad::Var o = ad::sigmoid(ad::slice_cols(gates, 3 * hidden, hidden));
  ad::Var c = ad::add(ad::mul(f, prev.c), ad::mul(i, g));
  ad::Var h = ad::mul(o, ad::tanh(c));
  if (mask != nullptr) {
    const Eigen::VectorXd keep = Eigen::VectorXd::Ones(x.rows()) - *mask;
    c = ad::add(ad::scale_rows(c, *mask), ad::scale_rows(prev.c, keep));
    h = ad::add(ad::scale_rows(h, *mask), ad::scale_rows(prev.h, keep));
  }
  return LstmState{h, c};
}

void init_dense(ParamStore& params, const std::string& prefix, long in_dim,
                long out_dim, std::mt19937_64& rng) {
  params.create(prefix + ".W", glorot_uniform(in_dim, out_dim, rng));
  params.create(prefix + ".b", Eigen::MatrixXd::Zero(1, out_dim));
}

ad::Var dense(ParamStore& params, ad::Tape& tape, const std::string& prefix,
              const ad::Var& x) {
  return ad::add_rowvec(ad::matmul(x, params.use(tape, prefix + ".W")),
                        params.use(tape, prefix + ".b"));
}

ad::Var dense_tanh(ParamStore& params, ad::Tape& tape,
                   const std::string& prefix, const ad::Var& x) {
  return ad::tanh(dense(params, tape, prefix, x));
}

}  // namespace longink
