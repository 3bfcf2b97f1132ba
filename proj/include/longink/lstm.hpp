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

#ifndef LONGINK_LSTM_HPP
#define LONGINK_LSTM_HPP

#include <string>

#include "longink/params.hpp"

namespace longink {

/// Hidden and cell state, batch-major [B x H].
struct LstmState {
  ad::Var h;
  ad::Var c;
};

/// Registers W [in+H x 4H] and b [1 x 4H] under `prefix`. Gate order is
/// (input, forget, cell, output); the forget gate bias starts at 1.
void init_lstm(ParamStore& params, const std::string& prefix, long in_dim,
               long hidden, std::mt19937_64& rng);

LstmState lstm_zero_state(ad::Tape& tape, long batch, long hidden);

/// One step. When `mask` is given, rows with mask 0 carry the previous
/// state through unchanged (padding).
LstmState lstm_step(ParamStore& params, ad::Tape& tape,
                    const std::string& prefix, const ad::Var& x,
                    const LstmState& prev,
                    const Eigen::VectorXd* mask = nullptr);

/// Dense layer helpers: y = x W + b, optionally tanh-activated.
void init_dense(ParamStore& params, const std::string& prefix, long in_dim,
                long out_dim, std::mt19937_64& rng);
ad::Var dense(ParamStore& params, ad::Tape& tape, const std::string& prefix,
              const ad::Var& x);
ad::Var dense_tanh(ParamStore& params, ad::Tape& tape,
                   const std::string& prefix, const ad::Var& x);

}  // namespace longink

#endif  // LONGINK_LSTM_HPP
