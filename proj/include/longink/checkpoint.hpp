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

#ifndef LONGINK_CHECKPOINT_HPP
#define LONGINK_CHECKPOINT_HPP

#include <string>

#include <json.hpp>

#include "longink/params.hpp"

namespace longink {

/// Parameters plus a JSON manifest describing them (model_kind,
/// normalization statistics, config echo). On disk a checkpoint is a
/// manifest at <prefix>.json and a little-endian float32 blob at
/// <prefix>.bin, tensors serialized row-major in manifest order.
struct Checkpoint {
  ParamStore params;
  nlohmann::json meta;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& prefix);
Checkpoint load_checkpoint(const std::string& prefix);

}  // namespace longink

#endif  // LONGINK_CHECKPOINT_HPP
