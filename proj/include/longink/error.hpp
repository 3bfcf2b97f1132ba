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

#ifndef LONGINK_ERROR_HPP
#define LONGINK_ERROR_HPP

#include <stdexcept>
#include <string>

namespace longink {

enum class ErrorKind {
  empty_ink,
  invalid_transform,
  shape,
  numeric,
  too_short,
  need_negatives,
  degenerate_embedding,
  unknown_symbol,
  state,
  empty_label,
  no_candidates,
  missing_artifact,
  empty_reference,
};

/// All recoverable failures in the library throw this; the CLI maps
/// ErrorKind to process exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

const char* error_kind_name(ErrorKind kind);

}  // namespace longink

#endif  // LONGINK_ERROR_HPP
