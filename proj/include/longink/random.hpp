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

#ifndef LONGINK_RANDOM_HPP
#define LONGINK_RANDOM_HPP

#include <cstdint>
#include <random>

namespace longink {

/// splitmix64, used to derive independent seeds from (seed, stream ids).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic per-task generator; streams with distinct ids are
/// independent regardless of evaluation order.
inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b = 0) {
  return std::mt19937_64(mix64(mix64(seed ^ mix64(a)) ^ mix64(b)));
}

}  // namespace longink

#endif  // LONGINK_RANDOM_HPP
