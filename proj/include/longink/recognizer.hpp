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

#ifndef LONGINK_RECOGNIZER_HPP
#define LONGINK_RECOGNIZER_HPP

#include <string>
#include <vector>

#include "longink/corpus.hpp"
#include "longink/ink.hpp"

namespace longink {

/// Template recognizer: segments glyphs by x-projection gaps (boundary
/// above 0.5x the median glyph width, space above 1.5x), then classifies
/// each segment by nearest template under mean point distance after
/// resampling to 32 points and height normalization.
std::string recognize(const Ink& ink,
                      const std::vector<GlyphTemplate>& templates);

/// Levenshtein distance divided by the reference length (unit costs).
double cer(const std::string& hypothesis, const std::string& reference);

/// Smallest pairwise distance between template shapes under the
/// recognizer metric; keeps the template set honest.
double min_template_separation(const std::vector<GlyphTemplate>& templates);

}  // namespace longink

#endif  // LONGINK_RECOGNIZER_HPP
