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

#ifndef LONGINK_INK_IO_HPP
#define LONGINK_INK_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "longink/ink.hpp"

namespace longink {

// JSONL ink format, one object per line:
//   {"label": str, "writer": str, "strokes": [[[x,y,t],...],...]}

std::string ink_to_json_line(const Ink& ink);
Ink ink_from_json_line(const std::string& line);

void write_jsonl(const std::string& path, const std::vector<Ink>& inks);
std::vector<Ink> read_jsonl(const std::string& path);

/// One polyline per stroke, y axis flipped, stroke width 1 unit.
std::string to_svg(const Ink& ink);
void write_svg(const std::string& path, const Ink& ink);

}  // namespace longink

#endif  // LONGINK_INK_IO_HPP
