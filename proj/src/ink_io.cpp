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

#include "longink/ink_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace longink {

using nlohmann::json;

std::string ink_to_json_line(const Ink& ink) {
  json strokes = json::array();
  for (const auto& s : ink.strokes) {
    json pts = json::array();
    for (const auto& p : s.points) pts.push_back({p.x, p.y, p.t});
    strokes.push_back(std::move(pts));
  }
  json obj;
  obj["label"] = ink.label;
  obj["writer"] = ink.writer_id;
  obj["strokes"] = std::move(strokes);
  return obj.dump();
}

Ink ink_from_json_line(const std::string& line) {
  const json obj = json::parse(line);
  Ink ink;
  ink.label = obj.value("label", std::string());
  ink.writer_id = obj.value("writer", std::string());
  for (const auto& s : obj.at("strokes")) {
    Stroke stroke;
    for (const auto& p : s) {
      Point point;
      point.x = p.at(0).get<double>();
      point.y = p.at(1).get<double>();
      point.t = p.size() > 2 ? p.at(2).get<double>() : 0.0;
      stroke.points.push_back(point);
    }
    ink.strokes.push_back(std::move(stroke));
  }
  return ink;
}

void write_jsonl(const std::string& path, const std::vector<Ink>& inks) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::missing_artifact, "cannot open for write: " + path);
  for (const auto& ink : inks) out << ink_to_json_line(ink) << '\n';
}

std::vector<Ink> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::missing_artifact, "cannot open for read: " + path);
  std::vector<Ink> inks;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    inks.push_back(ink_from_json_line(line));
  }
  return inks;
}

std::string to_svg(const Ink& ink) {
  std::ostringstream out;
  out.precision(6);
  BoundingBox box{0, 1, 0, 1};
  if (!ink.empty()) box = bounds(ink);
  const double pad = 2.0;
  const double w = box.width() + 2 * pad;
  const double h = box.height() + 2 * pad;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h
      << "\">\n";
  for (const auto& s : ink.strokes) {
    out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" "
           "points=\"";
    bool first = true;
    for (const auto& p : s.points) {
      if (!first) out << ' ';
      first = false;
      // Flip y so handwriting renders upright.
      out << (p.x - box.min_x + pad) << ',' << (box.max_y - p.y + pad);
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_svg(const std::string& path, const Ink& ink) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::missing_artifact, "cannot open for write: " + path);
  out << to_svg(ink);
}

}  // namespace longink
