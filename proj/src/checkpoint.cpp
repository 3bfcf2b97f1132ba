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

#include "longink/checkpoint.hpp"

#include <fstream>
#include <vector>

namespace longink {

using nlohmann::json;

void save_checkpoint(const Checkpoint& ckpt, const std::string& prefix) {
  json manifest;
  manifest["dtype"] = "float32-le";
  manifest["meta"] = ckpt.meta;
  json params = json::array();
  std::vector<float> blob;
  for (const auto& name : ckpt.params.names()) {
    const Eigen::MatrixXd& m = ckpt.params.at(name);
    json entry;
    entry["name"] = name;
    entry["rows"] = m.rows();
    entry["cols"] = m.cols();
    params.push_back(std::move(entry));
    for (long i = 0; i < m.rows(); ++i)
      for (long j = 0; j < m.cols(); ++j)
        blob.push_back(static_cast<float>(m(i, j)));
  }
  manifest["params"] = std::move(params);

  std::ofstream mf(prefix + ".json", std::ios::binary);
  if (!mf)
    throw Error(ErrorKind::missing_artifact,
                "cannot write manifest: " + prefix + ".json");
  mf << manifest.dump(2) << '\n';

  std::ofstream bf(prefix + ".bin", std::ios::binary);
  if (!bf)
    throw Error(ErrorKind::missing_artifact,
                "cannot write blob: " + prefix + ".bin");
  bf.write(reinterpret_cast<const char*>(blob.data()),
           static_cast<std::streamsize>(blob.size() * sizeof(float)));
}

Checkpoint load_checkpoint(const std::string& prefix) {
  std::ifstream mf(prefix + ".json", std::ios::binary);
  if (!mf)
    throw Error(ErrorKind::missing_artifact,
                "missing manifest: " + prefix + ".json");
  json manifest;
  mf >> manifest;

  std::ifstream bf(prefix + ".bin", std::ios::binary);
  if (!bf)
    throw Error(ErrorKind::missing_artifact,
                "missing blob: " + prefix + ".bin");
  bf.seekg(0, std::ios::end);
  const auto n_bytes = static_cast<std::size_t>(bf.tellg());
  bf.seekg(0);
  std::vector<float> data(n_bytes / sizeof(float));
  bf.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(n_bytes));

  Checkpoint ckpt;
  ckpt.meta = manifest.value("meta", json::object());
  std::size_t offset = 0;
  for (const auto& entry : manifest.at("params")) {
    const std::string name = entry.at("name").get<std::string>();
    const long rows = entry.at("rows").get<long>();
    const long cols = entry.at("cols").get<long>();
    Eigen::MatrixXd m(rows, cols);
    for (long i = 0; i < rows; ++i)
      for (long j = 0; j < cols; ++j) {
        if (offset >= data.size())
          throw Error(ErrorKind::missing_artifact,
                      "checkpoint blob truncated: " + prefix);
        m(i, j) = static_cast<double>(data[offset++]);
      }
    ckpt.params.create(name, std::move(m));
  }
  return ckpt;
}

}  // namespace longink
