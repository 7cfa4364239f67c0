// Copyright 2026 The crag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace crag::test {

inline bool bytes_contain(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

inline std::string slurp_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Returns every regular file under `root` whose raw bytes contain `needle`.
inline std::vector<std::string> files_containing(const std::filesystem::path& root,
                                                 const std::string& needle) {
  std::vector<std::string> offenders;
  if (!std::filesystem::exists(root)) return offenders;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    if (bytes_contain(slurp_binary(entry.path()), needle)) {
      offenders.push_back(entry.path().string());
    }
  }
  return offenders;
}

}  // namespace crag::test
