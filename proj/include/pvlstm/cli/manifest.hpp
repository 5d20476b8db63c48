// Copyright 2026 The pvlstm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef PVLSTM__CLI__MANIFEST_HPP_
#define PVLSTM__CLI__MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace pvlstm::cli
{

inline constexpr const char * kToolVersion = "0.1.0";

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path & path);

struct InputDigest
{
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

InputDigest digest_input(const std::filesystem::path & path);

/**
 * @brief Provenance record of one command invocation.
 *
 * Written before any result file, so a crash still leaves the inputs and the
 * resolved configuration behind.
 */
struct RunManifest
{
  std::string command;
  std::vector<std::string> argv;
  nlohmann::ordered_json config;
  std::uint64_t seed = 0;
  std::vector<InputDigest> inputs;
  std::string tool_version = kToolVersion;
  std::string started_at;  // UTC, ISO 8601

  nlohmann::ordered_json to_json() const;
};

std::string utc_timestamp();

void write_manifest(const std::filesystem::path & path, const RunManifest & manifest);

}  // namespace pvlstm::cli

#endif  // PVLSTM__CLI__MANIFEST_HPP_
