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


#include "pvlstm/cli/manifest.hpp"

#include <array>
#include <chrono>
#include <fstream>
#include <memory>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "pvlstm/errors.hpp"

namespace pvlstm::cli
{

std::string sha256_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open " + path.string() + " for hashing");
  }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest initialisation failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got)) != 1) {
      throw std::runtime_error("sha256: digest update failed");
    }
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw std::runtime_error("sha256: digest finalisation failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += fmt::format("{:02x}", md[i]);
  }
  return hex;
}

InputDigest digest_input(const std::filesystem::path & path)
{
  return {path.string(), sha256_file(path), std::filesystem::file_size(path)};
}

std::string utc_timestamp()
{
  const auto now = std::chrono::system_clock::now();
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

nlohmann::ordered_json RunManifest::to_json() const
{
  nlohmann::ordered_json j;
  j["command"] = command;
  j["argv"] = argv;
  j["tool_version"] = tool_version;
  j["started_at"] = started_at;
  j["seed"] = seed;
  j["config"] = config;
  auto list = nlohmann::ordered_json::array();
  for (const InputDigest & d : inputs) {
    list.push_back({{"path", d.path}, {"sha256", d.sha256}, {"bytes", d.bytes}});
  }
  j["inputs"] = std::move(list);
  return j;
}

void write_manifest(const std::filesystem::path & path, const RunManifest & manifest)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write manifest " + path.string());
  }
  out << manifest.to_json().dump(2) << '\n';
}

}  // namespace pvlstm::cli
