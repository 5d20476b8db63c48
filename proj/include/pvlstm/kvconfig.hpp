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

#ifndef PVLSTM__KVCONFIG_HPP_
#define PVLSTM__KVCONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>

namespace pvlstm
{

/**
 * @brief `key = value` text configuration.
 *
 * One entry per line; `#` starts a comment; blank lines are ignored.
 * Typed getters throw ParseError naming the key and its line.
 */
class KvConfig
{
public:
  static KvConfig parse(std::istream & in, const std::string & source = "<config>");
  static KvConfig load(const std::filesystem::path & path);

  bool has(const std::string & key) const { return entries_.count(key) != 0; }
  void set(const std::string & key, const std::string & value);

  std::string get_string(const std::string & key, const std::string & fallback) const;
  double get_double(const std::string & key, double fallback) const;
  std::uint64_t get_uint(const std::string & key, std::uint64_t fallback) const;
  bool get_bool(const std::string & key, bool fallback) const;

  /// Throws ParseError listing any key not in `known`.
  void require_known(const std::set<std::string> & known) const;

private:
  struct Entry
  {
    std::string value;
    int line = 0;
  };
  std::string where(const std::string & key) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace pvlstm

#endif  // PVLSTM__KVCONFIG_HPP_
