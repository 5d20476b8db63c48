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

#include "pvlstm/kvconfig.hpp"

#include <charconv>
#include <fstream>

#include "pvlstm/errors.hpp"

namespace pvlstm
{

namespace
{

std::string trim(const std::string & s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KvConfig KvConfig::parse(std::istream & in, const std::string & source)
{
  KvConfig cfg;
  cfg.source_ = source;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": empty key");
    }
    if (cfg.entries_.count(key) != 0) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    cfg.entries_[key] = {trim(line.substr(eq + 1)), lineno};
  }
  return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open config file " + path.string());
  }
  return parse(in, path.string());
}

void KvConfig::set(const std::string & key, const std::string & value)
{
  entries_[key] = {value, 0};
}

std::string KvConfig::where(const std::string & key) const
{
  const Entry & e = entries_.at(key);
  if (e.line == 0) {
    return "'" + key + "' (override)";
  }
  return source_ + ":" + std::to_string(e.line) + ": '" + key + "'";
}

std::string KvConfig::get_string(const std::string & key, const std::string & fallback) const
{
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.value;
}

double KvConfig::get_double(const std::string & key, double fallback) const
{
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return fallback;
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second.value, &used);
    if (used == it->second.value.size()) {
      return v;
    }
  } catch (const std::exception &) {
  }
  throw ParseError(where(key) + " is not a number: " + it->second.value);
}

std::uint64_t KvConfig::get_uint(const std::string & key, std::uint64_t fallback) const
{
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return fallback;
  }
  const std::string & s = it->second.value;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(where(key) + " is not a non-negative integer: " + s);
  }
  return v;
}

bool KvConfig::get_bool(const std::string & key, bool fallback) const
{
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return fallback;
  }
  const std::string & s = it->second.value;
  if (s == "true" || s == "1" || s == "yes") {
    return true;
  }
  if (s == "false" || s == "0" || s == "no") {
    return false;
  }
  throw ParseError(where(key) + " is not a boolean: " + s);
}

void KvConfig::require_known(const std::set<std::string> & known) const
{
  std::string unknown;
  for (const auto & [key, entry] : entries_) {
    if (known.count(key) == 0) {
      unknown += (unknown.empty() ? "" : ", ") + key;
    }
  }
  if (!unknown.empty()) {
    throw ParseError(source_ + ": unknown keys: " + unknown);
  }
}

}  // namespace pvlstm
