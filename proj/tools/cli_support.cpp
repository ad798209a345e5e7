/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The elasto Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli_support.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>

namespace elasto::cli {

CLI::Option* Params::add_path(CLI::App* app, const std::string& name, std::filesystem::path& var,
                              const std::string& help) {
  CLI::Option* opt = app->add_option("--" + name, var, help);
  entries_.push_back({key_of(name), opt,
                      [&var](const json& j) { var = j.get<std::string>(); },
                      [&var] { return json(var.string()); }});
  return opt;
}

std::string Params::key_of(const std::string& flag) {
  std::string k = flag;
  for (char& c : k) {
    if (c == '-') c = '_';
  }
  return k;
}

void Params::apply(const json& config) {
  if (!config.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, value] : config.items()) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
    if (it == entries_.end()) throw UsageError("unknown config key: " + key);
    if (it->option->count() > 0) continue;
    try {
      it->set(value);
    } catch (const json::exception& e) {
      throw UsageError("bad value for config key " + key + ": " + e.what());
    }
  }
}

json Params::effective() const {
  json j = json::object();
  for (const Entry& e : entries_) j[e.key] = e.get();
  return j;
}

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

void require_file(const std::filesystem::path& path, const std::string& what) {
  if (path.empty()) throw UsageError("missing " + what);
  if (!std::filesystem::is_regular_file(path)) throw UsageError(what + " not found: " + path.string());
}

void ensure_directory(const std::filesystem::path& dir) {
  if (dir.empty()) throw UsageError("missing output directory");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir)) throw UsageError("cannot create output directory " + dir.string());
}

void write_json(const std::filesystem::path& path, const json& j) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void log(const std::string& level, const std::string& command, const std::string& event, json fields) {
  static std::mutex mu;
  fields["level"] = level;
  fields["command"] = command;
  fields["event"] = event;
  const std::string line = fields.dump();
  std::lock_guard lock(mu);
  std::fprintf(stderr, "%s\n", line.c_str());
}

}  // namespace elasto::cli
