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

#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace elasto::cli {

using json = nlohmann::json;

/// Bad invocation or configuration detected before any work starts (exit 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named parameters settable from flags or a JSON config file. Flags win
/// over the file, the file over the defaults bound at registration.
class Params {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& name, T& var, const std::string& help) {
    CLI::Option* opt = app->add_option("--" + name, var, help)->capture_default_str();
    entries_.push_back({key_of(name), opt,
                        [&var](const json& j) { var = j.get<T>(); },
                        [&var] { return json(var); }});
    return opt;
  }

  CLI::Option* add_path(CLI::App* app, const std::string& name, std::filesystem::path& var, const std::string& help);

  /// Applies `config` to every parameter not given on the command line.
  /// Unknown keys are a usage error.
  void apply(const json& config);
  json effective() const;

 private:
  struct Entry {
    std::string key;
    CLI::Option* option;
    std::function<void(const json&)> set;
    std::function<json()> get;
  };
  static std::string key_of(const std::string& flag);

  std::vector<Entry> entries_;
};

json load_config(const std::filesystem::path& path);

void require_file(const std::filesystem::path& path, const std::string& what);
void ensure_directory(const std::filesystem::path& dir);

/// Writes pretty JSON via a temporary file and rename.
void write_json(const std::filesystem::path& path, const json& j);

/// One JSON object per line on stderr.
void log(const std::string& level, const std::string& command, const std::string& event, json fields = json::object());

}  // namespace elasto::cli
