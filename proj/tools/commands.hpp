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
#include <memory>
#include <string>
#include <vector>

#include "cli_support.hpp"

namespace elasto::cli {

/// One subcommand: registers its parameters, then runs after parsing.
class Command {
 public:
  virtual ~Command() = default;
  virtual std::string name() const = 0;
  virtual std::string description() const = 0;

  void setup(CLI::App* app);
  /// Merges the config file into the parameters and executes.
  void execute();

 protected:
  virtual void declare(CLI::App* app) = 0;
  virtual void run() = 0;

  /// Saves the effective configuration as <dir>/<name>.config.json.
  void persist(const std::filesystem::path& dir) const;
  void info(const std::string& event, json fields = json::object()) const;

  Params params_;

 private:
  std::filesystem::path config_;
};

std::vector<std::unique_ptr<Command>> make_commands();

}  // namespace elasto::cli
