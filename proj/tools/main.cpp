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

#include <cstdio>
#include <exception>

#include "commands.hpp"
#include "elasto/error.hpp"

namespace {

int fail(int code, const std::string& kind, const std::string& message) {
  elasto::cli::log("error", "elasto", kind, {{"message", message}, {"exit_code", code}});
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace elasto::cli;
  CLI::App app{"Vascular elastography toolkit"};
  app.require_subcommand(1);
  auto commands = make_commands();
  std::vector<std::pair<CLI::App*, Command*>> subs;
  for (auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd->name(), cmd->description());
    cmd->setup(sub);
    subs.emplace_back(sub, cmd.get());
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (auto& [sub, cmd] : subs) {
    if (!sub->parsed()) continue;
    try {
      cmd->execute();
      return 0;
    } catch (const UsageError& e) {
      return fail(1, "usage_error", e.what());
    } catch (const elasto::Error& e) {
      return fail(2, "runtime_error", e.what());
    } catch (const std::exception& e) {
      return fail(2, "runtime_error", e.what());
    }
  }
  return 1;
}
