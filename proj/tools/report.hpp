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
#include <vector>

#include "elasto/grid.hpp"

namespace elasto::cli {

struct Panel {
  Image image;
  Image mask;  // pixels with mask == 0 are drawn black; empty = all visible
  double lo = 0.0;
  double hi = 1.0;
};

/// Draws the panels left to right, each pixel enlarged `scale` times, with a
/// perceptually ordered colormap over [lo, hi], and writes an RGB PNG.
void write_panels_png(const std::filesystem::path& path, const std::vector<Panel>& panels, int scale = 2);

}  // namespace elasto::cli
