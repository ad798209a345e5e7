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

#include "elasto/grid.hpp"

#include "elasto/error.hpp"

namespace elasto {

GridSpec GridSpec::centered_on(Vec2 center, int width, int height, double pitch) {
  if (width <= 0 || height <= 0 || !(pitch > 0.0)) throw InvalidArgument("grid needs a positive shape and pitch");
  GridSpec g;
  g.width = width;
  g.height = height;
  g.pitch = pitch;
  g.origin = {center.x - 0.5 * (width - 1) * pitch, center.y + 0.5 * (height - 1) * pitch};
  return g;
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::generated: return "generated";
    case Provenance::comsol_style: return "comsol_style";
    case Provenance::registered: return "registered";
  }
  return "generated";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "generated") return Provenance::generated;
  if (s == "comsol_style") return Provenance::comsol_style;
  if (s == "registered") return Provenance::registered;
  throw FormatError("unknown provenance '" + s + "'");
}

}  // namespace elasto
