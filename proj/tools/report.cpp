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

#include "report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <png.h>

namespace elasto::cli {
namespace {

// Anchor colors of a viridis-like map at t = 0, 0.25, 0.5, 0.75, 1.
constexpr std::array<std::array<double, 3>, 5> kAnchors{{
    {68, 1, 84},
    {59, 82, 139},
    {33, 145, 140},
    {94, 201, 98},
    {253, 231, 37},
}};

std::array<unsigned char, 3> colormap(double t) {
  t = std::clamp(t, 0.0, 1.0) * (kAnchors.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), kAnchors.size() - 2);
  const double f = t - static_cast<double>(i);
  std::array<unsigned char, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    rgb[c] = static_cast<unsigned char>(std::lround((1 - f) * kAnchors[i][c] + f * kAnchors[i + 1][c]));
  }
  return rgb;
}

constexpr int kGap = 4;

}  // namespace

void write_panels_png(const std::filesystem::path& path, const std::vector<Panel>& panels, int scale) {
  if (panels.empty()) throw std::invalid_argument("no panels to draw");
  if (scale < 1) throw std::invalid_argument("scale must be positive");
  int height = 0, width = 0;
  for (const Panel& p : panels) {
    height = std::max(height, p.image.rows * scale);
    width += p.image.cols * scale;
  }
  width += kGap * static_cast<int>(panels.size() - 1);

  std::vector<unsigned char> rgb(static_cast<std::size_t>(width) * height * 3, 255);
  int x0 = 0;
  for (const Panel& p : panels) {
    const double span = p.hi > p.lo ? p.hi - p.lo : 1.0;
    for (int r = 0; r < p.image.rows; ++r) {
      for (int c = 0; c < p.image.cols; ++c) {
        const bool visible = p.mask.size() == 0 || p.mask(r, c) != 0.0;
        const auto col = visible ? colormap((p.image(r, c) - p.lo) / span) : std::array<unsigned char, 3>{0, 0, 0};
        for (int dy = 0; dy < scale; ++dy) {
          for (int dx = 0; dx < scale; ++dx) {
            const std::size_t o = (static_cast<std::size_t>(r * scale + dy) * width + x0 + c * scale + dx) * 3;
            rgb[o] = col[0];
            rgb[o + 1] = col[1];
            rgb[o + 2] = col[2];
          }
        }
      }
    }
    x0 += p.image.cols * scale + kGap;
  }

  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("PNG encoding failed for " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < height; ++r) png_write_row(png, rgb.data() + static_cast<std::size_t>(r) * width * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace elasto::cli
