/*
Copyright 2026 The gencs Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include "gencs/tensor.hpp"

#include <filesystem>

namespace gencs {

enum class PixelRange {
  Unit,       // [0, 1]
  Symmetric,  // [-1, 1]
};

struct ImageShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::size_t size() const noexcept { return height * width * channels; }
};

/// Raw little-endian f32 values already in the channel-major layout.
Vector load_f32_image(const std::filesystem::path& path, const ImageShape& shape);
void save_f32_image(const std::filesystem::path& path, std::span<const double> pixels);

/// Any PNG libpng reads, converted to 8-bit gray (1 channel) or RGB (3) and
/// then to channel-major doubles in the requested range.
Vector load_png_image(const std::filesystem::path& path, const ImageShape& shape, PixelRange range);

/// Dispatches on the extension (.f32 or .png).
Vector load_image(const std::filesystem::path& path, const ImageShape& shape, PixelRange range);

}  // namespace gencs
