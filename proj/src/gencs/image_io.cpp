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

#include "gencs/image_io.hpp"

#include "gencs/binary_io.hpp"
#include "gencs/error.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace gencs {

Vector load_f32_image(const std::filesystem::path& path, const ImageShape& shape) {
  const auto bytes = binary::read_file(path);
  require(bytes.size() == shape.size() * sizeof(float), ErrorCode::DimensionMismatch,
          path.string() + ": expected " + std::to_string(shape.size()) + " f32 values, file has " +
              std::to_string(bytes.size()) + " bytes");
  binary::Reader r(bytes, path.string());
  Vector out(shape.size());
  for (auto& v : out) v = r.get<float>();
  require(all_finite(out), ErrorCode::MalformedFile, path.string() + ": non-finite pixel");
  return out;
}

void save_f32_image(const std::filesystem::path& path, std::span<const double> pixels) {
  binary::Writer w;
  for (double v : pixels) w.put<float>(static_cast<float>(v));
  w.write_file(path);
}

Vector load_png_image(const std::filesystem::path& path, const ImageShape& shape, PixelRange range) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    fail(ErrorCode::MalformedFile, path.string() + ": " + image.message);
  }
  std::unique_ptr<png_image, decltype(&png_image_free)> guard(&image, &png_image_free);
  require(shape.channels == 1 || shape.channels == 3, ErrorCode::InvalidArgument,
          "PNG input supports 1 or 3 channels");
  image.format = shape.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  require(image.height == shape.height && image.width == shape.width, ErrorCode::DimensionMismatch,
          path.string() + ": image is " + std::to_string(image.height) + "x" + std::to_string(image.width) +
              ", expected " + std::to_string(shape.height) + "x" + std::to_string(shape.width));
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    fail(ErrorCode::MalformedFile, path.string() + ": " + image.message);
  }
  const std::size_t hw = shape.height * shape.width;
  Vector out(shape.size());
  for (std::size_t p = 0; p < hw; ++p) {
    const png_byte* px = buffer.data() + shape.channels * p;
    for (std::size_t ch = 0; ch < shape.channels; ++ch) {
      const double unit = px[ch] / 255.0;
      out[ch * hw + p] = range == PixelRange::Unit ? unit : 2.0 * unit - 1.0;
    }
  }
  return out;
}

Vector load_image(const std::filesystem::path& path, const ImageShape& shape, PixelRange range) {
  const auto ext = path.extension().string();
  if (ext == ".png" || ext == ".PNG") {
    return load_png_image(path, shape, range);
  }
  if (ext == ".f32") {
    return load_f32_image(path, shape);
  }
  fail(ErrorCode::InvalidArgument, path.string() + ": unsupported image extension");
}

}  // namespace gencs
