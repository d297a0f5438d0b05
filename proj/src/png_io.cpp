// Copyright 2026 The vcount Authors
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

#include "vcount/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace vcount {

namespace {

struct ReadCursor {
  const unsigned char* data;
  std::size_t size;
  std::size_t pos;
};

void read_cb(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + n > cur->size) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, cur->data + cur->pos, n);
  cur->pos += n;
}

void write_cb(png_structp png, png_bytep in, png_size_t n) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(in), n);
}

void flush_cb(png_structp) {}

struct ErrorSlot {
  char message[256];
};

void error_cb(png_structp png, png_const_charp msg) {
  auto* slot = static_cast<ErrorSlot*>(png_get_error_ptr(png));
  std::snprintf(slot->message, sizeof(slot->message), "%s", msg);
  png_longjmp(png, 1);
}

void warning_cb(png_structp, png_const_charp) {}

int color_type_for(int channels) {
  switch (channels) {
    case 1: return PNG_COLOR_TYPE_GRAY;
    case 2: return PNG_COLOR_TYPE_GRAY_ALPHA;
    case 3: return PNG_COLOR_TYPE_RGB;
    default: return PNG_COLOR_TYPE_RGBA;
  }
}

// Rows are big-endian when bit_depth is 16. Returns false on libpng error.
bool encode_rows(std::string& out, int width, int height, int channels, int bit_depth,
                 const unsigned char* rows, ErrorSlot& err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, error_cb, warning_cb);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &out, write_cb, flush_cb);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type_for(channels), PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride =
      static_cast<std::size_t>(width) * channels * (bit_depth == 16 ? 2 : 1);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(rows + stride * y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<unsigned char> bytes;
};

bool decode_rows(ReadCursor& cur, Decoded& out, ErrorSlot& err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, error_cb, warning_cb);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &cur, read_cb);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.resize(stride * out.height);
  for (int y = 0; y < out.height; ++y) {
    png_read_row(png, out.bytes.data() + stride * y, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

Decoded decode(std::string_view bytes) {
  if (bytes.size() < 8 ||
      png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0) {
    throw Error(Errc::parse, "not a PNG stream");
  }
  ReadCursor cur{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 0};
  Decoded out;
  ErrorSlot err{};
  if (!decode_rows(cur, out, err)) {
    throw Error(Errc::parse, std::string("PNG decode failed: ") + err.message);
  }
  return out;
}

}  // namespace

std::string encode_png(const RasterImage& image) {
  std::string out;
  ErrorSlot err{};
  if (!encode_rows(out, image.width(), image.height(), image.channels(), 8,
                   image.data().data(), err)) {
    throw Error(Errc::io, std::string("PNG encode failed: ") + err.message);
  }
  return out;
}

RasterImage decode_png(std::string_view bytes) {
  Decoded d = decode(bytes);
  if (d.bit_depth != 8) {
    throw Error(Errc::parse, "expected an 8-bit PNG, got " + std::to_string(d.bit_depth) + "-bit");
  }
  if (d.channels == 2) {
    throw Error(Errc::parse, "gray+alpha PNGs are not supported as images");
  }
  return RasterImage(d.width, d.height, d.channels, std::move(d.bytes));
}

std::string encode_png16(const Image16& image) {
  if (image.channels < 1 || image.channels > 4 || image.width < 1 || image.height < 1 ||
      image.data.size() != static_cast<std::size_t>(image.width) * image.height * image.channels) {
    throw Error(Errc::invalid_argument, "malformed 16-bit image");
  }
  std::vector<unsigned char> be(image.data.size() * 2);
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    be[2 * i] = static_cast<unsigned char>(image.data[i] >> 8);
    be[2 * i + 1] = static_cast<unsigned char>(image.data[i] & 0xff);
  }
  std::string out;
  ErrorSlot err{};
  if (!encode_rows(out, image.width, image.height, image.channels, 16, be.data(), err)) {
    throw Error(Errc::io, std::string("PNG encode failed: ") + err.message);
  }
  return out;
}

Image16 decode_png16(std::string_view bytes) {
  Decoded d = decode(bytes);
  Image16 out{d.width, d.height, d.channels, {}};
  const std::size_t n = static_cast<std::size_t>(d.width) * d.height * d.channels;
  out.data.resize(n);
  if (d.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      out.data[i] = static_cast<std::uint16_t>((d.bytes[2 * i] << 8) | d.bytes[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.data[i] = d.bytes[i];
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(Errc::io, "cannot write " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(Errc::io, "short write to " + path.string());
  }
}

void write_png(const std::filesystem::path& path, const RasterImage& image) {
  write_file(path, encode_png(image));
}

RasterImage read_png(const std::filesystem::path& path) { return decode_png(read_file(path)); }

void write_png16(const std::filesystem::path& path, const Image16& image) {
  write_file(path, encode_png16(image));
}

Image16 read_png16(const std::filesystem::path& path) { return decode_png16(read_file(path)); }

}  // namespace vcount
