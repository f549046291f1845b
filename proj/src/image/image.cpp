#include "rcids/image/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>

#include "rcids/error.hpp"
#include "rcids/io_util.hpp"

namespace rcids {
namespace {

struct MemReader {
  const std::string* data;
  size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
  if (r->pos + n > r->data->size()) {
    png_error(png, "read past end of PNG buffer");
  }
  std::memcpy(out, r->data->data() + r->pos, n);
  r->pos += n;
}

void png_write_to_string(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), n);
}

void png_flush_noop(png_structp) {}

}  // namespace

ImageBuffer decode_png(const std::string& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8)) {
    fail(ErrorCode::IoFailure, "not a PNG file");
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::IoFailure, "libpng initialization failed");
  }

  ImageBuffer img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {  // libpng reports errors by longjmp
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::IoFailure, "corrupt PNG data");
  }

  MemReader reader{&bytes, 0};
  png_set_read_fn(png, &reader, png_read_from_memory);
  png_read_info(png, info);

  // Normalize every layout down to 8-bit RGB.
  png_byte color = png_get_color_type(png, info);
  png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  img.width = png_get_image_width(png, info);
  img.height = png_get_image_height(png, info);
  if (img.width == 0 || img.height == 0) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::IoFailure, "PNG has a zero dimension");
  }
  if (png_get_rowbytes(png, info) != img.width * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::IoFailure, "PNG did not normalize to 8-bit RGB");
  }

  img.pixels.assign(img.width * img.height * 3, 0);
  rows.resize(img.height);
  for (size_t y = 0; y < img.height; ++y) rows[y] = img.px(0, y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

std::string encode_png(const ImageBuffer& img) {
  if (img.width == 0 || img.height == 0 || img.pixels.size() != img.width * img.height * 3) {
    fail(ErrorCode::IoFailure, "image buffer is malformed");
  }

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::IoFailure, "libpng initialization failed");
  }

  std::string out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::IoFailure, "PNG encoding failed");
  }

  png_set_write_fn(png, &out, png_write_to_string, png_flush_noop);
  // Fixed settings: byte-identical output for identical pixels is part of
  // the dataset reproducibility contract.
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_SUB);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (size_t y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(img.px(0, y)));
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  return out;
}

ImageBuffer read_png(const std::string& path) { return decode_png(read_file(path)); }

void write_png(const std::string& path, const ImageBuffer& img) {
  write_file(path, encode_png(img));
}

ImageBuffer center_crop_square(const ImageBuffer& img) {
  size_t side = std::min(img.width, img.height);
  size_t x0 = (img.width - side) / 2;
  size_t y0 = (img.height - side) / 2;
  if (side == img.width && side == img.height) return img;
  ImageBuffer out(side, side);
  for (size_t y = 0; y < side; ++y) {
    std::memcpy(out.px(0, y), img.px(x0, y0 + y), side * 3);
  }
  return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& img, size_t out_w, size_t out_h) {
  if (img.width == out_w && img.height == out_h) return img;
  ImageBuffer out(out_w, out_h);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (size_t oy = 0; oy < out_h; ++oy) {
    double fy = (oy + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
    size_t y0 = static_cast<size_t>(fy);
    size_t y1 = std::min(y0 + 1, img.height - 1);
    double wy = fy - y0;
    for (size_t ox = 0; ox < out_w; ++ox) {
      double fx = (ox + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
      size_t x0 = static_cast<size_t>(fx);
      size_t x1 = std::min(x0 + 1, img.width - 1);
      double wx = fx - x0;
      const uint8_t* p00 = img.px(x0, y0);
      const uint8_t* p10 = img.px(x1, y0);
      const uint8_t* p01 = img.px(x0, y1);
      const uint8_t* p11 = img.px(x1, y1);
      uint8_t* dst = out.px(ox, oy);
      for (int c = 0; c < 3; ++c) {
        double top = p00[c] + (p10[c] - p00[c]) * wx;
        double bot = p01[c] + (p11[c] - p01[c]) * wx;
        double v = top + (bot - top) * wy;
        dst[c] = static_cast<uint8_t>(std::llround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return out;
}

double mean_luminance(const ImageBuffer& img) {
  if (img.pixels.empty()) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < img.pixels.size(); i += 3) {
    sum += 0.299 * img.pixels[i] + 0.587 * img.pixels[i + 1] + 0.114 * img.pixels[i + 2];
  }
  return sum / (255.0 * (img.pixels.size() / 3));
}

}  // namespace rcids
