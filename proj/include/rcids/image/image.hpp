#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rcids {

// 8-bit RGB image, row-major, no padding. Channel count is fixed at 3
// everywhere in this toolkit; PNG inputs with gray/alpha/16-bit layouts are
// converted on decode.
struct ImageBuffer {
  size_t width = 0;
  size_t height = 0;
  std::vector<uint8_t> pixels;  // width*height*3 bytes

  ImageBuffer() = default;
  ImageBuffer(size_t w, size_t h) : width(w), height(h), pixels(w * h * 3, 0) {}

  uint8_t* px(size_t x, size_t y) { return pixels.data() + (y * width + x) * 3; }
  const uint8_t* px(size_t x, size_t y) const { return pixels.data() + (y * width + x) * 3; }
};

// PNG in memory / on disk. Decode accepts any libpng-readable color layout
// and normalizes to 8-bit RGB; encode always writes 8-bit RGB with fixed
// settings so identical pixels give identical bytes. IO_FAILURE on anything
// libpng rejects.
ImageBuffer decode_png(const std::string& bytes);
std::string encode_png(const ImageBuffer& img);
ImageBuffer read_png(const std::string& path);
void write_png(const std::string& path, const ImageBuffer& img);

// Largest centered square (side = min(width, height)); the leftover margin
// splits evenly with the extra pixel on the right/bottom.
ImageBuffer center_crop_square(const ImageBuffer& img);

// Bilinear resample with half-pixel centers (source position of output pixel
// i is (i+0.5)*in/out - 0.5, clamped), channels filtered independently,
// results rounded to nearest. A constant image stays exactly constant.
ImageBuffer resize_bilinear(const ImageBuffer& img, size_t out_w, size_t out_h);

// Mean Rec.601 luma over all pixels, scaled to [0,1].
double mean_luminance(const ImageBuffer& img);

}  // namespace rcids
