#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace posekit {

struct Color {
  uint8_t r = 0;
  uint8_t g = 0;
  uint8_t b = 0;
};

// Interleaved 3-channel 8-bit image, row-major.
struct ImageU8 {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // width * height * 3

  ImageU8() = default;
  ImageU8(int w, int h, Color fill = {0, 0, 0});

  bool empty() const { return width == 0 || height == 0; }

  uint8_t* px(int x, int y) { return data.data() + (static_cast<size_t>(y) * width + x) * 3; }
  const uint8_t* px(int x, int y) const {
    return data.data() + (static_cast<size_t>(y) * width + x) * 3;
  }

  void set(int x, int y, Color c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    uint8_t* p = px(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
};

// Bilinear resampling with half-pixel-center alignment. Resizing to the
// source dimensions is a byte-exact pass-through.
ImageU8 resize_bilinear(const ImageU8& src, int dst_w, int dst_h);

// Binary PPM (P6, maxval 255).
ImageU8 read_ppm(const std::string& path);
void write_ppm(const ImageU8& img, const std::string& path);

void draw_line(ImageU8& img, int x0, int y0, int x1, int y1, Color c, int thickness = 1);
void draw_rect(ImageU8& img, int x0, int y0, int x1, int y1, Color c, int thickness = 1);
void draw_disc(ImageU8& img, int cx, int cy, int radius, Color c);

}  // namespace posekit
