#include "posekit/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "posekit/errors.hpp"

namespace posekit {

ImageU8::ImageU8(int w, int h, Color fill) : width(w), height(h) {
  data.resize(static_cast<size_t>(w) * h * 3);
  for (size_t i = 0; i < data.size(); i += 3) {
    data[i] = fill.r;
    data[i + 1] = fill.g;
    data[i + 2] = fill.b;
  }
}

ImageU8 resize_bilinear(const ImageU8& src, int dst_w, int dst_h) {
  if (src.empty()) {
    throw ContractError("resize_bilinear: source image is empty");
  }
  if (dst_w <= 0 || dst_h <= 0) {
    throw ContractError("resize_bilinear: target dimensions must be positive");
  }
  if (dst_w == src.width && dst_h == src.height) {
    return src;
  }

  ImageU8 dst(dst_w, dst_h);
  const double sx = static_cast<double>(src.width) / dst_w;
  const double sy = static_cast<double>(src.height) / dst_h;

  for (int y = 0; y < dst_h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    const double wy = fy - y0;
    int y1 = std::min(y0 + 1, src.height - 1);
    y0 = std::clamp(y0, 0, src.height - 1);
    y1 = std::clamp(y1, 0, src.height - 1);
    for (int x = 0; x < dst_w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      const double wx = fx - x0;
      int x1 = std::min(x0 + 1, src.width - 1);
      x0 = std::clamp(x0, 0, src.width - 1);
      x1 = std::clamp(x1, 0, src.width - 1);

      const uint8_t* p00 = src.px(x0, y0);
      const uint8_t* p10 = src.px(x1, y0);
      const uint8_t* p01 = src.px(x0, y1);
      const uint8_t* p11 = src.px(x1, y1);
      uint8_t* out = dst.px(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = p00[c] * (1.0 - wx) + p10[c] * wx;
        const double bot = p01[c] * (1.0 - wx) + p11[c] * wx;
        const double v = top * (1.0 - wy) + bot * wy;
        out[c] = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return dst;
}

namespace {

int read_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments per the PNM grammar.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF) return -1;
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

}  // namespace

ImageU8 read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open image: " + path);
  }
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '6') {
    throw ParseError("not a binary PPM (P6) file: " + path);
  }
  const int w = read_pnm_token(in);
  const int h = read_pnm_token(in);
  const int maxval = read_pnm_token(in);
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw ParseError("unsupported PPM header in " + path);
  }
  ImageU8 img(w, h);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
    throw ParseError("truncated PPM payload in " + path);
  }
  return img;
}

void write_ppm(const ImageU8& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write image: " + path);
  }
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) {
    throw IoError("failed writing image payload: " + path);
  }
}

void draw_line(ImageU8& img, int x0, int y0, int x1, int y1, Color c, int thickness) {
  // Bresenham; thickness is applied as a square stamp around each point.
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  const int r = std::max(0, thickness - 1);
  int x = x0, y = y0;
  while (true) {
    for (int oy = -r; oy <= r; ++oy) {
      for (int ox = -r; ox <= r; ++ox) {
        img.set(x + ox, y + oy, c);
      }
    }
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

void draw_rect(ImageU8& img, int x0, int y0, int x1, int y1, Color c, int thickness) {
  draw_line(img, x0, y0, x1, y0, c, thickness);
  draw_line(img, x1, y0, x1, y1, c, thickness);
  draw_line(img, x1, y1, x0, y1, c, thickness);
  draw_line(img, x0, y1, x0, y0, c, thickness);
}

void draw_disc(ImageU8& img, int cx, int cy, int radius, Color c) {
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) {
        img.set(cx + dx, cy + dy, c);
      }
    }
  }
}

}  // namespace posekit
