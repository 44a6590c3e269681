#include "posekit/heatmap.hpp"

#include <cmath>
#include <cstring>

#include "posekit/errors.hpp"

namespace posekit {

HeatmapStack encode(const KeypointSet& kps, const CodecConfig& cfg) {
  HeatmapStack hm(kNumKeypoints, cfg.heatmap_height(), cfg.heatmap_width(), cfg.stride);
  const double denom = 2.0 * cfg.sigma * cfg.sigma;
  for (int c = 0; c < kNumKeypoints; ++c) {
    const Keypoint& kp = kps.points[c];
    if (kp.v <= 0) {
      continue;
    }
    const double ux = kp.x / cfg.stride;
    const double uy = kp.y / cfg.stride;
    for (int row = 0; row < hm.height; ++row) {
      const double dy = row - uy;
      for (int col = 0; col < hm.width; ++col) {
        const double dx = col - ux;
        hm.at(c, row, col) = std::exp(-(dx * dx + dy * dy) / denom);
      }
    }
  }
  return hm;
}

double mse_loss(const HeatmapStack& pred, const HeatmapStack& gt,
                const std::array<bool, kNumKeypoints>& vis_mask) {
  if (pred.channels != gt.channels || pred.height != gt.height || pred.width != gt.width) {
    throw ContractError("mse_loss: heatmap stack dimensions differ");
  }
  double sum = 0.0;
  int64_t cells = 0;
  const int per_channel = pred.height * pred.width;
  for (int c = 0; c < pred.channels; ++c) {
    if (c < kNumKeypoints && !vis_mask[c]) {
      continue;
    }
    for (int i = 0; i < per_channel; ++i) {
      const double d = pred.data[static_cast<size_t>(c) * per_channel + i] -
                       gt.data[static_cast<size_t>(c) * per_channel + i];
      sum += d * d;
    }
    cells += per_channel;
  }
  if (cells == 0) {
    return 0.0;  // empty mean convention
  }
  return sum / static_cast<double>(cells);
}

namespace {

struct Peak {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// Local maxima under a Chebyshev-radius window; ties keep the earliest cell
// in row-major order, so the scan is deterministic.
Peak best_peak(const HeatmapStack& hm, int c, int window) {
  Peak best;
  bool found = false;
  for (int row = 0; row < hm.height; ++row) {
    for (int col = 0; col < hm.width; ++col) {
      const double v = hm.at(c, row, col);
      bool is_peak = true;
      for (int dy = -window; dy <= window && is_peak; ++dy) {
        const int ny = row + dy;
        if (ny < 0 || ny >= hm.height) continue;
        for (int dx = -window; dx <= window; ++dx) {
          const int nx = col + dx;
          if (nx < 0 || nx >= hm.width) continue;
          const double nv = hm.at(c, ny, nx);
          if (nv > v || (nv == v && (ny < row || (ny == row && nx < col)))) {
            is_peak = false;
            break;
          }
        }
      }
      if (is_peak && (!found || v > best.value)) {
        best = {row, col, v};
        found = true;
      }
    }
  }
  return best;
}

}  // namespace

KeypointSet decode(const HeatmapStack& hm, const PatchTransform& t, const CodecConfig& cfg) {
  KeypointSet out;
  for (int c = 0; c < std::min(hm.channels, kNumKeypoints); ++c) {
    const Peak peak = best_peak(hm, c, cfg.peak_window);

    double col = peak.col;
    double row = peak.row;
    if (cfg.subpixel_refine && peak.value > 0.0) {
      if (peak.col > 0 && peak.col < hm.width - 1) {
        const double right = hm.at(c, peak.row, peak.col + 1);
        const double left = hm.at(c, peak.row, peak.col - 1);
        if (right != left) {
          col += right > left ? 0.25 : -0.25;
        }
      }
      if (peak.row > 0 && peak.row < hm.height - 1) {
        const double below = hm.at(c, peak.row + 1, peak.col);
        const double above = hm.at(c, peak.row - 1, peak.col);
        if (below != above) {
          row += below > above ? 0.25 : -0.25;
        }
      }
    }

    const Point img = patch_to_image(t, {col * hm.stride, row * hm.stride});
    out.points[c].x = img.x;
    out.points[c].y = img.y;
    out.confidences[c] = peak.value;
    out.points[c].v = peak.value >= cfg.kp_conf_threshold ? 2 : 0;
  }
  return out;
}

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 24));
}

uint32_t get_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

}  // namespace

std::vector<uint8_t> serialize_heatmap(const HeatmapStack& hm) {
  std::vector<uint8_t> out;
  out.reserve(16 + hm.data.size() * 4);
  put_u32(out, static_cast<uint32_t>(hm.channels));
  put_u32(out, static_cast<uint32_t>(hm.height));
  put_u32(out, static_cast<uint32_t>(hm.width));
  put_u32(out, static_cast<uint32_t>(hm.stride));
  for (double v : hm.data) {
    const float f = static_cast<float>(v);
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
  }
  return out;
}

HeatmapStack deserialize_heatmap(const uint8_t* bytes, size_t size) {
  if (size < 16) {
    throw ParseError("heatmap payload too short for header");
  }
  const uint32_t channels = get_u32(bytes);
  const uint32_t height = get_u32(bytes + 4);
  const uint32_t width = get_u32(bytes + 8);
  const uint32_t stride = get_u32(bytes + 12);
  const size_t count = static_cast<size_t>(channels) * height * width;
  if (channels == 0 || height == 0 || width == 0 || stride == 0 || count > (1u << 28)) {
    throw ParseError("heatmap header fields out of range");
  }
  if (size != 16 + count * 4) {
    throw ParseError("heatmap payload size does not match header");
  }
  HeatmapStack hm(static_cast<int>(channels), static_cast<int>(height),
                  static_cast<int>(width), static_cast<int>(stride));
  for (size_t i = 0; i < count; ++i) {
    const uint32_t bits = get_u32(bytes + 16 + i * 4);
    float f;
    std::memcpy(&f, &bits, 4);
    hm.data[i] = static_cast<double>(f);
  }
  return hm;
}

}  // namespace posekit
