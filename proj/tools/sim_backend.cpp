// Reference external backend speaking the length-prefixed pixel protocol on
// stdin/stdout. Deterministic stand-in for a real model runtime: the det
// mode emits configurable boxes, the pose mode encoded heatmaps for a fixed
// keypoint layout.

#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "posekit/heatmap.hpp"
#include "posekit/mock_backends.hpp"

namespace {

bool read_exact(uint8_t* buf, size_t size) {
  size_t done = 0;
  while (done < size) {
    const ssize_t n = ::read(STDIN_FILENO, buf + done, size - done);
    if (n <= 0) return false;
    done += static_cast<size_t>(n);
  }
  return true;
}

void write_exact(const uint8_t* buf, size_t size) {
  size_t done = 0;
  while (done < size) {
    const ssize_t n = ::write(STDOUT_FILENO, buf + done, size - done);
    if (n <= 0) std::exit(3);
    done += static_cast<size_t>(n);
  }
}

uint32_t get_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 24));
}

void put_f32(std::vector<uint8_t>& out, float f) {
  uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

std::vector<posekit::Box> parse_boxes(const std::string& spec) {
  std::vector<posekit::Box> boxes;
  std::string token;
  std::stringstream groups(spec);
  while (std::getline(groups, token, ';')) {
    double v[5] = {0, 0, 0, 0, 1.0};
    std::stringstream fields(token);
    std::string field;
    int i = 0;
    while (std::getline(fields, field, ',') && i < 5) {
      v[i++] = std::stod(field);
    }
    boxes.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  return boxes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"protocol backend simulator"};
  std::string mode;
  std::string boxes_spec;
  double sigma = 2.0;
  app.add_option("--mode", mode, "det or pose")->required();
  app.add_option("--boxes", boxes_spec, "det mode: x,y,w,h,score groups joined by ';'");
  app.add_option("--sigma", sigma, "pose mode: target gaussian std in cells");
  CLI11_PARSE(app, argc, argv);

  while (true) {
    uint8_t len_buf[4];
    if (!read_exact(len_buf, 4)) break;  // EOF between messages ends the loop
    const uint32_t len = get_u32(len_buf);
    std::vector<uint8_t> payload(len);
    if (!read_exact(payload.data(), len)) return 2;
    if (len < 12) return 2;
    const uint32_t width = get_u32(payload.data());
    const uint32_t height = get_u32(payload.data() + 4);
    const uint32_t channels = get_u32(payload.data() + 8);
    if (channels != 3 || len != 12 + width * height * channels) return 2;

    std::vector<uint8_t> response;
    if (mode == "det") {
      std::vector<posekit::Box> boxes;
      if (!boxes_spec.empty()) {
        boxes = parse_boxes(boxes_spec);
      } else {
        // Centered box covering half the canvas.
        boxes.push_back({width / 4.0, height / 4.0, width / 2.0, height / 2.0, 0.9});
      }
      put_u32(response, static_cast<uint32_t>(boxes.size()));
      for (const auto& b : boxes) {
        put_f32(response, static_cast<float>(b.x));
        put_f32(response, static_cast<float>(b.y));
        put_f32(response, static_cast<float>(b.w));
        put_f32(response, static_cast<float>(b.h));
        put_f32(response, static_cast<float>(b.score.value_or(1.0)));
      }
    } else if (mode == "pose") {
      posekit::CodecConfig cfg;
      cfg.sigma = sigma;
      cfg.patch_width = static_cast<int>(width);
      cfg.patch_height = static_cast<int>(height);
      const posekit::KeypointSet kps =
          posekit::FixedPose::default_layout(cfg.patch_width, cfg.patch_height);
      response = posekit::serialize_heatmap(posekit::encode(kps, cfg));
    } else {
      std::fprintf(stderr, "unknown mode: %s\n", mode.c_str());
      return 2;
    }

    std::vector<uint8_t> framed;
    put_u32(framed, static_cast<uint32_t>(response.size()));
    framed.insert(framed.end(), response.begin(), response.end());
    write_exact(framed.data(), framed.size());
  }
  return 0;
}
