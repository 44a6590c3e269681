#include "posekit/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "posekit/errors.hpp"

namespace posekit {

namespace {

double intersection_area(const Box& a, const Box& b) {
  const double ix = std::max(0.0, std::min(a.x2(), b.x2()) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y2(), b.y2()) - std::max(a.y, b.y));
  return ix * iy;
}

}  // namespace

double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  return inter / uni;
}

double giou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  const double ex = std::max(a.x2(), b.x2()) - std::min(a.x, b.x);
  const double ey = std::max(a.y2(), b.y2()) - std::min(a.y, b.y);
  const double enclosing = ex * ey;
  const double base = uni > 0.0 ? inter / uni : 0.0;
  if (enclosing <= 0.0) {
    return base;
  }
  return base - (enclosing - uni) / enclosing;
}

double nwd(const Box& a, const Box& b, const NwdConfig& cfg) {
  if (a.w <= 0.0 || a.h <= 0.0 || b.w <= 0.0 || b.h <= 0.0) {
    throw ContractError("nwd: boxes must have positive extents");
  }
  if (cfg.c <= 0.0) {
    throw ContractError("nwd: normalization constant must be positive");
  }
  const double dx = a.cx() - b.cx();
  const double dy = a.cy() - b.cy();
  const double dw = (a.w - b.w) / 2.0;
  const double dh = (a.h - b.h) / 2.0;
  const double w2 = std::sqrt(dx * dx + dy * dy + dw * dw + dh * dh);
  return std::exp(-w2 / cfg.c);
}

PatchTransform make_patch_transform(const Box& det, double frame_w, double frame_h,
                                    double expansion, int dst_width, int dst_height) {
  if (det.w <= 0.0 || det.h <= 0.0) {
    throw ContractError("make_patch_transform: detection box must have positive extents");
  }
  if (expansion <= 0.0) {
    throw ContractError("make_patch_transform: expansion must be positive");
  }
  if (frame_w <= 0.0 || frame_h <= 0.0) {
    throw ContractError("make_patch_transform: frame dimensions must be positive");
  }

  Box src = det;
  if (expansion != 1.0) {
    const double cx = det.cx();
    const double cy = det.cy();
    src.w = det.w * expansion;
    src.h = det.h * expansion;
    src.x = cx - src.w / 2.0;
    src.y = cy - src.h / 2.0;
  }

  PatchTransform t;
  t.src_box = src;
  t.dst_width = dst_width;
  t.dst_height = dst_height;
  t.scale = std::min(static_cast<double>(dst_width) / src.w,
                     static_cast<double>(dst_height) / src.h);
  t.pad_x = std::max(0.0, (dst_width - src.w * t.scale) / 2.0);
  t.pad_y = std::max(0.0, (dst_height - src.h * t.scale) / 2.0);
  return t;
}

Point image_to_patch(const PatchTransform& t, const Point& p) {
  return {(p.x - t.src_box.x) * t.scale + t.pad_x,
          (p.y - t.src_box.y) * t.scale + t.pad_y};
}

Point patch_to_image(const PatchTransform& t, const Point& p) {
  return {t.src_box.x + (p.x - t.pad_x) / t.scale,
          t.src_box.y + (p.y - t.pad_y) / t.scale};
}

std::array<double, 6> patch_transform_record(const PatchTransform& t) {
  return {t.src_box.x, t.src_box.y, t.src_box.w, t.src_box.h,
          static_cast<double>(t.dst_width), static_cast<double>(t.dst_height)};
}

PatchTransform patch_transform_from_record(const std::array<double, 6>& record) {
  PatchTransform t;
  t.src_box = {record[0], record[1], record[2], record[3], std::nullopt};
  t.dst_width = static_cast<int>(record[4]);
  t.dst_height = static_cast<int>(record[5]);
  if (t.src_box.w <= 0.0 || t.src_box.h <= 0.0 || t.dst_width <= 0 || t.dst_height <= 0) {
    throw ContractError("patch_transform_from_record: non-positive extents");
  }
  t.scale = std::min(t.dst_width / t.src_box.w, t.dst_height / t.src_box.h);
  t.pad_x = std::max(0.0, (t.dst_width - t.src_box.w * t.scale) / 2.0);
  t.pad_y = std::max(0.0, (t.dst_height - t.src_box.h * t.scale) / 2.0);
  return t;
}

Box clip_box(const Box& b, double frame_w, double frame_h) {
  const double x0 = std::clamp(b.x, 0.0, frame_w);
  const double y0 = std::clamp(b.y, 0.0, frame_h);
  const double x1 = std::clamp(b.x2(), 0.0, frame_w);
  const double y1 = std::clamp(b.y2(), 0.0, frame_h);
  Box out;
  out.x = x0;
  out.y = y0;
  out.w = std::max(0.0, x1 - x0);
  out.h = std::max(0.0, y1 - y0);
  out.score = b.score;
  return out;
}

}  // namespace posekit
