#pragma once

#include <array>
#include <optional>

namespace posekit {

// Axis-aligned box, top-left origin, continuous pixel coordinates.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  std::optional<double> score;

  double area() const { return w * h; }
  double cx() const { return x + w / 2.0; }
  double cy() const { return y + h / 2.0; }
  double x2() const { return x + w; }
  double y2() const { return y + h; }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct NwdConfig {
  // Normalization constant in pixels. 12.8 is the constant recommended by
  // the work that introduced the metric.
  double c = 12.8;
};

// Default pose patch canvas, width x height.
inline constexpr int kPatchWidth = 192;
inline constexpr int kPatchHeight = 256;

// Affine mapping from a detection box in the source frame onto a fixed-size
// patch canvas: aspect-preserving scale plus symmetric padding.
struct PatchTransform {
  double scale = 1.0;
  double pad_x = 0.0;
  double pad_y = 0.0;
  Box src_box;
  int dst_width = kPatchWidth;
  int dst_height = kPatchHeight;
};

// intersection / union; 0 when the union is empty.
double iou(const Box& a, const Box& b);

// iou - (enclosing - union) / enclosing, in [-1, 1].
double giou(const Box& a, const Box& b);

// Boxes as 2D Gaussians (mean = center, diag cov = (w/2, h/2));
// exp(-W2 / cfg.c) with W2 the L2 distance between the 4-vectors
// [cx, cy, w/2, h/2]. Throws ContractError on zero-extent boxes.
double nwd(const Box& a, const Box& b, const NwdConfig& cfg);

// Aspect-preserving crop transform: scale = min(dstW/w, dstH/h), scaled box
// centered with symmetric padding. expansion > 1 inflates the detection
// around its center before fitting. Throws ContractError on non-positive
// extents.
PatchTransform make_patch_transform(const Box& det, double frame_w, double frame_h,
                                    double expansion = 1.0,
                                    int dst_width = kPatchWidth,
                                    int dst_height = kPatchHeight);

Point image_to_patch(const PatchTransform& t, const Point& image_pt);

// Exact inverse of image_to_patch. Points outside the patch map linearly.
Point patch_to_image(const PatchTransform& t, const Point& patch_pt);

// Log record for a transform: {src.x, src.y, src.w, src.h, dst_w, dst_h}.
// Scale and padding are recomputed on load, so the record is lossless.
std::array<double, 6> patch_transform_record(const PatchTransform& t);
PatchTransform patch_transform_from_record(const std::array<double, 6>& record);

// Intersection of b with the [0,frame_w] x [0,frame_h] rectangle.
// Zero-extent results are allowed.
Box clip_box(const Box& b, double frame_w, double frame_h);

}  // namespace posekit
