#pragma once

#include <string>

#include "posekit/image.hpp"
#include "posekit/pipeline.hpp"

namespace posekit {

struct OverlayStyle {
  Color box_color{200, 0, 0};
  Color limb_color{0, 200, 0};
  Color visible_color{255, 200, 0};
  Color invisible_color{255, 0, 0};  // occluded/low-confidence points in red
  int box_thickness = 2;
  int limb_thickness = 2;
  int marker_radius = 3;
};

// Boxes, limbs between mutually visible keypoints, and one marker per
// keypoint (invisible style for v = 0). Zero persons leave the image
// untouched.
ImageU8 render_overlay_image(const ImageU8& frame, const std::vector<PersonPose>& persons,
                             const OverlayStyle& style = {});

// Renders and writes a lossless PPM. Throws IoError on unwritable paths and
// ContractError when the result does not belong to the frame.
void render_overlay(const Frame& frame, const PoseResult& result, const std::string& out_path,
                    const OverlayStyle& style = {});

}  // namespace posekit
