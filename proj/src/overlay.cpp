#include "posekit/overlay.hpp"

#include <cmath>

#include "posekit/errors.hpp"

namespace posekit {

ImageU8 render_overlay_image(const ImageU8& frame, const std::vector<PersonPose>& persons,
                             const OverlayStyle& style) {
  ImageU8 out = frame;
  for (const auto& person : persons) {
    draw_rect(out, static_cast<int>(std::lround(person.box.x)),
              static_cast<int>(std::lround(person.box.y)),
              static_cast<int>(std::lround(person.box.x2())),
              static_cast<int>(std::lround(person.box.y2())), style.box_color,
              style.box_thickness);
    const auto& kps = person.keypoints;
    for (const auto& [a, b] : kSkeleton) {
      if (kps.points[a].v > 0 && kps.points[b].v > 0) {
        draw_line(out, static_cast<int>(std::lround(kps.points[a].x)),
                  static_cast<int>(std::lround(kps.points[a].y)),
                  static_cast<int>(std::lround(kps.points[b].x)),
                  static_cast<int>(std::lround(kps.points[b].y)), style.limb_color,
                  style.limb_thickness);
      }
    }
    for (const auto& p : kps.points) {
      draw_disc(out, static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)),
                style.marker_radius, p.v > 0 ? style.visible_color : style.invisible_color);
    }
  }
  return out;
}

void render_overlay(const Frame& frame, const PoseResult& result, const std::string& out_path,
                    const OverlayStyle& style) {
  if (result.frame_id != frame.id) {
    throw ContractError("render_overlay: result frame id " + std::to_string(result.frame_id) +
                        " does not match frame " + std::to_string(frame.id));
  }
  write_ppm(render_overlay_image(frame.image, result.persons, style), out_path);
}

}  // namespace posekit
