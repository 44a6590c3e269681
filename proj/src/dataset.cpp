#include "posekit/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "posekit/errors.hpp"

namespace posekit {

using Json = nlohmann::ordered_json;

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ValidationError("unknown split tag: '" + s + "' (expected train|val|test)");
}

const ImageRecord* Dataset::find_image(int64_t id) const {
  for (const auto& img : images) {
    if (img.id == id) return &img;
  }
  return nullptr;
}

namespace {

std::string join_ids(const std::vector<int64_t>& ids) {
  std::ostringstream out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out << ", ";
    out << ids[i];
  }
  return out.str();
}

KeypointSet parse_keypoints(const Json& arr, int64_t ann_id) {
  if (!arr.is_array() || arr.size() != static_cast<size_t>(kNumKeypoints) * 3) {
    throw ValidationError("annotation " + std::to_string(ann_id) +
                          ": keypoints must be a flat array of 51 numbers");
  }
  KeypointSet kps;
  for (int i = 0; i < kNumKeypoints; ++i) {
    kps.points[i].x = arr[i * 3].get<double>();
    kps.points[i].y = arr[i * 3 + 1].get<double>();
    const int v = arr[i * 3 + 2].get<int>();
    if (v < 0 || v > 2) {
      throw ValidationError("annotation " + std::to_string(ann_id) +
                            ": keypoint visibility must be 0, 1 or 2 (got " +
                            std::to_string(v) + ")");
    }
    kps.points[i].v = v;
  }
  return kps;
}

void validate(const Dataset& d, const std::string& context) {
  std::unordered_set<int64_t> image_ids;
  std::vector<int64_t> dup_images;
  for (const auto& img : d.images) {
    if (img.width <= 0 || img.height <= 0) {
      throw ValidationError(context + ": image " + std::to_string(img.id) +
                            " has non-positive dimensions");
    }
    if (!image_ids.insert(img.id).second) {
      dup_images.push_back(img.id);
    }
  }
  if (!dup_images.empty()) {
    throw ValidationError(context + ": duplicate image ids: " + join_ids(dup_images));
  }

  std::unordered_set<int64_t> ann_ids;
  std::vector<int64_t> dup_anns, dangling;
  for (const auto& ann : d.annotations) {
    if (!ann_ids.insert(ann.id).second) {
      dup_anns.push_back(ann.id);
    }
    if (!image_ids.count(ann.image_id)) {
      dangling.push_back(ann.image_id);
    }
    if (ann.bbox.w < 0 || ann.bbox.h < 0) {
      throw ValidationError(context + ": annotation " + std::to_string(ann.id) +
                            " has negative box extent");
    }
    if (ann.bbox.w > 0 && ann.bbox.h > 0 && ann.area <= 0) {
      throw ValidationError(context + ": annotation " + std::to_string(ann.id) +
                            " has non-positive area despite positive box extent");
    }
    if (ann.keypoints && ann.num_keypoints != ann.keypoints->visible_count()) {
      throw ValidationError(context + ": annotation " + std::to_string(ann.id) +
                            " num_keypoints=" + std::to_string(ann.num_keypoints) +
                            " does not match labeled keypoint count " +
                            std::to_string(ann.keypoints->visible_count()));
    }
  }
  if (!dup_anns.empty()) {
    throw ValidationError(context + ": duplicate annotation ids: " + join_ids(dup_anns));
  }
  if (!dangling.empty()) {
    throw ValidationError(context + ": annotations reference missing image ids: " +
                          join_ids(dangling));
  }

  std::unordered_set<int64_t> cat_ids;
  for (const auto& cat : d.categories) {
    if (!cat_ids.insert(cat.id).second) {
      throw ValidationError(context + ": duplicate category id " + std::to_string(cat.id));
    }
  }
}

}  // namespace

Dataset load_dataset(const std::string& path, Split split, const std::string& source_label) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open annotation file: " + path);
  }
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    // e.what() carries the byte offset; keep it verbatim.
    throw ParseError(path + ": " + e.what());
  }

  const std::string label =
      source_label.empty() ? std::filesystem::path(path).stem().string() : source_label;

  Dataset d;
  d.split = split;
  try {
    for (const auto& j : doc.value("images", Json::array())) {
      ImageRecord img;
      img.id = j.at("id").get<int64_t>();
      img.file_name = j.at("file_name").get<std::string>();
      img.width = j.at("width").get<int>();
      img.height = j.at("height").get<int>();
      img.source_dataset = j.value("source_dataset", label);
      img.modality = j.value("modality", "");
      d.images.push_back(std::move(img));
    }
    for (const auto& j : doc.value("annotations", Json::array())) {
      AnnRecord ann;
      ann.id = j.at("id").get<int64_t>();
      ann.image_id = j.at("image_id").get<int64_t>();
      ann.category_id = j.at("category_id").get<int64_t>();
      const auto& bb = j.at("bbox");
      if (!bb.is_array() || bb.size() != 4) {
        throw ValidationError("annotation " + std::to_string(ann.id) +
                              ": bbox must be [x, y, w, h]");
      }
      ann.bbox = {bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                  bb[3].get<double>(), std::nullopt};
      ann.area = j.value("area", ann.bbox.w * ann.bbox.h);
      ann.iscrowd = j.value("iscrowd", 0) != 0;
      if (j.contains("keypoints")) {
        ann.keypoints = parse_keypoints(j.at("keypoints"), ann.id);
        ann.num_keypoints = j.value("num_keypoints", ann.keypoints->visible_count());
      }
      d.annotations.push_back(std::move(ann));
    }
    for (const auto& j : doc.value("categories", Json::array())) {
      d.categories.push_back({j.at("id").get<int64_t>(), j.at("name").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }

  validate(d, path);
  return d;
}

void save_dataset(const Dataset& d, const std::string& path) {
  Dataset sorted = d;
  std::sort(sorted.images.begin(), sorted.images.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(sorted.annotations.begin(), sorted.annotations.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });

  Json doc;
  doc["images"] = Json::array();
  for (const auto& img : sorted.images) {
    Json j = {{"id", img.id},
              {"file_name", img.file_name},
              {"width", img.width},
              {"height", img.height},
              {"source_dataset", img.source_dataset}};
    if (!img.modality.empty()) {
      j["modality"] = img.modality;
    }
    doc["images"].push_back(std::move(j));
  }
  doc["annotations"] = Json::array();
  for (const auto& ann : sorted.annotations) {
    Json j = {{"id", ann.id},
              {"image_id", ann.image_id},
              {"category_id", ann.category_id},
              {"bbox", {ann.bbox.x, ann.bbox.y, ann.bbox.w, ann.bbox.h}},
              {"area", ann.area},
              {"iscrowd", ann.iscrowd ? 1 : 0}};
    if (ann.keypoints) {
      Json flat = Json::array();
      for (const auto& p : ann.keypoints->points) {
        flat.push_back(p.x);
        flat.push_back(p.y);
        flat.push_back(p.v);
      }
      j["keypoints"] = std::move(flat);
      j["num_keypoints"] = ann.num_keypoints;
    }
    doc["annotations"].push_back(std::move(j));
  }
  doc["categories"] = Json::array();
  for (const auto& cat : sorted.categories) {
    doc["categories"].push_back({{"id", cat.id}, {"name", cat.name}});
  }

  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write annotation file: " + path);
  }
  out << doc.dump(2) << "\n";
}

Dataset filter_person_classes(const Dataset& d, const std::vector<std::string>& keep_names) {
  if (keep_names.empty()) {
    throw ContractError("filter_person_classes: keep_names must be nonempty");
  }
  std::unordered_set<int64_t> keep_ids;
  for (const auto& cat : d.categories) {
    if (std::find(keep_names.begin(), keep_names.end(), cat.name) != keep_names.end()) {
      keep_ids.insert(cat.id);
    }
  }

  Dataset out;
  out.split = d.split;
  out.images = d.images;
  out.categories = {{1, "person"}};
  for (const auto& ann : d.annotations) {
    if (keep_ids.count(ann.category_id)) {
      AnnRecord kept = ann;
      kept.category_id = 1;
      out.annotations.push_back(std::move(kept));
    }
  }
  return out;
}

MergeResult merge_datasets(const std::vector<Dataset>& parts) {
  if (parts.empty()) {
    throw ContractError("merge_datasets: no parts given");
  }
  for (const auto& p : parts) {
    if (p.split != parts.front().split) {
      throw ContractError("merge_datasets: parts have mixed split tags");
    }
    if (p.categories.size() != 1 || p.categories[0].id != 1 || p.categories[0].name != "person") {
      throw ContractError("merge_datasets: parts must be person-filtered first");
    }
  }

  MergeResult result;
  result.dataset.split = parts.front().split;
  result.dataset.categories = {{1, "person"}};

  int64_t next_image_id = 1;
  int64_t next_ann_id = 1;
  for (const auto& part : parts) {
    std::unordered_map<int64_t, int64_t> image_remap;
    for (const auto& img : part.images) {
      ImageRecord merged = img;
      merged.id = next_image_id++;
      image_remap[img.id] = merged.id;
      result.image_id_map.push_back({img.source_dataset, img.id, merged.id});
      result.dataset.images.push_back(std::move(merged));
    }
    for (const auto& ann : part.annotations) {
      AnnRecord merged = ann;
      merged.id = next_ann_id++;
      merged.image_id = image_remap.at(ann.image_id);
      const auto* img = part.find_image(ann.image_id);
      result.annotation_id_map.push_back(
          {img ? img->source_dataset : "", ann.id, merged.id});
      result.dataset.annotations.push_back(std::move(merged));
    }
  }
  return result;
}

DatasetStats dataset_stats(const Dataset& d) {
  DatasetStats stats;
  stats.images = static_cast<int64_t>(d.images.size());
  stats.annotations = static_cast<int64_t>(d.annotations.size());
  constexpr double kSmallMax = 32.0 * 32.0;
  constexpr double kMediumMax = 96.0 * 96.0;
  for (const auto& ann : d.annotations) {
    if (ann.area < kSmallMax) {
      ++stats.boxes_small;
    } else if (ann.area <= kMediumMax) {
      ++stats.boxes_medium;
    } else {
      ++stats.boxes_large;
    }
    if (ann.keypoints) {
      ++stats.annotations_with_keypoints;
      for (const auto& p : ann.keypoints->points) {
        ++stats.keypoint_visibility[p.v];
      }
    }
  }
  return stats;
}

}  // namespace posekit
