#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "posekit/geometry.hpp"
#include "posekit/keypoints.hpp"

namespace posekit {

enum class Split { kTrain, kVal, kTest };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct ImageRecord {
  int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  std::string source_dataset;
  std::string modality;  // optional free-text tag, e.g. "rgb" / "thermal"
};

struct AnnRecord {
  int64_t id = 0;
  int64_t image_id = 0;
  int64_t category_id = 0;
  Box bbox;
  double area = 0.0;
  std::optional<KeypointSet> keypoints;
  int num_keypoints = 0;
  bool iscrowd = false;
};

struct Category {
  int64_t id = 0;
  std::string name;
};

struct Dataset {
  std::vector<ImageRecord> images;
  std::vector<AnnRecord> annotations;
  std::vector<Category> categories;
  Split split = Split::kTrain;

  const ImageRecord* find_image(int64_t id) const;
};

// Parses and validates a COCO-style annotation document. source_label tags
// every image's provenance; the file stem is used when empty.
// Throws ParseError (with byte location) on malformed documents and
// ValidationError (listing offending ids) on broken references.
Dataset load_dataset(const std::string& path, Split split, const std::string& source_label = "");

// Writes the same schema back out, records ordered by id. load -> save ->
// load is structurally identity.
void save_dataset(const Dataset& d, const std::string& path);

// Keeps annotations whose category name is in keep_names, remapped to the
// single category (1, "person"). Images survive even with zero annotations.
Dataset filter_person_classes(const Dataset& d, const std::vector<std::string>& keep_names);

struct IdMapEntry {
  std::string source_dataset;
  int64_t source_id = 0;
  int64_t merged_id = 0;
};

struct MergeResult {
  Dataset dataset;
  std::vector<IdMapEntry> image_id_map;
  std::vector<IdMapEntry> annotation_id_map;
};

// Concatenates person-filtered parts of one split; ids densely renumbered
// from 1 in input order, provenance preserved in the id maps.
// Throws ContractError on mixed splits or unfiltered parts.
MergeResult merge_datasets(const std::vector<Dataset>& parts);

struct DatasetStats {
  int64_t images = 0;
  int64_t annotations = 0;
  // Box-size histogram over the COCO area ranges.
  int64_t boxes_small = 0;   // area < 32^2
  int64_t boxes_medium = 0;  // 32^2 <= area <= 96^2
  int64_t boxes_large = 0;   // area > 96^2
  // Keypoint visibility histogram, indexed by v.
  std::array<int64_t, 3> keypoint_visibility{};
  int64_t annotations_with_keypoints = 0;
};

DatasetStats dataset_stats(const Dataset& d);

}  // namespace posekit
