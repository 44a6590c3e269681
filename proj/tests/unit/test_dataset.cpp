#include <fstream>
#include <set>

#include <doctest.h>

#include "../support/fixtures.hpp"
#include "posekit/dataset.hpp"
#include "posekit/errors.hpp"

using namespace posekit;
namespace ts = posekit::testsupport;

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

const char* kSmallDoc = R"({
  "images": [
    {"id": 1, "file_name": "a.jpg", "width": 640, "height": 480},
    {"id": 2, "file_name": "b.jpg", "width": 640, "height": 480}
  ],
  "annotations": [
    {"id": 1, "image_id": 1, "category_id": 1, "bbox": [10, 10, 20, 40], "area": 800, "iscrowd": 0},
    {"id": 2, "image_id": 1, "category_id": 2, "bbox": [5, 5, 10, 10], "area": 100, "iscrowd": 0},
    {"id": 3, "image_id": 2, "category_id": 1, "bbox": [0, 0, 100, 100], "area": 10000, "iscrowd": 1}
  ],
  "categories": [{"id": 1, "name": "pedestrian"}]
})";

Dataset person_dataset(int images, int annotations, const std::string& label) {
  Dataset d;
  d.split = Split::kTrain;
  d.categories = {{1, "person"}};
  for (int i = 0; i < images; ++i) {
    d.images.push_back({i + 1, "img" + std::to_string(i) + "_" + label + ".jpg", 640, 480,
                        label, ""});
  }
  for (int i = 0; i < annotations; ++i) {
    AnnRecord ann;
    ann.id = i + 1;
    ann.image_id = (i % images) + 1;
    ann.category_id = 1;
    ann.bbox = {10.0 * i, 5.0, 20, 30, std::nullopt};
    ann.area = 600;
    d.annotations.push_back(ann);
  }
  return d;
}

}  // namespace

TEST_CASE("load_dataset counts mirror the document") {
  const auto dir = ts::scratch_dir("load");
  write_file(dir / "small.json", kSmallDoc);
  const Dataset d = load_dataset((dir / "small.json").string(), Split::kTrain);
  CHECK(d.images.size() == 2);
  CHECK(d.annotations.size() == 3);
  CHECK(d.categories.size() == 1);
  CHECK(d.images[0].source_dataset == "small");
  CHECK(d.annotations[2].iscrowd);
}

TEST_CASE("load_dataset rejects dangling references, naming the ids") {
  const auto dir = ts::scratch_dir("dangling");
  write_file(dir / "bad.json", R"({
    "images": [{"id": 1, "file_name": "a.jpg", "width": 10, "height": 10}],
    "annotations": [{"id": 7, "image_id": 99, "category_id": 1, "bbox": [0,0,5,5], "area": 25}],
    "categories": [{"id": 1, "name": "person"}]
  })");
  try {
    load_dataset((dir / "bad.json").string(), Split::kTrain);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("99") != std::string::npos);
  }
}

TEST_CASE("load_dataset reports parse location on malformed input") {
  const auto dir = ts::scratch_dir("malformed");
  write_file(dir / "broken.json", "{\"images\": [ nope");
  try {
    load_dataset((dir / "broken.json").string(), Split::kTrain);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    // The parser's location info (line/column or byte offset) must survive
    // into the message, along with the file name.
    const std::string msg = e.what();
    CHECK((msg.find("line") != std::string::npos || msg.find("byte") != std::string::npos));
    CHECK(msg.find("broken.json") != std::string::npos);
  }
}

TEST_CASE("load_dataset rejects duplicate ids and bad dimensions") {
  const auto dir = ts::scratch_dir("dupes");
  write_file(dir / "dup.json", R"({
    "images": [{"id": 1, "file_name": "a.jpg", "width": 10, "height": 10},
               {"id": 1, "file_name": "b.jpg", "width": 10, "height": 10}],
    "annotations": [], "categories": []
  })");
  CHECK_THROWS_AS(load_dataset((dir / "dup.json").string(), Split::kTrain), ValidationError);

  write_file(dir / "dim.json", R"({
    "images": [{"id": 1, "file_name": "a.jpg", "width": 0, "height": 10}],
    "annotations": [], "categories": []
  })");
  CHECK_THROWS_AS(load_dataset((dir / "dim.json").string(), Split::kTrain), ValidationError);

  write_file(dir / "numkp.json", R"({
    "images": [{"id": 1, "file_name": "a.jpg", "width": 100, "height": 100}],
    "annotations": [{"id": 1, "image_id": 1, "category_id": 1, "bbox": [0,0,5,5], "area": 25,
      "keypoints": [1,1,2, 0,0,0, 0,0,0, 0,0,0, 0,0,0, 0,0,0, 0,0,0, 0,0,0, 0,0,0,
                    0,0,0, 0,0,0, 0,0,0, 0,0,0, 0,0,0, 0,0,0, 0,0,0, 0,0,0],
      "num_keypoints": 5}],
    "categories": [{"id": 1, "name": "person"}]
  })");
  CHECK_THROWS_AS(load_dataset((dir / "numkp.json").string(), Split::kTrain), ValidationError);
}

TEST_CASE("filter_person_classes remaps and drops") {
  const auto dir = ts::scratch_dir("filter");
  write_file(dir / "multi.json", R"({
    "images": [{"id": 1, "file_name": "a.jpg", "width": 640, "height": 480}],
    "annotations": [
      {"id": 1, "image_id": 1, "category_id": 1, "bbox": [0,0,10,10], "area": 100},
      {"id": 2, "image_id": 1, "category_id": 2, "bbox": [0,0,10,10], "area": 100},
      {"id": 3, "image_id": 1, "category_id": 3, "bbox": [0,0,10,10], "area": 100}
    ],
    "categories": [{"id": 1, "name": "pedestrian"}, {"id": 2, "name": "person"},
                   {"id": 3, "name": "car"}]
  })");
  const Dataset d = load_dataset((dir / "multi.json").string(), Split::kTrain);

  SUBCASE("keep pedestrian and person") {
    const Dataset f = filter_person_classes(d, {"pedestrian", "person"});
    CHECK(f.annotations.size() == 2);
    for (const auto& ann : f.annotations) {
      CHECK(ann.category_id == 1);
    }
    REQUIRE(f.categories.size() == 1);
    CHECK(f.categories[0].id == 1);
    CHECK(f.categories[0].name == "person");
    CHECK(f.images.size() == 1);
  }

  SUBCASE("keep list matching nothing empties annotations, keeps images") {
    const Dataset f = filter_person_classes(d, {"bicycle"});
    CHECK(f.annotations.empty());
    CHECK(f.images.size() == 1);
  }

  SUBCASE("keep-all on single-class input is identity on annotation count") {
    const Dataset once = filter_person_classes(d, {"pedestrian", "person", "car"});
    CHECK(once.annotations.size() == d.annotations.size());
  }

  SUBCASE("idempotent when the keep list covers the person class") {
    const Dataset once = filter_person_classes(d, {"pedestrian", "person"});
    const Dataset twice = filter_person_classes(once, {"pedestrian", "person"});
    CHECK(twice.annotations.size() == once.annotations.size());
    CHECK(twice.images.size() == once.images.size());
    for (size_t i = 0; i < once.annotations.size(); ++i) {
      CHECK(twice.annotations[i].id == once.annotations[i].id);
      CHECK(twice.annotations[i].bbox.x == once.annotations[i].bbox.x);
    }
  }

  SUBCASE("empty keep list is a contract violation") {
    CHECK_THROWS_AS(filter_person_classes(d, {}), ContractError);
  }
}

TEST_CASE("merge conserves counts and keeps references intact") {
  const Dataset a = person_dataset(3, 5, "alpha");
  const Dataset b = person_dataset(4, 2, "beta");
  const MergeResult merged = merge_datasets({a, b});

  CHECK(merged.dataset.images.size() == 7);
  CHECK(merged.dataset.annotations.size() == 7);
  CHECK(merged.image_id_map.size() == 7);
  CHECK(merged.annotation_id_map.size() == 7);

  // Referential integrity and dense ids from 1.
  std::set<int64_t> image_ids;
  for (const auto& img : merged.dataset.images) image_ids.insert(img.id);
  CHECK(*image_ids.begin() == 1);
  CHECK(*image_ids.rbegin() == 7);
  for (const auto& ann : merged.dataset.annotations) {
    CHECK(image_ids.count(ann.image_id) == 1);
  }
}

TEST_CASE("merge with colliding raw ids keeps annotations on their images") {
  // Both parts use image id 1; after merging, each annotation must still
  // point at the image with its original file name.
  const Dataset a = person_dataset(1, 1, "alpha");
  const Dataset b = person_dataset(1, 1, "beta");
  const MergeResult merged = merge_datasets({a, b});
  REQUIRE(merged.dataset.images.size() == 2);
  CHECK(merged.dataset.images[0].id != merged.dataset.images[1].id);
  for (const auto& ann : merged.dataset.annotations) {
    const ImageRecord* img = merged.dataset.find_image(ann.image_id);
    REQUIRE(img != nullptr);
    // alpha's annotation resolves to alpha's image, beta's to beta's
    const std::string& src = img->source_dataset;
    bool found = false;
    const Dataset& origin = src == "alpha" ? a : b;
    for (const auto& orig : origin.annotations) {
      if (orig.bbox.x == ann.bbox.x && orig.bbox.y == ann.bbox.y) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("merging a dataset with itself duplicates every record") {
  const Dataset a = person_dataset(2, 3, "alpha");
  const MergeResult merged = merge_datasets({a, a});
  CHECK(merged.dataset.images.size() == 4);
  CHECK(merged.dataset.annotations.size() == 6);
  std::set<int64_t> ids;
  for (const auto& ann : merged.dataset.annotations) ids.insert(ann.id);
  CHECK(ids.size() == 6);
}

TEST_CASE("merge rejects mixed splits and unfiltered parts") {
  Dataset a = person_dataset(1, 1, "alpha");
  Dataset b = person_dataset(1, 1, "beta");
  b.split = Split::kVal;
  CHECK_THROWS_AS(merge_datasets({a, b}), ContractError);

  Dataset c = person_dataset(1, 1, "gamma");
  c.categories.push_back({2, "car"});
  CHECK_THROWS_AS(merge_datasets({a, c}), ContractError);
}

TEST_CASE("save/load round trip is structurally identity") {
  Rng rng(2024);
  ts::InstanceOptions opts;
  opts.keypoints = true;
  const auto instance = ts::random_eval_instance(rng, opts);
  const auto dir = ts::scratch_dir("roundtrip");

  save_dataset(instance.dataset, (dir / "out.json").string());
  const Dataset back = load_dataset((dir / "out.json").string(), Split::kTest);

  REQUIRE(back.images.size() == instance.dataset.images.size());
  REQUIRE(back.annotations.size() == instance.dataset.annotations.size());
  for (size_t i = 0; i < back.annotations.size(); ++i) {
    const AnnRecord& x = back.annotations[i];
    const AnnRecord& y = instance.dataset.annotations[i];
    CHECK(x.id == y.id);
    CHECK(x.image_id == y.image_id);
    CHECK(x.bbox.x == doctest::Approx(y.bbox.x).epsilon(1e-12));
    CHECK(x.area == doctest::Approx(y.area).epsilon(1e-12));
    CHECK(x.iscrowd == y.iscrowd);
    CHECK(x.keypoints.has_value() == y.keypoints.has_value());
    if (x.keypoints) {
      for (int k = 0; k < kNumKeypoints; ++k) {
        CHECK(x.keypoints->points[k].x == doctest::Approx(y.keypoints->points[k].x));
        CHECK(x.keypoints->points[k].v == y.keypoints->points[k].v);
      }
    }
  }

  // Serialize again; the bytes must be stable.
  save_dataset(back, (dir / "again.json").string());
  std::ifstream f1(dir / "out.json"), f2(dir / "again.json");
  const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
}

TEST_CASE("dataset_stats") {
  SUBCASE("empty dataset") {
    Dataset d;
    const DatasetStats s = dataset_stats(d);
    CHECK(s.images == 0);
    CHECK(s.annotations == 0);
    CHECK(s.boxes_small == 0);
  }
  SUBCASE("single small annotation") {
    Dataset d = person_dataset(1, 1, "x");
    d.annotations[0].area = 100;
    const DatasetStats s = dataset_stats(d);
    CHECK(s.boxes_small == 1);
    CHECK(s.boxes_medium == 0);
    CHECK(s.boxes_large == 0);
  }
  SUBCASE("range boundaries follow the evaluator cutoffs") {
    Dataset d = person_dataset(1, 3, "x");
    d.annotations[0].area = 32.0 * 32.0 - 1;  // small
    d.annotations[1].area = 32.0 * 32.0;      // medium (inclusive low edge)
    d.annotations[2].area = 96.0 * 96.0 + 1;  // large
    const DatasetStats s = dataset_stats(d);
    CHECK(s.boxes_small == 1);
    CHECK(s.boxes_medium == 1);
    CHECK(s.boxes_large == 1);
  }
}

TEST_CASE("synthetic dataset at the published scale") {
  // 104 images with 193 person annotations, matching the reference corpus
  // shape used throughout the docs.
  Dataset d;
  d.split = Split::kTest;
  d.categories = {{1, "person"}};
  int64_t ann_id = 1;
  for (int i = 0; i < 104; ++i) {
    d.images.push_back({i + 1, "aerial_" + std::to_string(i) + ".jpg", 1920, 1080, "ref", ""});
  }
  Rng rng(104);
  while (ann_id <= 193) {
    AnnRecord ann;
    ann.id = ann_id++;
    ann.image_id = rng.uniform_int(1, 104);
    ann.category_id = 1;
    ann.bbox = {rng.uniform(0, 1800), rng.uniform(0, 1000), 40, 80, std::nullopt};
    ann.area = 3200;
    d.annotations.push_back(ann);
  }
  const auto dir = ts::scratch_dir("scale");
  save_dataset(d, (dir / "ref.json").string());
  const Dataset back = load_dataset((dir / "ref.json").string(), Split::kTest);
  CHECK(back.images.size() == 104);
  CHECK(back.annotations.size() == 193);
  const DatasetStats s = dataset_stats(back);
  CHECK(s.images == 104);
  CHECK(s.annotations == 193);
}
