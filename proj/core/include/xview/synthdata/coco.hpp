#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xview/synthdata/scene.hpp"

namespace xview::synth {

// Standard COCO detection layout. Category ids are 1-based on disk (COCO
// convention) and map to the 0-based internal ids. View and pair id travel in
// the file name: "pair<NNNNNN>_<ground|aerial>.png".
struct CocoImage {
    std::int64_t id = 0;
    std::string file_name;
    double width = 0.0;
    double height = 0.0;
};

struct CocoAnnotation {
    std::int64_t id = 0;
    std::int64_t image_id = 0;
    int category_id = 0;
    double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
};

struct CocoCategory {
    int id = 0;
    std::string name;
};

struct CocoDocument {
    std::vector<CocoImage> images;
    std::vector<CocoAnnotation> annotations;
    std::vector<CocoCategory> categories;
};

std::string pair_file_name(std::int64_t pair_id, View view);
// Throws std::invalid_argument when the name does not follow the convention.
void parse_pair_file_name(const std::string& name, std::int64_t& pair_id, View& view);

CocoDocument to_coco(const std::vector<SceneSample>& samples,
                     const std::vector<std::string>& category_names);
// Validates references; errors list every dangling image/category id.
std::vector<SceneSample> from_coco(const CocoDocument& doc);

// Deterministic serialization (fixed key order, 2-space indent).
void save_coco(const std::vector<SceneSample>& samples,
               const std::vector<std::string>& category_names,
               const std::filesystem::path& path);
// Parses and validates; loaded samples carry boxes/categories/view/pair id
// but no features (render or supply them separately).
std::vector<SceneSample> load_coco(const std::filesystem::path& path);

}  // namespace xview::synth
