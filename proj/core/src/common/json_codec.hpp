#pragma once

// Internal JSON codecs shared by the dataset manifest, the CLI config loader,
// and the run records. 'j.value(key, default)' keeps older files readable
// when optional knobs are absent.

#include <string>

#include "json.hpp"
#include "xview/detector/train.hpp"
#include "xview/synthdata/dataset.hpp"

namespace xview::codec {

using ordered_json = nlohmann::ordered_json;

ordered_json train_config_to_json(const det::TrainConfig& c);
det::TrainConfig train_config_from_json(const ordered_json& j);

inline ordered_json generator_config_to_json(const synth::GeneratorConfig& c) {
    ordered_json j;
    j["image_size"] = c.image_size;
    j["grid"] = c.grid;
    j["channels"] = c.channels;
    j["categories"] = c.categories;
    j["ground_count"] = {c.ground_count_min, c.ground_count_max};
    j["ground_box"] = {c.ground_box_min, c.ground_box_max};
    j["ground_cluster_sigma"] = c.ground_cluster_sigma;
    j["aerial_count"] = {c.aerial_count_min, c.aerial_count_max};
    j["aerial_box"] = {c.aerial_box_min, c.aerial_box_max};
    j["consistency_rho"] = c.consistency_rho;
    j["category_pool"] = c.category_pool;
    j["noise_sigma"] = c.noise_sigma;
    j["amp_base"] = c.amp_base;
    j["amp_slope"] = c.amp_slope;
    j["sigma_base"] = c.sigma_base;
    j["sigma_scale"] = c.sigma_scale;
    return j;
}

inline synth::GeneratorConfig generator_config_from_json(const ordered_json& j) {
    synth::GeneratorConfig c;
    c.image_size = j.value("image_size", c.image_size);
    c.grid = j.value("grid", c.grid);
    c.channels = j.value("channels", c.channels);
    c.categories = j.value("categories", c.categories);
    if (j.contains("ground_count")) {
        c.ground_count_min = j["ground_count"][0].get<std::size_t>();
        c.ground_count_max = j["ground_count"][1].get<std::size_t>();
    }
    if (j.contains("ground_box")) {
        c.ground_box_min = j["ground_box"][0].get<double>();
        c.ground_box_max = j["ground_box"][1].get<double>();
    }
    c.ground_cluster_sigma = j.value("ground_cluster_sigma", c.ground_cluster_sigma);
    if (j.contains("aerial_count")) {
        c.aerial_count_min = j["aerial_count"][0].get<std::size_t>();
        c.aerial_count_max = j["aerial_count"][1].get<std::size_t>();
    }
    if (j.contains("aerial_box")) {
        c.aerial_box_min = j["aerial_box"][0].get<double>();
        c.aerial_box_max = j["aerial_box"][1].get<double>();
    }
    c.consistency_rho = j.value("consistency_rho", c.consistency_rho);
    c.category_pool = j.value("category_pool", c.category_pool);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.amp_base = j.value("amp_base", c.amp_base);
    c.amp_slope = j.value("amp_slope", c.amp_slope);
    c.sigma_base = j.value("sigma_base", c.sigma_base);
    c.sigma_scale = j.value("sigma_scale", c.sigma_scale);
    return c;
}

inline ordered_json split_counts_to_json(const synth::SplitCounts& s) {
    ordered_json j;
    j["train"] = s.train;
    j["val"] = s.val;
    j["test"] = s.test;
    return j;
}

inline synth::SplitCounts split_counts_from_json(const ordered_json& j) {
    synth::SplitCounts s;
    s.train = j.value("train", s.train);
    s.val = j.value("val", s.val);
    s.test = j.value("test", s.test);
    return s;
}

}  // namespace xview::codec
