#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xview/synthdata/coco.hpp"
#include "xview/synthdata/generator.hpp"

namespace xview::synth {

struct SplitCounts {
    std::size_t train = 400;
    std::size_t val = 50;
    std::size_t test = 150;
};

// On-disk dataset: train/val/test COCO files plus manifest.json recording the
// generator config, master seed, and split sizes. Pair indices are allocated
// contiguously across splits so the per-pair seed streams never collide.
struct DatasetDir {
    GeneratorConfig config;
    std::uint64_t master_seed = 0;
    SplitCounts counts;
    std::vector<SceneSample> train;
    std::vector<SceneSample> val;
    std::vector<SceneSample> test;
};

void write_dataset_dir(const std::filesystem::path& dir, const GeneratorConfig& cfg,
                       std::uint64_t master_seed, const SplitCounts& counts, bool force);

// Loads the manifest and the three COCO splits, re-rendering every sample's
// features from its boxes and the per-pair noise stream.
DatasetDir load_dataset_dir(const std::filesystem::path& dir);

// Renders features for samples loaded from COCO (e.g. external data) using
// the given config and master seed.
void render_split(std::vector<SceneSample>& samples, const GeneratorConfig& cfg,
                  std::uint64_t master_seed);

}  // namespace xview::synth
