#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xview/synthdata/scene.hpp"

namespace xview::synth {

// Regime constants for the paired scene generator. Ground views hold few,
// large, clustered boxes; aerial views hold many small boxes spread uniformly.
// Every constant is configurable; the defaults reproduce the direction of the
// ground/aerial geometry statistics, not any particular dataset's values.
struct GeneratorConfig {
    double image_size = 256.0;
    std::size_t grid = 16;      // token grid extent per axis
    std::size_t channels = 32;  // d
    std::size_t categories = 10;

    std::size_t ground_count_min = 5, ground_count_max = 15;
    double ground_box_min = 24.0, ground_box_max = 64.0;
    double ground_cluster_sigma = 32.0;

    std::size_t aerial_count_min = 20, aerial_count_max = 60;
    double aerial_box_min = 6.0, aerial_box_max = 20.0;

    // Probability that each shared category slot survives into a view.
    double consistency_rho = 0.8;
    std::size_t category_pool = 5;

    // Feature rendering: per-object Gaussian bump times a category embedding.
    double noise_sigma = 0.02;
    double amp_base = 1.0;
    double amp_slope = 3.0;     // amplitude grows with box size
    double sigma_base = 4.0;    // px
    double sigma_scale = 0.25;  // bump width grows with box size

    void validate() const;
};

// Deterministic per-category embedding table (C, d), unit-norm rows, derived
// from the master seed.
num::Array category_embeddings(const GeneratorConfig& cfg, std::uint64_t master_seed);

// Renders boxes into a token grid: each object adds
// amp(box) * exp(-dist^2 / (2 sigma(box)^2)) * embedding[category] at every
// token center, plus i.i.d. Gaussian noise seeded by `noise_seed`.
cpa::TokenGrid render_features(const std::vector<eval::Box>& boxes,
                               const std::vector<int>& categories, const GeneratorConfig& cfg,
                               const num::Array& embeddings, std::uint64_t noise_seed);

// Noise stream for one (pair, view); part of the determinism contract so a
// loaded dataset re-renders to the generated bytes.
std::uint64_t noise_seed_for(std::uint64_t master_seed, std::int64_t pair_id, View view);

// One synchronized ground/aerial pair. All randomness is derived from
// (master_seed, pair_index), so generation is reproducible per pair.
std::pair<SceneSample, SceneSample> generate_pair(const GeneratorConfig& cfg,
                                                  std::uint64_t master_seed,
                                                  std::uint64_t pair_index);

// The default category names (a 10-entry urban-traffic vocabulary) or
// "category_<i>" when the configured count differs.
std::vector<std::string> category_names(const GeneratorConfig& cfg);

}  // namespace xview::synth
