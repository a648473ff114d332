#include "xview/synthdata/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xview::synth {

using num::Array;
using num::Rng;

namespace {

// Seed-derivation stream tags; part of the determinism contract.
constexpr std::uint64_t kCategoryStream = 0xC0DE;
constexpr std::uint64_t kPairStream = 0xFA1B;
constexpr std::uint64_t kNoiseStream = 0x9015E;

double clamp_center(double c, double half, double size) {
    return std::clamp(c, half, size - half);
}

}  // namespace

const char* view_name(View v) { return v == View::ground ? "ground" : "aerial"; }

View parse_view(const std::string& name) {
    if (name == "ground") return View::ground;
    if (name == "aerial") return View::aerial;
    throw std::invalid_argument("unknown view: " + name);
}

void SceneSample::validate() const {
    if (boxes.size() != categories.size()) {
        throw std::invalid_argument("SceneSample: boxes/categories length mismatch");
    }
    for (const auto& b : boxes) {
        if (b.w <= 0.0 || b.h <= 0.0) throw std::invalid_argument("SceneSample: non-positive box");
        if (b.x < 0.0 || b.y < 0.0 || b.x + b.w > image_w || b.y + b.h > image_h) {
            throw std::invalid_argument("SceneSample: box outside image extent");
        }
    }
    if (features.tokens.size() > 0) features.validate();
}

std::vector<eval::GroundTruth> SceneSample::truths() const {
    std::vector<eval::GroundTruth> out;
    out.reserve(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) out.push_back({boxes[i], categories[i]});
    return out;
}

PairedDataset build_paired(std::vector<SceneSample> samples) {
    PairedDataset out;
    out.flat = std::move(samples);
    std::vector<std::pair<std::int64_t, std::size_t>> order;
    for (std::size_t i = 0; i < out.flat.size(); ++i) order.emplace_back(out.flat[i].pair_id, i);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < order.size();) {
        const std::int64_t id = order[i].first;
        std::size_t j = i;
        while (j < order.size() && order[j].first == id) ++j;
        if (j - i != 2) {
            throw std::invalid_argument("build_paired: pair id " + std::to_string(id) +
                                        " has " + std::to_string(j - i) + " members, want 2");
        }
        std::size_t a = order[i].second, b = order[i + 1].second;
        if (out.flat[a].view == out.flat[b].view) {
            throw std::invalid_argument("build_paired: pair id " + std::to_string(id) +
                                        " members share the same view");
        }
        if (out.flat[a].view == View::aerial) std::swap(a, b);
        out.pairs.emplace_back(a, b);
        i = j;
    }
    return out;
}

void GeneratorConfig::validate() const {
    if (image_size <= 0 || grid == 0 || channels == 0 || categories == 0) {
        throw std::invalid_argument("GeneratorConfig: non-positive extents");
    }
    if (ground_count_min > ground_count_max || aerial_count_min > aerial_count_max ||
        ground_count_min == 0 || aerial_count_min == 0) {
        throw std::invalid_argument("GeneratorConfig: empty count range");
    }
    if (ground_box_min <= 0 || ground_box_min > ground_box_max || aerial_box_min <= 0 ||
        aerial_box_min > aerial_box_max) {
        throw std::invalid_argument("GeneratorConfig: empty box range");
    }
    if (ground_box_max > image_size || aerial_box_max > image_size) {
        throw std::invalid_argument("GeneratorConfig: boxes larger than image");
    }
    if (consistency_rho < 0.0 || consistency_rho > 1.0) {
        throw std::invalid_argument("GeneratorConfig: rho outside [0,1]");
    }
    if (category_pool == 0) throw std::invalid_argument("GeneratorConfig: empty category pool");
    if (noise_sigma < 0.0) throw std::invalid_argument("GeneratorConfig: negative noise");
}

std::uint64_t noise_seed_for(std::uint64_t master_seed, std::int64_t pair_id, View view) {
    return num::derive_seed(master_seed, {kNoiseStream, static_cast<std::uint64_t>(pair_id),
                                          view == View::ground ? 0ull : 1ull});
}

Array category_embeddings(const GeneratorConfig& cfg, std::uint64_t master_seed) {
    Rng rng(num::derive_seed(master_seed, {kCategoryStream}));
    Array table({cfg.categories, cfg.channels});
    for (std::size_t c = 0; c < cfg.categories; ++c) {
        double norm2 = 0.0;
        for (std::size_t j = 0; j < cfg.channels; ++j) {
            const double v = rng.normal();
            table[c * cfg.channels + j] = v;
            norm2 += v * v;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t j = 0; j < cfg.channels; ++j) table[c * cfg.channels + j] *= inv;
    }
    return table;
}

cpa::TokenGrid render_features(const std::vector<eval::Box>& boxes,
                               const std::vector<int>& categories, const GeneratorConfig& cfg,
                               const Array& embeddings, std::uint64_t noise_seed) {
    if (boxes.size() != categories.size()) {
        throw std::invalid_argument("render_features: boxes/categories length mismatch");
    }
    const std::size_t g = cfg.grid, d = cfg.channels;
    const double cell = cfg.image_size / static_cast<double>(g);
    cpa::TokenGrid grid;
    grid.grid_h = g;
    grid.grid_w = g;
    grid.tokens = Array({g * g, d});

    for (std::size_t o = 0; o < boxes.size(); ++o) {
        const auto& b = boxes[o];
        const int cat = categories[o];
        if (cat < 0 || static_cast<std::size_t>(cat) >= cfg.categories) {
            throw std::invalid_argument("render_features: category id out of range");
        }
        const double mean_side = 0.5 * (b.w + b.h);
        const double amp = cfg.amp_base + cfg.amp_slope * mean_side / cfg.image_size;
        const double sigma = cfg.sigma_base + cfg.sigma_scale * mean_side;
        const double cx = b.x + 0.5 * b.w;
        const double cy = b.y + 0.5 * b.h;
        const double* emb = embeddings.data() + static_cast<std::size_t>(cat) * d;
        for (std::size_t r = 0; r < g; ++r) {
            const double ty = (static_cast<double>(r) + 0.5) * cell;
            for (std::size_t c = 0; c < g; ++c) {
                const double tx = (static_cast<double>(c) + 0.5) * cell;
                const double dist2 = (tx - cx) * (tx - cx) + (ty - cy) * (ty - cy);
                const double bump = amp * std::exp(-dist2 / (2.0 * sigma * sigma));
                if (bump < 1e-12) continue;
                double* tok = grid.tokens.data() + (r * g + c) * d;
                for (std::size_t j = 0; j < d; ++j) tok[j] += bump * emb[j];
            }
        }
    }

    if (cfg.noise_sigma > 0.0) {
        Rng noise(noise_seed);
        for (std::size_t i = 0; i < grid.tokens.size(); ++i) {
            grid.tokens[i] += noise.normal(0.0, cfg.noise_sigma);
        }
    }
    grid.tokens.check_finite("render_features");
    return grid;
}

std::pair<SceneSample, SceneSample> generate_pair(const GeneratorConfig& cfg,
                                                  std::uint64_t master_seed,
                                                  std::uint64_t pair_index) {
    cfg.validate();
    Rng rng(num::derive_seed(master_seed, {kPairStream, pair_index}));

    // Shared category pool for the location.
    std::vector<int> pool(cfg.category_pool);
    for (auto& c : pool) c = static_cast<int>(rng.uniform_int(cfg.categories));

    auto view_categories = [&](std::size_t count) {
        std::vector<int> view_pool = pool;
        for (auto& c : view_pool) {
            if (rng.uniform() >= cfg.consistency_rho) {
                c = static_cast<int>(rng.uniform_int(cfg.categories));
            }
        }
        std::vector<int> cats(count);
        for (std::size_t i = 0; i < count; ++i) cats[i] = view_pool[i % view_pool.size()];
        return cats;
    };

    SceneSample ground;
    ground.view = View::ground;
    ground.pair_id = static_cast<std::int64_t>(pair_index);
    ground.image_w = ground.image_h = cfg.image_size;
    {
        const std::size_t count =
            cfg.ground_count_min + rng.uniform_int(cfg.ground_count_max - cfg.ground_count_min + 1);
        ground.categories = view_categories(count);
        const double ccx = rng.uniform(0.25 * cfg.image_size, 0.75 * cfg.image_size);
        const double ccy = rng.uniform(0.25 * cfg.image_size, 0.75 * cfg.image_size);
        for (std::size_t i = 0; i < count; ++i) {
            const double w = rng.uniform(cfg.ground_box_min, cfg.ground_box_max);
            const double h = rng.uniform(cfg.ground_box_min, cfg.ground_box_max);
            const double cx =
                clamp_center(rng.normal(ccx, cfg.ground_cluster_sigma), w / 2, cfg.image_size);
            const double cy =
                clamp_center(rng.normal(ccy, cfg.ground_cluster_sigma), h / 2, cfg.image_size);
            ground.boxes.push_back({cx - w / 2, cy - h / 2, w, h});
        }
    }

    SceneSample aerial;
    aerial.view = View::aerial;
    aerial.pair_id = static_cast<std::int64_t>(pair_index);
    aerial.image_w = aerial.image_h = cfg.image_size;
    {
        const std::size_t count =
            cfg.aerial_count_min + rng.uniform_int(cfg.aerial_count_max - cfg.aerial_count_min + 1);
        aerial.categories = view_categories(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double w = rng.uniform(cfg.aerial_box_min, cfg.aerial_box_max);
            const double h = rng.uniform(cfg.aerial_box_min, cfg.aerial_box_max);
            const double cx = rng.uniform(w / 2, cfg.image_size - w / 2);
            const double cy = rng.uniform(h / 2, cfg.image_size - h / 2);
            aerial.boxes.push_back({cx - w / 2, cy - h / 2, w, h});
        }
    }

    const Array embeddings = category_embeddings(cfg, master_seed);
    ground.features =
        render_features(ground.boxes, ground.categories, cfg, embeddings,
                        noise_seed_for(master_seed, ground.pair_id, View::ground));
    aerial.features =
        render_features(aerial.boxes, aerial.categories, cfg, embeddings,
                        noise_seed_for(master_seed, aerial.pair_id, View::aerial));

    ground.validate();
    aerial.validate();
    return {std::move(ground), std::move(aerial)};
}

std::vector<std::string> category_names(const GeneratorConfig& cfg) {
    static const std::vector<std::string> kDefault = {
        "tram", "bicycle", "van",   "truck",       "bus",
        "person", "car",     "other", "streetlight", "traffic light"};
    if (cfg.categories == kDefault.size()) return kDefault;
    std::vector<std::string> names;
    names.reserve(cfg.categories);
    for (std::size_t i = 0; i < cfg.categories; ++i) names.push_back("category_" + std::to_string(i));
    return names;
}

}  // namespace xview::synth
