#include "xview/synthdata/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include "common/json_codec.hpp"

namespace xview::synth {

using codec::ordered_json;

namespace {

constexpr int kManifestVersion = 1;

std::vector<SceneSample> generate_split(const GeneratorConfig& cfg, std::uint64_t master_seed,
                                        std::uint64_t first_pair, std::size_t pair_count) {
    std::vector<SceneSample> samples;
    samples.reserve(2 * pair_count);
    for (std::size_t i = 0; i < pair_count; ++i) {
        auto [ground, aerial] = generate_pair(cfg, master_seed, first_pair + i);
        samples.push_back(std::move(ground));
        samples.push_back(std::move(aerial));
    }
    return samples;
}

}  // namespace

void write_dataset_dir(const std::filesystem::path& dir, const GeneratorConfig& cfg,
                       std::uint64_t master_seed, const SplitCounts& counts, bool force) {
    cfg.validate();
    if (counts.train == 0 || counts.val == 0 || counts.test == 0) {
        throw std::invalid_argument("write_dataset_dir: every split needs at least one pair");
    }
    if (std::filesystem::exists(dir) && !std::filesystem::is_empty(dir) && !force) {
        throw std::runtime_error("write_dataset_dir: " + dir.string() +
                                 " exists and is not empty (use force to overwrite)");
    }
    std::filesystem::create_directories(dir);

    const auto names = category_names(cfg);
    const std::uint64_t val_first = counts.train;
    const std::uint64_t test_first = counts.train + counts.val;
    save_coco(generate_split(cfg, master_seed, 0, counts.train), names, dir / "train.json");
    save_coco(generate_split(cfg, master_seed, val_first, counts.val), names, dir / "val.json");
    save_coco(generate_split(cfg, master_seed, test_first, counts.test), names, dir / "test.json");

    ordered_json manifest;
    manifest["format_version"] = kManifestVersion;
    manifest["master_seed"] = master_seed;
    manifest["generator"] = codec::generator_config_to_json(cfg);
    manifest["splits"] = codec::split_counts_to_json(counts);
    manifest["categories"] = names;
    const auto tmp = (dir / "manifest.json").string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw std::runtime_error("write_dataset_dir: cannot write manifest");
        f << manifest.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, dir / "manifest.json");
}

void render_split(std::vector<SceneSample>& samples, const GeneratorConfig& cfg,
                  std::uint64_t master_seed) {
    const num::Array embeddings = category_embeddings(cfg, master_seed);
    for (auto& sample : samples) {
        sample.features =
            render_features(sample.boxes, sample.categories, cfg, embeddings,
                            noise_seed_for(master_seed, sample.pair_id, sample.view));
    }
}

DatasetDir load_dataset_dir(const std::filesystem::path& dir) {
    std::ifstream f(dir / "manifest.json");
    if (!f) throw std::runtime_error("load_dataset_dir: missing manifest.json in " + dir.string());
    ordered_json manifest;
    try {
        f >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("load_dataset_dir: malformed manifest: ") + e.what());
    }
    if (manifest.value("format_version", 0) != kManifestVersion) {
        throw std::runtime_error("load_dataset_dir: unsupported manifest version");
    }

    DatasetDir out;
    out.master_seed = manifest.at("master_seed").get<std::uint64_t>();
    out.config = codec::generator_config_from_json(manifest.at("generator"));
    out.counts = codec::split_counts_from_json(manifest.at("splits"));
    out.train = load_coco(dir / "train.json");
    out.val = load_coco(dir / "val.json");
    out.test = load_coco(dir / "test.json");
    render_split(out.train, out.config, out.master_seed);
    render_split(out.val, out.config, out.master_seed);
    render_split(out.test, out.config, out.master_seed);
    return out;
}

}  // namespace xview::synth
