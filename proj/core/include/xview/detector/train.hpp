#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xview/cpa/routing.hpp"
#include "xview/curriculum/curriculum.hpp"
#include "xview/detector/detector.hpp"
#include "xview/evalkit/report.hpp"
#include "xview/synthdata/dataset.hpp"

namespace xview::det {

struct TrainConfig {
    Mode mode = Mode::both;
    std::size_t epochs = 10;
    std::size_t batch_size = 8;  // even; a pair never straddles batches
    double learning_rate = 1e-3;
    double weight_decay = 0.01;
    cpa::CpaLossWeights loss_weights;
    double t1 = 1.0 / 3.0;
    double t2 = 2.0 / 3.0;
    std::uint64_t seed = 42;
    bool scored = false;
    std::size_t cpa_hidden = 0;     // 0 -> 2d
    std::size_t cpa_align_dim = 0;  // 0 -> d
    std::size_t region_h = 2;
    std::size_t region_w = 2;
    eval::AreaBounds area_bounds;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;          // 1-based
    double val_map = 0.0;   // view-agnostic validation mAP
    eval::EvalReport val;
};

// Everything needed to reproduce and audit one training run. Serializes to
// canonical JSON; two identical runs produce byte-identical records.
struct RunRecord {
    int format_version = 1;
    std::string mode;
    std::uint64_t seed = 0;
    TrainConfig config;
    std::uint64_t dataset_seed = 0;
    std::size_t detector_param_count = 0;
    std::size_t cpa_param_count = 0;  // 0 for modes without CPA
    std::vector<EpochRecord> epochs;
    int selected_epoch = 0;  // 1-based; earliest epoch wins val-mAP ties
    double val_map = 0.0;    // selected epoch
    eval::EvalReport test;
    double test_map = 0.0;
    std::optional<cpa::RoutingTable> routing;  // validation split, selected params
};

// Label-read counters per split; the training loop asserts the test counter
// stays at zero until checkpoint selection is done.
struct SplitAudit {
    std::uint64_t train_label_reads = 0;
    std::uint64_t val_label_reads = 0;
    std::uint64_t test_label_reads = 0;
};

struct SplitEval {
    eval::EvalReport report;     // per-view blocks + gap
    eval::MetricBlock overall;   // view-agnostic
};

SplitEval evaluate_split(const DetectorParams& params, const std::vector<synth::SceneSample>& samples,
                         const eval::AreaBounds& bounds, std::uint64_t* label_reads = nullptr);

// Per-sample routing rows over a split (CPA forward on the encoder tokens).
std::vector<cpa::RoutingRow> routing_rows(const ModelBundle& bundle,
                                          const std::vector<synth::SceneSample>& samples);

struct TrainResult {
    RunRecord record;
    ModelBundle model;  // selected (best validation mAP) parameters
};

// Full training run: curriculum or uniform sampling by mode, per-epoch
// validation, strict best-val checkpoint selection, one test evaluation after
// selection, routing trace for CPA modes. Non-finite losses abort with a
// diagnostic. Bit-reproducible for a fixed (config, dataset).
TrainResult train(const TrainConfig& config, const synth::DatasetDir& data,
                  SplitAudit* audit = nullptr);

std::string run_record_json(const RunRecord& record);
RunRecord run_record_from_json(const std::string& text);

}  // namespace xview::det
