#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xview/cpa/cpa.hpp"
#include "xview/evalkit/boxes.hpp"
#include "xview/numerics/checkpoint.hpp"
#include "xview/synthdata/scene.hpp"

namespace xview::det {

using num::Array;
using num::Var;

enum class Mode { baseline, cpa, curriculum, both };
Mode parse_mode(const std::string& name);
const char* mode_name(Mode mode);
bool mode_uses_cpa(Mode mode);
bool mode_uses_curriculum(Mode mode);

struct DetectorConfig {
    std::size_t grid = 16;        // token grid extent per axis
    std::size_t channels = 32;    // d
    std::size_t categories = 10;  // C; the head emits C+1 logits, last = background
    double image_size = 256.0;
    bool scored = false;  // score detections by head probability instead of 1.0
};

// Grid encoder (per-token MLP), prompt embedding table, and the per-cell
// classification/regression head. The head starts at zero, so an untrained
// model detects nothing.
struct DetectorParams {
    DetectorConfig config;
    Array enc_w1, enc_b1, enc_w2, enc_b2;
    Array cls_w, cls_b;
    Array box_w, box_b;
    Array text_embed;  // (C, d)

    std::size_t param_count() const;
};

DetectorParams detector_init(const DetectorConfig& config, num::Rng& rng);
std::vector<cpa::ParamRef> param_entries(DetectorParams& params);

struct DetectorVars {
    Var enc_w1, enc_b1, enc_w2, enc_b2;
    Var cls_w, cls_b;
    Var box_w, box_b;
    Var text_embed;
    DetectorConfig config;

    std::vector<Var> all() const;
};
DetectorVars lift(const DetectorParams& params, bool requires_grad);

// Per-token MLP over the rendered features, graph and value versions. Both
// compute the same function; the value path serves inference.
Var encode_tokens_v(const Var& features, const DetectorVars& p);
Array encode_tokens(const Array& features, const DetectorParams& params);

// Center-cell target assignment: the cell containing a truth box's center is
// positive for that object; when two objects share a cell the lower object
// index wins. Box targets are (dx, dy) in cell units and (w, h) as image
// fractions.
struct CellTargets {
    std::vector<int> cls;                 // per cell, C = background
    std::vector<std::size_t> positives;   // ascending cell indices
    Array box;                            // (cells, 4)
};
CellTargets assign_targets(const synth::SceneSample& sample, const DetectorConfig& config);

// Training-time forward over one batch: mean detection loss (cross-entropy
// over cells plus L1 on positive cells), plus the per-sample auxiliary losses
// and the batch-mean gate balance term when CPA is attached.
struct BatchLoss {
    Var total;
    Var detection;
    Var aux_mean;       // null when CPA absent
    Var balance;        // null when CPA absent
    std::vector<Var> gate_weights;  // per sample (3,), CPA modes only
};
BatchLoss forward_train(const std::vector<const synth::SceneSample*>& batch,
                        const DetectorVars& det, const cpa::CpaVars* cpa_vars,
                        const cpa::CpaLossWeights& weights);

// Pure inference: encode, per-cell argmax (background wins logit ties),
// decode boxes, per-category NMS at IoU 0.5. Never touches CPA parameters.
std::vector<eval::Detection> infer(const synth::SceneSample& sample,
                                   const DetectorParams& params);

struct ModelBundle {
    DetectorParams detector;
    std::optional<cpa::CpaParams> cpa;
};

void save_checkpoint(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_checkpoint(const std::filesystem::path& path);

}  // namespace xview::det
