#include "xview/detector/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xview::det {

using namespace xview::num;

Mode parse_mode(const std::string& name) {
    if (name == "baseline") return Mode::baseline;
    if (name == "cpa") return Mode::cpa;
    if (name == "curriculum") return Mode::curriculum;
    if (name == "both") return Mode::both;
    throw std::invalid_argument("unknown mode: " + name);
}

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::baseline: return "baseline";
        case Mode::cpa: return "cpa";
        case Mode::curriculum: return "curriculum";
        case Mode::both: return "both";
    }
    return "?";
}

bool mode_uses_cpa(Mode mode) { return mode == Mode::cpa || mode == Mode::both; }
bool mode_uses_curriculum(Mode mode) { return mode == Mode::curriculum || mode == Mode::both; }

std::size_t DetectorParams::param_count() const {
    std::size_t n = 0;
    for (const auto& ref : param_entries(const_cast<DetectorParams&>(*this))) n += ref.array->size();
    return n;
}

DetectorParams detector_init(const DetectorConfig& config, Rng& rng) {
    const std::size_t d = config.channels;
    const std::size_t c = config.categories;
    const double std = 1.0 / std::sqrt(static_cast<double>(d));
    DetectorParams p;
    p.config = config;
    p.enc_w1 = rng.normal_array({d, d}, 0.0, std);
    p.enc_b1 = Array({d});
    p.enc_w2 = rng.normal_array({d, d}, 0.0, std);
    p.enc_b2 = Array({d});
    p.cls_w = Array({d, c + 1});  // zero head: background everywhere before training
    p.cls_b = Array({c + 1});
    p.box_w = Array({d, 4});
    p.box_b = Array({4});
    p.text_embed = rng.normal_array({c, d}, 0.0, std);
    return p;
}

std::vector<cpa::ParamRef> param_entries(DetectorParams& p) {
    return {
        {"det.enc_w1", &p.enc_w1}, {"det.enc_b1", &p.enc_b1},
        {"det.enc_w2", &p.enc_w2}, {"det.enc_b2", &p.enc_b2},
        {"det.cls_w", &p.cls_w},   {"det.cls_b", &p.cls_b},
        {"det.box_w", &p.box_w},   {"det.box_b", &p.box_b},
        {"det.text_embed", &p.text_embed},
    };
}

std::vector<Var> DetectorVars::all() const {
    return {enc_w1, enc_b1, enc_w2, enc_b2, cls_w, cls_b, box_w, box_b, text_embed};
}

DetectorVars lift(const DetectorParams& p, bool requires_grad) {
    DetectorVars v;
    v.config = p.config;
    v.enc_w1 = make_leaf(p.enc_w1, requires_grad);
    v.enc_b1 = make_leaf(p.enc_b1, requires_grad);
    v.enc_w2 = make_leaf(p.enc_w2, requires_grad);
    v.enc_b2 = make_leaf(p.enc_b2, requires_grad);
    v.cls_w = make_leaf(p.cls_w, requires_grad);
    v.cls_b = make_leaf(p.cls_b, requires_grad);
    v.box_w = make_leaf(p.box_w, requires_grad);
    v.box_b = make_leaf(p.box_b, requires_grad);
    v.text_embed = make_leaf(p.text_embed, requires_grad);
    return v;
}

Var encode_tokens_v(const Var& features, const DetectorVars& p) {
    Var hidden = relu(add_rowwise(matmul(features, p.enc_w1), p.enc_b1));
    return add_rowwise(matmul(hidden, p.enc_w2), p.enc_b2);
}

Array encode_tokens(const Array& features, const DetectorParams& p) {
    Array hidden = relu_raw(add_rowwise_raw(matmul_raw(features, p.enc_w1), p.enc_b1));
    return add_rowwise_raw(matmul_raw(hidden, p.enc_w2), p.enc_b2);
}

CellTargets assign_targets(const synth::SceneSample& sample, const DetectorConfig& config) {
    const std::size_t g = config.grid;
    const double cell = config.image_size / static_cast<double>(g);
    CellTargets targets;
    targets.cls.assign(g * g, static_cast<int>(config.categories));
    targets.box = Array({g * g, 4});

    for (std::size_t o = 0; o < sample.boxes.size(); ++o) {
        const auto& b = sample.boxes[o];
        const double cx = b.x + 0.5 * b.w;
        const double cy = b.y + 0.5 * b.h;
        const auto col = std::min(g - 1, static_cast<std::size_t>(std::max(0.0, cx / cell)));
        const auto row = std::min(g - 1, static_cast<std::size_t>(std::max(0.0, cy / cell)));
        const std::size_t idx = row * g + col;
        if (targets.cls[idx] != static_cast<int>(config.categories)) continue;  // earlier object won
        targets.cls[idx] = sample.categories[o];
        targets.box[idx * 4 + 0] = (cx - (static_cast<double>(col) + 0.5) * cell) / cell;
        targets.box[idx * 4 + 1] = (cy - (static_cast<double>(row) + 0.5) * cell) / cell;
        targets.box[idx * 4 + 2] = b.w / config.image_size;
        targets.box[idx * 4 + 3] = b.h / config.image_size;
        targets.positives.push_back(idx);
    }
    std::sort(targets.positives.begin(), targets.positives.end());
    return targets;
}

BatchLoss forward_train(const std::vector<const synth::SceneSample*>& batch,
                        const DetectorVars& det, const cpa::CpaVars* cpa_vars,
                        const cpa::CpaLossWeights& weights) {
    if (batch.empty()) throw std::invalid_argument("forward_train: empty batch");
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    BatchLoss out;
    Var det_sum, aux_sum, w_sum;
    for (const auto* sample : batch) {
        Var features = make_constant(sample->features.tokens);
        Var tokens = encode_tokens_v(features, det);
        Var logits = add_rowwise(matmul(tokens, det.cls_w), det.cls_b);
        Var offsets = add_rowwise(matmul(tokens, det.box_w), det.box_b);

        const CellTargets targets = assign_targets(*sample, det.config);
        Var loss = cross_entropy_mean(logits, targets.cls);
        if (!targets.positives.empty()) {
            loss = add(loss, l1_rows_mean(offsets, targets.box, targets.positives,
                                          static_cast<double>(targets.positives.size())));
        }
        det_sum = det_sum ? add(det_sum, loss) : loss;

        if (cpa_vars) {
            cpa::GridVar grid{tokens, sample->features.grid_h, sample->features.grid_w};
            cpa::CpaForwardVars cf = cpa::cpa_forward_v(grid, det.text_embed, *cpa_vars, weights);
            aux_sum = aux_sum ? add(aux_sum, cf.aux) : cf.aux;
            w_sum = w_sum ? add(w_sum, cf.fusion.w) : cf.fusion.w;
            out.gate_weights.push_back(cf.fusion.w);
        }
    }

    out.detection = scale(det_sum, inv_b);
    out.total = out.detection;
    if (cpa_vars) {
        out.aux_mean = scale(aux_sum, inv_b);
        out.total = add(out.total, out.aux_mean);
        if (weights.lambda_balance != 0.0) {
            // Maximize the entropy of the batch-mean routing: anti-collapse.
            out.balance = scale(entropy(scale(w_sum, inv_b)), -weights.lambda_balance);
            out.total = add(out.total, out.balance);
        }
    }
    return out;
}

std::vector<eval::Detection> infer(const synth::SceneSample& sample,
                                   const DetectorParams& params) {
    const DetectorConfig& cfg = params.config;
    const std::size_t g = cfg.grid;
    const std::size_t c = cfg.categories;
    const double cell = cfg.image_size / static_cast<double>(g);

    const Array tokens = encode_tokens(sample.features.tokens, params);
    const Array logits = add_rowwise_raw(matmul_raw(tokens, params.cls_w), params.cls_b);
    const Array offsets = add_rowwise_raw(matmul_raw(tokens, params.box_w), params.box_b);

    std::vector<eval::Detection> dets;
    for (std::size_t idx = 0; idx < g * g; ++idx) {
        const double* row = logits.data() + idx * (c + 1);
        std::size_t best = 0;
        for (std::size_t k = 1; k < c; ++k) {
            if (row[k] > row[best]) best = k;
        }
        // Background wins ties, so an all-zero head yields no detections.
        if (!(row[best] > row[c])) continue;

        const std::size_t r = idx / g, col = idx % g;
        const double cx = (static_cast<double>(col) + 0.5) * cell + offsets[idx * 4 + 0] * cell;
        const double cy = (static_cast<double>(r) + 0.5) * cell + offsets[idx * 4 + 1] * cell;
        double w = offsets[idx * 4 + 2] * cfg.image_size;
        double h = offsets[idx * 4 + 3] * cfg.image_size;
        w = std::clamp(w, 1e-3, cfg.image_size);
        h = std::clamp(h, 1e-3, cfg.image_size);
        const double x = std::clamp(cx - w / 2.0, 0.0, cfg.image_size - w);
        const double y = std::clamp(cy - h / 2.0, 0.0, cfg.image_size - h);

        double score = 1.0;
        if (cfg.scored) {
            double mx = row[0];
            for (std::size_t k = 1; k <= c; ++k) mx = std::max(mx, row[k]);
            double sum = 0.0;
            for (std::size_t k = 0; k <= c; ++k) sum += std::exp(row[k] - mx);
            score = std::exp(row[best] - mx) / sum;
        }
        dets.push_back({{x, y, w, h}, static_cast<int>(best), score});
    }
    return eval::nms(std::move(dets), 0.5);
}

namespace {

constexpr double kFormatTag = 1.0;

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelBundle& bundle) {
    NamedArrays arrays;
    const DetectorConfig& dc = bundle.detector.config;
    arrays.add("meta.format", Array({1}, {kFormatTag}));
    arrays.add("meta.detector",
               Array({4}, {static_cast<double>(dc.grid), static_cast<double>(dc.channels),
                           static_cast<double>(dc.categories), dc.image_size}));
    for (const auto& ref : param_entries(const_cast<DetectorParams&>(bundle.detector))) {
        arrays.add(ref.name, *ref.array);
    }
    if (bundle.cpa) {
        const cpa::CpaConfig& cc = bundle.cpa->config;
        arrays.add("meta.cpa",
                   Array({5}, {static_cast<double>(cc.d), static_cast<double>(cc.hidden_or_default()),
                               static_cast<double>(cc.align_or_default()),
                               static_cast<double>(cc.region_h), static_cast<double>(cc.region_w)}));
        for (const auto& ref : cpa::param_entries(const_cast<cpa::CpaParams&>(*bundle.cpa))) {
            arrays.add(ref.name, *ref.array);
        }
    }
    save_arrays(path, arrays);
}

ModelBundle load_checkpoint(const std::filesystem::path& path) {
    const NamedArrays arrays = load_arrays(path);
    const Array* format = arrays.find("meta.format");
    if (!format || format->item() != kFormatTag) {
        throw std::runtime_error("load_checkpoint: missing or unsupported format tag");
    }
    const Array* dmeta = arrays.find("meta.detector");
    if (!dmeta || dmeta->size() != 4) throw std::runtime_error("load_checkpoint: bad detector meta");

    ModelBundle bundle;
    DetectorConfig dc;
    dc.grid = static_cast<std::size_t>((*dmeta)[0]);
    dc.channels = static_cast<std::size_t>((*dmeta)[1]);
    dc.categories = static_cast<std::size_t>((*dmeta)[2]);
    dc.image_size = (*dmeta)[3];
    bundle.detector.config = dc;
    for (const auto& ref : param_entries(bundle.detector)) {
        const Array* stored = arrays.find(ref.name);
        if (!stored) throw std::runtime_error("load_checkpoint: missing entry " + ref.name);
        *ref.array = *stored;
    }

    if (const Array* cmeta = arrays.find("meta.cpa")) {
        if (cmeta->size() != 5) throw std::runtime_error("load_checkpoint: bad cpa meta");
        cpa::CpaConfig cc;
        cc.d = static_cast<std::size_t>((*cmeta)[0]);
        cc.hidden = static_cast<std::size_t>((*cmeta)[1]);
        cc.align_dim = static_cast<std::size_t>((*cmeta)[2]);
        cc.region_h = static_cast<std::size_t>((*cmeta)[3]);
        cc.region_w = static_cast<std::size_t>((*cmeta)[4]);
        cpa::CpaParams cp;
        cp.config = cc;
        for (const auto& ref : cpa::param_entries(cp)) {
            const Array* stored = arrays.find(ref.name);
            if (!stored) throw std::runtime_error("load_checkpoint: missing entry " + ref.name);
            *ref.array = *stored;
        }
        bundle.cpa = std::move(cp);
    }
    return bundle;
}

}  // namespace xview::det
