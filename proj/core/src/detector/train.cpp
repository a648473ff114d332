#include "xview/detector/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "common/json_codec.hpp"
#include "xview/numerics/optim.hpp"

namespace xview::det {

using namespace xview::num;
using codec::ordered_json;

void TrainConfig::validate() const {
    if (epochs == 0) throw std::invalid_argument("TrainConfig: epochs must be positive");
    if (batch_size < 2 || batch_size % 2 != 0) {
        throw std::invalid_argument("TrainConfig: batch_size must be even and >= 2");
    }
    if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    curr::Schedule probe{t1, t2, 1};
    probe.validate();
}

SplitEval evaluate_split(const DetectorParams& params, const std::vector<synth::SceneSample>& samples,
                         const eval::AreaBounds& bounds, std::uint64_t* label_reads) {
    std::vector<std::vector<eval::Detection>> dets_all, dets_ground, dets_aerial;
    std::vector<std::vector<eval::GroundTruth>> truths_all, truths_ground, truths_aerial;
    int ground_count = 0, aerial_count = 0;
    for (const auto& sample : samples) {
        auto dets = infer(sample, params);
        auto truths = sample.truths();
        if (label_reads) ++*label_reads;
        if (sample.view == synth::View::ground) {
            dets_ground.push_back(dets);
            truths_ground.push_back(truths);
            ++ground_count;
        } else {
            dets_aerial.push_back(dets);
            truths_aerial.push_back(truths);
            ++aerial_count;
        }
        dets_all.push_back(std::move(dets));
        truths_all.push_back(std::move(truths));
    }

    SplitEval out;
    out.overall = eval::coco_map(dets_all, truths_all, bounds);
    out.report.samples = static_cast<int>(samples.size());
    if (ground_count > 0) out.report.ground = eval::coco_map(dets_ground, truths_ground, bounds);
    if (aerial_count > 0) out.report.aerial = eval::coco_map(dets_aerial, truths_aerial, bounds);
    out.report.compute_gap();
    return out;
}

std::vector<cpa::RoutingRow> routing_rows(const ModelBundle& bundle,
                                          const std::vector<synth::SceneSample>& samples) {
    if (!bundle.cpa) throw std::invalid_argument("routing_rows: model has no CPA parameters");
    std::vector<cpa::RoutingRow> rows;
    rows.reserve(samples.size());
    for (const auto& sample : samples) {
        cpa::TokenGrid grid;
        grid.tokens = encode_tokens(sample.features.tokens, bundle.detector);
        grid.grid_h = sample.features.grid_h;
        grid.grid_w = sample.features.grid_w;
        cpa::TextSummary text{bundle.detector.text_embed};
        const auto fwd = cpa::cpa_forward(grid, text, *bundle.cpa, {});
        cpa::RoutingRow row;
        row.sample_id = synth::pair_file_name(sample.pair_id, sample.view);
        row.sample_id = row.sample_id.substr(0, row.sample_id.rfind('.'));
        row.view = synth::view_name(sample.view);
        row.object_count = static_cast<int>(sample.boxes.size());
        row.w_s = fwd.fusion.w[0];
        row.w_m = fwd.fusion.w[1];
        row.w_d = fwd.fusion.w[2];
        row.c_s = fwd.fusion.profile.c[0];
        row.c_m = fwd.fusion.profile.c[1];
        row.c_d = fwd.fusion.profile.c[2];
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

DetectorParams snapshot(const DetectorParams& p) { return p; }

}  // namespace

TrainResult train(const TrainConfig& config, const synth::DatasetDir& data, SplitAudit* audit) {
    config.validate();
    if (data.train.empty() || data.val.empty() || data.test.empty()) {
        throw std::invalid_argument("train: every split must be nonempty");
    }

    SplitAudit local_audit;
    if (!audit) audit = &local_audit;

    const bool use_cpa = mode_uses_cpa(config.mode);
    const bool use_curriculum = mode_uses_curriculum(config.mode);

    DetectorConfig det_cfg;
    det_cfg.grid = data.config.grid;
    det_cfg.channels = data.config.channels;
    det_cfg.categories = data.config.categories;
    det_cfg.image_size = data.config.image_size;
    det_cfg.scored = config.scored;

    Rng init_rng(derive_seed(config.seed, {1}));
    ModelBundle model;
    model.detector = detector_init(det_cfg, init_rng);
    if (use_cpa) {
        cpa::CpaConfig cc;
        cc.d = det_cfg.channels;
        cc.hidden = config.cpa_hidden;
        cc.align_dim = config.cpa_align_dim;
        cc.region_h = config.region_h;
        cc.region_w = config.region_w;
        model.cpa = cpa::cpa_init(cc, init_rng);
    }

    const synth::PairedDataset paired = synth::build_paired(data.train);
    curr::PairedIndex index{paired.pairs.size(), paired.pairs};
    const std::size_t steps_per_epoch = std::max<std::size_t>(1, paired.flat.size() / config.batch_size);

    curr::Schedule schedule;
    if (use_curriculum) {
        schedule = {config.t1, config.t2, config.epochs * steps_per_epoch};
    } else {
        schedule = {0.0, 0.0, config.epochs * steps_per_epoch};  // p_pair == 0: uniform sampling
    }
    curr::SamplerState sampler(derive_seed(config.seed, {2}), schedule);

    AdamWConfig opt_cfg;
    opt_cfg.learning_rate = config.learning_rate;
    opt_cfg.weight_decay = config.weight_decay;
    AdamW optimizer(opt_cfg);

    TrainResult result;
    RunRecord& record = result.record;
    record.mode = mode_name(config.mode);
    record.seed = config.seed;
    record.config = config;
    record.dataset_seed = data.master_seed;
    record.detector_param_count = model.detector.param_count();
    record.cpa_param_count = model.cpa ? model.cpa->param_count() : 0;

    DetectorParams best_detector = snapshot(model.detector);
    std::optional<cpa::CpaParams> best_cpa = model.cpa;
    double best_map = -1.0;
    int best_epoch = 0;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            const auto batch_indices = curr::next_batch(sampler, index, config.batch_size);
            std::vector<const synth::SceneSample*> batch;
            batch.reserve(batch_indices.size());
            for (std::size_t i : batch_indices) {
                batch.push_back(&paired.flat[i]);
                ++audit->train_label_reads;
            }

            DetectorVars det_vars = lift(model.detector, true);
            std::optional<cpa::CpaVars> cpa_vars;
            if (model.cpa) cpa_vars = cpa::lift(*model.cpa, true);

            BatchLoss loss;
            try {
                loss = forward_train(batch, det_vars, cpa_vars ? &*cpa_vars : nullptr,
                                     config.loss_weights);
                if (!std::isfinite(loss.total->value.item())) {
                    throw std::domain_error("non-finite total loss");
                }
                backward(loss.total);
            } catch (const std::domain_error& e) {
                throw std::runtime_error("train: diverged at epoch " + std::to_string(epoch) +
                                         " step " + std::to_string(step) + ": " + e.what());
            }

            std::vector<Var> leaves = det_vars.all();
            std::vector<cpa::ParamRef> refs = param_entries(model.detector);
            if (cpa_vars) {
                const auto cpa_leaves = cpa_vars->all();
                leaves.insert(leaves.end(), cpa_leaves.begin(), cpa_leaves.end());
                const auto cpa_refs = cpa::param_entries(*model.cpa);
                refs.insert(refs.end(), cpa_refs.begin(), cpa_refs.end());
            }
            std::vector<Array*> params;
            std::vector<const Array*> grads;
            for (std::size_t i = 0; i < refs.size(); ++i) {
                params.push_back(refs[i].array);
                grads.push_back(&leaves[i]->grad);
            }
            optimizer.step(params, grads);
        }

        const SplitEval val_eval =
            evaluate_split(model.detector, data.val, config.area_bounds, &audit->val_label_reads);
        EpochRecord er;
        er.epoch = static_cast<int>(epoch);
        er.val_map = val_eval.overall.map.value_or(0.0);
        er.val = val_eval.report;
        record.epochs.push_back(er);

        if (er.val_map > best_map) {  // strict: earliest epoch wins ties
            best_map = er.val_map;
            best_epoch = er.epoch;
            best_detector = snapshot(model.detector);
            best_cpa = model.cpa;
        }
    }

    record.selected_epoch = best_epoch;
    record.val_map = best_map;
    result.model.detector = std::move(best_detector);
    result.model.cpa = std::move(best_cpa);

    if (audit->test_label_reads != 0) {
        throw std::logic_error("train: test labels were read before checkpoint selection");
    }
    const SplitEval test_eval = evaluate_split(result.model.detector, data.test,
                                               config.area_bounds, &audit->test_label_reads);
    record.test = test_eval.report;
    record.test_map = test_eval.overall.map.value_or(0.0);

    if (use_cpa) {
        record.routing = cpa::build_routing_table(routing_rows(result.model, data.val));
    }
    return result;
}

// ---- JSON codec ----

namespace {

ordered_json opt_num(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

std::optional<double> num_opt(const ordered_json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

ordered_json block_to_json(const eval::MetricBlock& b) {
    ordered_json j;
    j["present"] = b.present;
    j["mAP"] = opt_num(b.map);
    j["mAP50"] = opt_num(b.map50);
    j["mAP75"] = opt_num(b.map75);
    j["mAP_S"] = opt_num(b.map_s);
    j["mAP_M"] = opt_num(b.map_m);
    j["samples"] = b.samples;
    return j;
}

eval::MetricBlock block_from_json(const ordered_json& j) {
    eval::MetricBlock b;
    b.present = j.at("present").get<bool>();
    b.map = num_opt(j.at("mAP"));
    b.map50 = num_opt(j.at("mAP50"));
    b.map75 = num_opt(j.at("mAP75"));
    b.map_s = num_opt(j.at("mAP_S"));
    b.map_m = num_opt(j.at("mAP_M"));
    b.samples = j.at("samples").get<int>();
    return b;
}

ordered_json report_to_json(const eval::EvalReport& r) {
    ordered_json j;
    j["ground"] = block_to_json(r.ground);
    j["aerial"] = block_to_json(r.aerial);
    j["gap"] = opt_num(r.gap);
    j["samples"] = r.samples;
    return j;
}

eval::EvalReport report_from_json(const ordered_json& j) {
    eval::EvalReport r;
    r.ground = block_from_json(j.at("ground"));
    r.aerial = block_from_json(j.at("aerial"));
    r.gap = num_opt(j.at("gap"));
    r.samples = j.at("samples").get<int>();
    return r;
}

ordered_json train_config_to_json(const TrainConfig& c) {
    ordered_json j;
    j["mode"] = mode_name(c.mode);
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.learning_rate;
    j["weight_decay"] = c.weight_decay;
    j["lambda_align"] = c.loss_weights.lambda_align;
    j["lambda_entropy"] = c.loss_weights.lambda_entropy;
    j["lambda_balance"] = c.loss_weights.lambda_balance;
    j["t1"] = c.t1;
    j["t2"] = c.t2;
    j["seed"] = c.seed;
    j["scored"] = c.scored;
    j["cpa_hidden"] = c.cpa_hidden;
    j["cpa_align_dim"] = c.cpa_align_dim;
    j["region_grid"] = {c.region_h, c.region_w};
    j["area_small_max"] = c.area_bounds.small_max;
    j["area_medium_max"] = c.area_bounds.medium_max;
    return j;
}

TrainConfig train_config_from_json(const ordered_json& j) {
    TrainConfig c;
    c.mode = parse_mode(j.at("mode").get<std::string>());
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.loss_weights.lambda_align = j.value("lambda_align", c.loss_weights.lambda_align);
    c.loss_weights.lambda_entropy = j.value("lambda_entropy", c.loss_weights.lambda_entropy);
    c.loss_weights.lambda_balance = j.value("lambda_balance", c.loss_weights.lambda_balance);
    c.t1 = j.value("t1", c.t1);
    c.t2 = j.value("t2", c.t2);
    c.seed = j.value("seed", c.seed);
    c.scored = j.value("scored", c.scored);
    c.cpa_hidden = j.value("cpa_hidden", c.cpa_hidden);
    c.cpa_align_dim = j.value("cpa_align_dim", c.cpa_align_dim);
    if (j.contains("region_grid")) {
        c.region_h = j["region_grid"][0].get<std::size_t>();
        c.region_w = j["region_grid"][1].get<std::size_t>();
    }
    c.area_bounds.small_max = j.value("area_small_max", c.area_bounds.small_max);
    c.area_bounds.medium_max = j.value("area_medium_max", c.area_bounds.medium_max);
    return c;
}

ordered_json corr_to_json(const eval::Correlation& c) {
    ordered_json j;
    j["defined"] = c.defined;
    j["r"] = c.defined ? ordered_json(c.r) : ordered_json(nullptr);
    j["p_value"] = c.defined ? ordered_json(c.p_value) : ordered_json(nullptr);
    j["n"] = c.n;
    return j;
}

eval::Correlation corr_from_json(const ordered_json& j) {
    eval::Correlation c;
    c.defined = j.at("defined").get<bool>();
    if (c.defined) {
        c.r = j.at("r").get<double>();
        c.p_value = j.at("p_value").get<double>();
    }
    c.n = j.at("n").get<std::size_t>();
    return c;
}

}  // namespace

std::string run_record_json(const RunRecord& r) {
    ordered_json j;
    j["format_version"] = r.format_version;
    j["mode"] = r.mode;
    j["seed"] = r.seed;
    j["config"] = train_config_to_json(r.config);
    j["dataset_seed"] = r.dataset_seed;
    j["detector_param_count"] = r.detector_param_count;
    j["cpa_param_count"] = r.cpa_param_count;
    j["cpa_param_ratio"] = r.detector_param_count
                               ? static_cast<double>(r.cpa_param_count) /
                                     static_cast<double>(r.detector_param_count)
                               : 0.0;
    j["epochs"] = ordered_json::array();
    for (const auto& e : r.epochs) {
        ordered_json je;
        je["epoch"] = e.epoch;
        je["val_mAP"] = e.val_map;
        je["val"] = report_to_json(e.val);
        j["epochs"].push_back(je);
    }
    j["selected_epoch"] = r.selected_epoch;
    j["val_mAP"] = r.val_map;
    j["test"] = report_to_json(r.test);
    j["test_mAP"] = r.test_map;
    if (r.routing) {
        ordered_json jr;
        jr["rows"] = ordered_json::array();
        for (const auto& row : r.routing->rows) {
            jr["rows"].push_back({row.sample_id, row.view, row.object_count, row.w_s, row.w_m,
                                  row.w_d, row.c_s, row.c_m, row.c_d});
        }
        jr["pearson_w_sparse_vs_count"] = corr_to_json(r.routing->r_sparse);
        jr["pearson_w_medium_vs_count"] = corr_to_json(r.routing->r_medium);
        jr["pearson_w_dense_vs_count"] = corr_to_json(r.routing->r_dense);
        jr["spearman_c_dense_vs_count"] = corr_to_json(r.routing->spearman_c_dense);
        j["routing"] = jr;
    } else {
        j["routing"] = nullptr;
    }
    return j.dump(2) + "\n";
}

RunRecord run_record_from_json(const std::string& text) {
    const ordered_json j = ordered_json::parse(text);
    RunRecord r;
    r.format_version = j.at("format_version").get<int>();
    r.mode = j.at("mode").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config = train_config_from_json(j.at("config"));
    r.dataset_seed = j.at("dataset_seed").get<std::uint64_t>();
    r.detector_param_count = j.at("detector_param_count").get<std::size_t>();
    r.cpa_param_count = j.at("cpa_param_count").get<std::size_t>();
    for (const auto& je : j.at("epochs")) {
        EpochRecord e;
        e.epoch = je.at("epoch").get<int>();
        e.val_map = je.at("val_mAP").get<double>();
        e.val = report_from_json(je.at("val"));
        r.epochs.push_back(std::move(e));
    }
    r.selected_epoch = j.at("selected_epoch").get<int>();
    r.val_map = j.at("val_mAP").get<double>();
    r.test = report_from_json(j.at("test"));
    r.test_map = j.at("test_mAP").get<double>();
    if (!j.at("routing").is_null()) {
        const auto& jr = j.at("routing");
        cpa::RoutingTable table;
        for (const auto& jrow : jr.at("rows")) {
            cpa::RoutingRow row;
            row.sample_id = jrow[0].get<std::string>();
            row.view = jrow[1].get<std::string>();
            row.object_count = jrow[2].get<int>();
            row.w_s = jrow[3].get<double>();
            row.w_m = jrow[4].get<double>();
            row.w_d = jrow[5].get<double>();
            row.c_s = jrow[6].get<double>();
            row.c_m = jrow[7].get<double>();
            row.c_d = jrow[8].get<double>();
            table.rows.push_back(std::move(row));
        }
        table.r_sparse = corr_from_json(jr.at("pearson_w_sparse_vs_count"));
        table.r_medium = corr_from_json(jr.at("pearson_w_medium_vs_count"));
        table.r_dense = corr_from_json(jr.at("pearson_w_dense_vs_count"));
        table.spearman_c_dense = corr_from_json(jr.at("spearman_c_dense_vs_count"));
        r.routing = std::move(table);
    }
    return r;
}

}  // namespace xview::det
