#include "xview/evalkit/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "xview/evalkit/stats.hpp"

namespace xview::eval {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json opt_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

ordered_json block_json(const MetricBlock& b) {
    ordered_json j;
    j["present"] = b.present;
    j["mAP"] = opt_json(b.map);
    j["mAP50"] = opt_json(b.map50);
    j["mAP75"] = opt_json(b.map75);
    j["mAP_S"] = opt_json(b.map_s);
    j["mAP_M"] = opt_json(b.map_m);
    j["samples"] = b.samples;
    return j;
}

std::string fmt(const std::optional<double>& v) {
    if (!v) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *v);
    return buf;
}

void csv_block_row(std::ostringstream& oss, const char* view, const MetricBlock& b) {
    oss << view << "," << fmt(b.map) << "," << fmt(b.map50) << "," << fmt(b.map75) << ","
        << fmt(b.map_s) << "," << fmt(b.map_m) << "\n";
}

}  // namespace

void EvalReport::compute_gap() {
    if (ground.present && aerial.present && ground.map && aerial.map) {
        gap = *ground.map - *aerial.map;
    } else {
        gap = std::nullopt;
    }
}

std::string eval_report_json(const EvalReport& report) {
    ordered_json j;
    j["ground"] = block_json(report.ground);
    j["aerial"] = block_json(report.aerial);
    j["gap"] = opt_json(report.gap);
    j["samples"] = report.samples;
    return j.dump(2) + "\n";
}

std::string eval_report_csv(const EvalReport& report) {
    std::ostringstream oss;
    oss << "view,mAP,mAP50,mAP75,mAP_S,mAP_M\n";
    if (report.ground.present) csv_block_row(oss, "ground", report.ground);
    if (report.aerial.present) csv_block_row(oss, "aerial", report.aerial);
    oss << "gap," << fmt(report.gap) << ",,,,\n";
    return oss.str();
}

std::vector<SeedReport::Stat> SeedReport::stats() const {
    struct Extractor {
        const char* name;
        std::optional<double> (*get)(const SeedEntry&);
    };
    static const Extractor kMetrics[] = {
        {"val_mAP", [](const SeedEntry& e) { return e.val_map; }},
        {"test_mAP", [](const SeedEntry& e) { return e.test_map; }},
        {"test_ground_mAP", [](const SeedEntry& e) { return e.test.ground.map; }},
        {"test_aerial_mAP", [](const SeedEntry& e) { return e.test.aerial.map; }},
        {"test_gap", [](const SeedEntry& e) { return e.test.gap; }},
    };
    std::vector<Stat> out;
    for (const auto& m : kMetrics) {
        Stat s;
        s.metric = m.name;
        std::vector<double> values;
        for (const auto& e : entries) {
            if (!e.ok) continue;
            if (auto v = m.get(e)) values.push_back(*v);
        }
        s.count = static_cast<int>(values.size());
        if (!values.empty()) {
            s.mean = mean_of(values);
            s.stddev = std_of(values);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string seed_report_json(const SeedReport& report) {
    ordered_json j;
    j["seeds"] = ordered_json::array();
    for (const auto& e : report.entries) {
        ordered_json je;
        je["seed"] = e.seed;
        je["ok"] = e.ok;
        if (!e.ok) je["error"] = e.error;
        je["val_mAP"] = opt_json(e.val_map);
        je["test_mAP"] = opt_json(e.test_map);
        je["test"] = nlohmann::ordered_json::parse(eval_report_json(e.test));
        j["seeds"].push_back(je);
    }
    j["stats"] = ordered_json::array();
    for (const auto& s : report.stats()) {
        ordered_json js;
        js["metric"] = s.metric;
        js["mean"] = opt_json(s.mean);
        js["std"] = opt_json(s.stddev);
        js["count"] = s.count;
        j["stats"].push_back(js);
    }
    return j.dump(2) + "\n";
}

std::string seed_report_csv(const SeedReport& report) {
    std::ostringstream oss;
    oss << "seed,ok,val_mAP,test_mAP,test_ground_mAP,test_aerial_mAP,test_gap\n";
    for (const auto& e : report.entries) {
        oss << e.seed << "," << (e.ok ? "yes" : "no") << "," << fmt(e.val_map) << ","
            << fmt(e.test_map) << "," << fmt(e.test.ground.map) << "," << fmt(e.test.aerial.map)
            << "," << fmt(e.test.gap) << "\n";
    }
    for (const auto& s : report.stats()) {
        oss << s.metric << "_mean," << fmt(s.mean) << ",,,,,\n";
        oss << s.metric << "_std," << fmt(s.stddev) << ",,,,,\n";
    }
    return oss.str();
}

}  // namespace xview::eval
