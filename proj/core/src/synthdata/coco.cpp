#include "xview/synthdata/coco.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace xview::synth {

using ordered_json = nlohmann::ordered_json;

std::string pair_file_name(std::int64_t pair_id, View view) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "pair%06lld_%s.png", static_cast<long long>(pair_id),
                  view_name(view));
    return buf;
}

void parse_pair_file_name(const std::string& name, std::int64_t& pair_id, View& view) {
    const auto fail = [&] {
        throw std::invalid_argument("file_name '" + name +
                                    "' does not follow pair<NNNNNN>_<view>.png");
    };
    if (name.rfind("pair", 0) != 0) fail();
    const auto underscore = name.find('_');
    const auto dot = name.rfind('.');
    if (underscore == std::string::npos || dot == std::string::npos || dot <= underscore) fail();
    const std::string digits = name.substr(4, underscore - 4);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) fail();
    pair_id = std::stoll(digits);
    const std::string view_str = name.substr(underscore + 1, dot - underscore - 1);
    if (view_str != "ground" && view_str != "aerial") fail();
    view = parse_view(view_str);
}

CocoDocument to_coco(const std::vector<SceneSample>& samples,
                     const std::vector<std::string>& category_names) {
    CocoDocument doc;
    for (std::size_t i = 0; i < category_names.size(); ++i) {
        doc.categories.push_back({static_cast<int>(i) + 1, category_names[i]});
    }
    std::int64_t next_ann = 1;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const auto& sample = samples[s];
        sample.validate();
        const std::int64_t image_id = static_cast<std::int64_t>(s) + 1;
        doc.images.push_back({image_id, pair_file_name(sample.pair_id, sample.view),
                              sample.image_w, sample.image_h});
        for (std::size_t b = 0; b < sample.boxes.size(); ++b) {
            const auto& box = sample.boxes[b];
            doc.annotations.push_back(
                {next_ann++, image_id, sample.categories[b] + 1, box.x, box.y, box.w, box.h});
        }
    }
    return doc;
}

std::vector<SceneSample> from_coco(const CocoDocument& doc) {
    std::set<std::int64_t> image_ids;
    std::set<int> category_ids;
    for (const auto& img : doc.images) image_ids.insert(img.id);
    for (const auto& cat : doc.categories) category_ids.insert(cat.id);

    std::vector<std::string> dangling;
    for (const auto& ann : doc.annotations) {
        if (!image_ids.count(ann.image_id)) {
            dangling.push_back("annotation " + std::to_string(ann.id) + " -> missing image " +
                               std::to_string(ann.image_id));
        }
        if (!category_ids.count(ann.category_id)) {
            dangling.push_back("annotation " + std::to_string(ann.id) + " -> missing category " +
                               std::to_string(ann.category_id));
        }
    }
    if (!dangling.empty()) {
        std::string msg = "coco document has dangling references:";
        for (const auto& d : dangling) msg += "\n  " + d;
        throw std::invalid_argument(msg);
    }

    std::map<std::int64_t, SceneSample> by_image;
    std::map<std::int64_t, std::vector<const CocoAnnotation*>> anns_by_image;
    for (const auto& ann : doc.annotations) anns_by_image[ann.image_id].push_back(&ann);

    std::vector<SceneSample> out;
    out.reserve(doc.images.size());
    for (const auto& img : doc.images) {
        SceneSample sample;
        parse_pair_file_name(img.file_name, sample.pair_id, sample.view);
        sample.image_w = img.width;
        sample.image_h = img.height;
        auto it = anns_by_image.find(img.id);
        if (it != anns_by_image.end()) {
            // Annotation ids give a stable object order.
            auto anns = it->second;
            std::sort(anns.begin(), anns.end(),
                      [](const CocoAnnotation* a, const CocoAnnotation* b) { return a->id < b->id; });
            for (const auto* ann : anns) {
                sample.boxes.push_back({ann->x, ann->y, ann->w, ann->h});
                sample.categories.push_back(ann->category_id - 1);
            }
        }
        sample.validate();
        out.push_back(std::move(sample));
    }
    return out;
}

void save_coco(const std::vector<SceneSample>& samples,
               const std::vector<std::string>& category_names,
               const std::filesystem::path& path) {
    const CocoDocument doc = to_coco(samples, category_names);
    ordered_json j;
    j["images"] = ordered_json::array();
    for (const auto& img : doc.images) {
        ordered_json ji;
        ji["id"] = img.id;
        ji["file_name"] = img.file_name;
        ji["width"] = img.width;
        ji["height"] = img.height;
        j["images"].push_back(ji);
    }
    j["annotations"] = ordered_json::array();
    for (const auto& ann : doc.annotations) {
        ordered_json ja;
        ja["id"] = ann.id;
        ja["image_id"] = ann.image_id;
        ja["category_id"] = ann.category_id;
        ja["bbox"] = {ann.x, ann.y, ann.w, ann.h};
        ja["area"] = ann.w * ann.h;
        ja["iscrowd"] = 0;
        j["annotations"].push_back(ja);
    }
    j["categories"] = ordered_json::array();
    for (const auto& cat : doc.categories) {
        ordered_json jc;
        jc["id"] = cat.id;
        jc["name"] = cat.name;
        j["categories"].push_back(jc);
    }

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw std::runtime_error("save_coco: cannot open " + tmp);
        f << j.dump(2) << "\n";
        if (!f) throw std::runtime_error("save_coco: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::vector<SceneSample> load_coco(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_coco: cannot open " + path.string());
    ordered_json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_coco: malformed JSON in " + path.string() + ": " + e.what());
    }
    CocoDocument doc;
    for (const auto& ji : j.at("images")) {
        doc.images.push_back({ji.at("id").get<std::int64_t>(), ji.at("file_name").get<std::string>(),
                              ji.at("width").get<double>(), ji.at("height").get<double>()});
    }
    for (const auto& ja : j.at("annotations")) {
        const auto& bbox = ja.at("bbox");
        if (!bbox.is_array() || bbox.size() != 4) {
            throw std::runtime_error("load_coco: bbox must be [x,y,w,h]");
        }
        doc.annotations.push_back({ja.at("id").get<std::int64_t>(),
                                   ja.at("image_id").get<std::int64_t>(),
                                   ja.at("category_id").get<int>(), bbox[0].get<double>(),
                                   bbox[1].get<double>(), bbox[2].get<double>(),
                                   bbox[3].get<double>()});
    }
    for (const auto& jc : j.at("categories")) {
        doc.categories.push_back({jc.at("id").get<int>(), jc.at("name").get<std::string>()});
    }
    return from_coco(doc);
}

}  // namespace xview::synth
