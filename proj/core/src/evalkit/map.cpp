#include "xview/evalkit/map.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace xview::eval {

namespace {

struct RankedDet {
    Detection det;
    std::size_t image = 0;
};

// Precision/recall accumulation for one category at one threshold/range.
std::optional<double> ap_single_category(const std::vector<std::vector<Detection>>& dets_by_image,
                                         const std::vector<std::vector<GroundTruth>>& truths_by_image,
                                         int category, double iou_thresh, AreaRange range) {
    std::size_t total_real = 0;
    for (const auto& truths : truths_by_image) {
        for (const auto& t : truths) {
            if (t.category == category && range.contains(t.box.area())) ++total_real;
        }
    }
    if (total_real == 0) return std::nullopt;

    std::vector<RankedDet> ranked;
    for (std::size_t img = 0; img < dets_by_image.size(); ++img) {
        for (const auto& d : dets_by_image[img]) {
            if (d.category == category) ranked.push_back({d, img});
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedDet& a, const RankedDet& b) {
        if (a.det.score != b.det.score) return detection_order(a.det, b.det);
        if (a.image != b.image) return a.image < b.image;
        return detection_order(a.det, b.det);
    });

    std::vector<std::vector<bool>> gt_used(truths_by_image.size());
    for (std::size_t img = 0; img < truths_by_image.size(); ++img) {
        gt_used[img].assign(truths_by_image[img].size(), false);
    }

    std::vector<double> precision, recall;
    std::size_t tp = 0, fp = 0;
    for (const auto& rd : ranked) {
        const auto& truths = truths_by_image[rd.image];
        int best_real = -1, best_ignored = -1;
        double best_real_iou = 0.0, best_ignored_iou = 0.0;
        for (std::size_t g = 0; g < truths.size(); ++g) {
            if (truths[g].category != category || gt_used[rd.image][g]) continue;
            const double v = iou(rd.det.box, truths[g].box);
            if (v < iou_thresh) continue;
            if (range.contains(truths[g].box.area())) {
                if (v > best_real_iou || best_real < 0) {
                    best_real_iou = v;
                    best_real = static_cast<int>(g);
                }
            } else {
                if (v > best_ignored_iou || best_ignored < 0) {
                    best_ignored_iou = v;
                    best_ignored = static_cast<int>(g);
                }
            }
        }
        if (best_real >= 0) {
            gt_used[rd.image][static_cast<std::size_t>(best_real)] = true;
            ++tp;
        } else if (best_ignored >= 0) {
            // Matched an out-of-range truth: neither TP nor FP.
            gt_used[rd.image][static_cast<std::size_t>(best_ignored)] = true;
            continue;
        } else if (!range.contains(rd.det.box.area())) {
            // Unmatched and itself out of range: ignored.
            continue;
        } else {
            ++fp;
        }
        precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(total_real));
    }

    // 101-point interpolation: mean over r in {0.00..1.00} of the maximum
    // precision at recall >= r.
    double ap = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double r = static_cast<double>(i) / 100.0;
        double best = 0.0;
        for (std::size_t j = 0; j < precision.size(); ++j) {
            if (recall[j] >= r) best = std::max(best, precision[j]);
        }
        ap += best;
    }
    return ap / 101.0;
}

}  // namespace

std::optional<double> average_precision(const std::vector<std::vector<Detection>>& dets_by_image,
                                        const std::vector<std::vector<GroundTruth>>& truths_by_image,
                                        double iou_thresh, AreaRange range) {
    if (dets_by_image.size() != truths_by_image.size()) {
        throw std::invalid_argument("average_precision: image count mismatch");
    }
    std::set<int> cats;
    for (const auto& truths : truths_by_image) {
        for (const auto& t : truths) cats.insert(t.category);
    }
    double sum = 0.0;
    int defined = 0;
    for (int c : cats) {
        const auto ap = ap_single_category(dets_by_image, truths_by_image, c, iou_thresh, range);
        if (ap) {
            sum += *ap;
            ++defined;
        }
    }
    if (defined == 0) return std::nullopt;
    return sum / defined;
}

MetricBlock coco_map(const std::vector<std::vector<Detection>>& dets_by_image,
                     const std::vector<std::vector<GroundTruth>>& truths_by_image,
                     AreaBounds bounds) {
    if (dets_by_image.size() != truths_by_image.size()) {
        throw std::invalid_argument("coco_map: image count mismatch");
    }
    MetricBlock block;
    block.samples = static_cast<int>(truths_by_image.size());
    bool any_truth = false;
    for (const auto& truths : truths_by_image) any_truth = any_truth || !truths.empty();
    if (!any_truth) return block;  // marked empty, not zero
    block.present = true;

    const AreaRange all{};
    const AreaRange small{0.0, bounds.small_max};
    const AreaRange medium{bounds.small_max, bounds.medium_max};
    const AreaRange large{bounds.medium_max, 1e18};

    auto swept = [&](AreaRange range) -> std::optional<double> {
        double sum = 0.0;
        int defined = 0;
        for (int i = 0; i < 10; ++i) {
            const double t = 0.50 + 0.05 * i;
            const auto ap = average_precision(dets_by_image, truths_by_image, t, range);
            if (ap) {
                sum += *ap;
                ++defined;
            }
        }
        if (defined == 0) return std::nullopt;
        return 100.0 * sum / defined;
    };
    auto at = [&](double t) -> std::optional<double> {
        const auto ap = average_precision(dets_by_image, truths_by_image, t, all);
        if (!ap) return std::nullopt;
        return 100.0 * *ap;
    };

    block.map = swept(all);
    block.map50 = at(0.50);
    block.map75 = at(0.75);
    block.map_s = swept(small);
    block.map_m = swept(medium);
    block.map_l = swept(large);
    return block;
}

}  // namespace xview::eval
