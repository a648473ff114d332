#pragma once

#include <optional>
#include <vector>

#include "xview/evalkit/boxes.hpp"

namespace xview::eval {

// COCO object-area buckets (px^2), rescalable via config for other image
// sizes. Small: area < small_max. Medium: small_max <= area < medium_max.
struct AreaBounds {
    double small_max = 32.0 * 32.0;
    double medium_max = 96.0 * 96.0;
};

struct AreaRange {
    double lo = 0.0;
    double hi = 1e18;
    bool contains(double area) const noexcept { return area >= lo && area < hi; }
};

// Single-category average precision at one IoU threshold over a set of
// images. Matching is greedy in canonical detection order: each detection
// takes the unmatched in-range truth of highest IoU >= thresh; if only
// out-of-range truths qualify the detection is ignored; unmatched detections
// whose own area is out of range are ignored as well. AP is the 101-point
// interpolated area under the precision-recall staircase.
//
// Returns nullopt when the range contains no truths (undefined AP).
std::optional<double> average_precision(const std::vector<std::vector<Detection>>& dets_by_image,
                                        const std::vector<std::vector<GroundTruth>>& truths_by_image,
                                        double iou_thresh, AreaRange range = {});

// One table row: every value is a percentage in [0, 100]. A column is absent
// when no truth falls in its bucket. `present` is false when the evaluated
// set has no truths at all.
struct MetricBlock {
    bool present = false;
    std::optional<double> map;
    std::optional<double> map50;
    std::optional<double> map75;
    std::optional<double> map_s;
    std::optional<double> map_m;
    std::optional<double> map_l;  // computed but not surfaced in reports
    int samples = 0;
};

// IoU-swept evaluation: AP averaged over thresholds 0.50:0.05:0.95 and over
// the categories present in the truths; mAP50/mAP75 are single-threshold
// slices; mAP_S / mAP_M / mAP_L restrict matching by object area.
MetricBlock coco_map(const std::vector<std::vector<Detection>>& dets_by_image,
                     const std::vector<std::vector<GroundTruth>>& truths_by_image,
                     AreaBounds bounds = {});

}  // namespace xview::eval
