#pragma once

#include <vector>

namespace xview::eval {

// Axis-aligned box, top-left corner plus extent, in image pixels.
struct Box {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const noexcept { return w * h; }
};

struct Detection {
    Box box;
    int category = 0;
    double score = 1.0;
};

struct GroundTruth {
    Box box;
    int category = 0;
};

// Intersection area over union area; 0 for disjoint boxes.
double iou(const Box& a, const Box& b);

// Canonical ordering used everywhere detections must be ranked: score
// descending, then (y, x, w, h) ascending. With equal-weight scores this key
// makes every downstream result independent of input order.
bool detection_order(const Detection& a, const Detection& b);

// Greedy per-category suppression: iterate in canonical order, keep a
// detection iff its IoU with every kept same-category detection is <= thresh.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_thresh = 0.5);

}  // namespace xview::eval
