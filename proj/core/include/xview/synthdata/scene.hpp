#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xview/cpa/cpa.hpp"
#include "xview/evalkit/boxes.hpp"

namespace xview::synth {

enum class View { ground, aerial };

const char* view_name(View v);
View parse_view(const std::string& name);

// One image's worth of data: rendered feature grid, labels, and the pairing
// metadata linking the two views of a location.
struct SceneSample {
    cpa::TokenGrid features;  // may be empty until rendered
    std::vector<eval::Box> boxes;
    std::vector<int> categories;  // ids in [0, C)
    View view = View::ground;
    std::int64_t pair_id = -1;
    double image_w = 0.0;
    double image_h = 0.0;

    void validate() const;  // boxes inside extent, positive extents, list lengths match
    std::vector<eval::GroundTruth> truths() const;
};

// Flat list plus the pair structure over it.
struct PairedDataset {
    std::vector<SceneSample> flat;
    // indices into `flat`: (ground member, aerial member) per pair
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

// Groups samples by pair id; every pair id must occur exactly twice with
// opposite views.
PairedDataset build_paired(std::vector<SceneSample> samples);

}  // namespace xview::synth
