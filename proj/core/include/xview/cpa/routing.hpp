#pragma once

#include <string>
#include <vector>

#include "xview/evalkit/stats.hpp"

namespace xview::cpa {

// One per-sample routing record: gate weights and complexity profile next to
// the sample's labeled object count.
struct RoutingRow {
    std::string sample_id;
    std::string view;  // "ground" | "aerial"
    int object_count = 0;
    double w_s = 0.0, w_m = 0.0, w_d = 0.0;
    double c_s = 0.0, c_m = 0.0, c_d = 0.0;
};

struct RoutingTable {
    std::vector<RoutingRow> rows;
    // Pearson correlations of each gate weight against object count.
    eval::Correlation r_sparse, r_medium, r_dense;
    // Rank correlation of the dense complexity component against object count.
    eval::Correlation spearman_c_dense;
};

// Computes the correlations over the rows. Throws std::invalid_argument for
// fewer than 3 rows (correlation undefined); constant routing is reported as
// defined=false, never as a number.
RoutingTable build_routing_table(std::vector<RoutingRow> rows);

// CSV with the fixed header
// sample_id,view,object_count,w_s,w_m,w_d,c_s,c_m,c_d
std::string routing_csv(const RoutingTable& table);
// Correlation summary as JSON (r, p, n, defined flags per pathway).
std::string routing_summary_json(const RoutingTable& table);

}  // namespace xview::cpa
