#include "xview/cpa/routing.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace xview::cpa {

RoutingTable build_routing_table(std::vector<RoutingRow> rows) {
    if (rows.size() < 3) {
        throw std::invalid_argument("routing trace: need at least 3 samples for correlations");
    }
    RoutingTable table;
    table.rows = std::move(rows);
    std::vector<double> count, ws, wm, wd, cd;
    count.reserve(table.rows.size());
    for (const auto& r : table.rows) {
        count.push_back(static_cast<double>(r.object_count));
        ws.push_back(r.w_s);
        wm.push_back(r.w_m);
        wd.push_back(r.w_d);
        cd.push_back(r.c_d);
    }
    table.r_sparse = eval::pearson(ws, count);
    table.r_medium = eval::pearson(wm, count);
    table.r_dense = eval::pearson(wd, count);
    table.spearman_c_dense = eval::spearman(cd, count);
    return table;
}

std::string routing_csv(const RoutingTable& table) {
    std::ostringstream oss;
    oss << "sample_id,view,object_count,w_s,w_m,w_d,c_s,c_m,c_d\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    for (const auto& r : table.rows) {
        oss << r.sample_id << "," << r.view << "," << r.object_count << "," << num(r.w_s) << ","
            << num(r.w_m) << "," << num(r.w_d) << "," << num(r.c_s) << "," << num(r.c_m) << ","
            << num(r.c_d) << "\n";
    }
    return oss.str();
}

std::string routing_summary_json(const RoutingTable& table) {
    using ordered_json = nlohmann::ordered_json;
    auto corr_json = [](const eval::Correlation& c) {
        ordered_json j;
        j["defined"] = c.defined;
        if (c.defined) {
            j["r"] = c.r;
            j["p_value"] = c.p_value;
        } else {
            j["r"] = nullptr;
            j["p_value"] = nullptr;
        }
        j["n"] = c.n;
        return j;
    };
    ordered_json j;
    j["samples"] = table.rows.size();
    j["pearson_w_sparse_vs_count"] = corr_json(table.r_sparse);
    j["pearson_w_medium_vs_count"] = corr_json(table.r_medium);
    j["pearson_w_dense_vs_count"] = corr_json(table.r_dense);
    j["spearman_c_dense_vs_count"] = corr_json(table.spearman_c_dense);
    return j.dump(2) + "\n";
}

}  // namespace xview::cpa
