#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xview/numerics/array.hpp"
#include "xview/numerics/autodiff.hpp"
#include "xview/numerics/random.hpp"

namespace xview::cpa {

using num::Array;
using num::Var;

// Visual feature tokens on an H x W spatial grid, row-major, d channels.
struct TokenGrid {
    Array tokens;  // (grid_h * grid_w, d)
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;

    void validate() const;  // throws on extent mismatch or non-finite values
    std::size_t count() const { return grid_h * grid_w; }
    std::size_t channels() const { return tokens.cols(); }
};

// Embedded prompt/category tokens, (L, d) with L >= 1.
struct TextSummary {
    Array tokens;
    void validate() const;
};

// Soft scene-complexity profile [c_sparse, c_medium, c_dense] on the 3-simplex.
struct ComplexityProfile {
    Array c;  // (3,)
};

struct FusionResult {
    Array v_s, v_m, v_d;  // (d,) pathway outputs
    Array w;              // (3,) gate weights on the simplex
    Array v_fused;        // (d,)
    ComplexityProfile profile;

    // Max elementwise |v_fused - sum_p w_p v_p|.
    double reconstruction_error() const;
};

struct CpaConfig {
    std::size_t d = 32;
    std::size_t hidden = 0;     // 0 -> 2*d
    std::size_t align_dim = 0;  // 0 -> d
    std::size_t region_h = 2;   // region grid for the medium pathway
    std::size_t region_w = 2;

    std::size_t hidden_or_default() const { return hidden ? hidden : 2 * d; }
    std::size_t align_or_default() const { return align_dim ? align_dim : d; }
};

struct CpaLossWeights {
    double lambda_align = 0.1;
    double lambda_entropy = 0.01;   // per-sample gate confidence pressure
    double lambda_balance = 0.01;   // batch-mean anti-collapse pressure (applied by the trainer)
};

// All learned CPA parameters. The complexity estimator's output layer and the
// whole gate start at zero so the profile and the gate weights are exactly
// uniform before any update.
struct CpaParams {
    CpaConfig config;
    // complexity estimator: 5d -> hidden -> 3, ReLU in between
    Array est_w1, est_b1, est_w2, est_b2;
    // sparse pathway: learned query + query/key/value projections
    Array sp_query, sp_wq, sp_wk, sp_wv;
    // medium pathway: cross-region attention projections + output projection
    Array md_wq, md_wk, md_wv, md_wo;
    // dense pathway: self-attention projections + output projection
    Array dn_wq, dn_wk, dn_wv, dn_wo;
    // gate: (3d+3) -> 3
    Array gate_w, gate_b;
    // shared aligner: d -> align_dim, applied to both modalities
    Array align_w;

    std::size_t param_count() const;
};

CpaParams cpa_init(const CpaConfig& config, num::Rng& rng);
// Zeroes the estimator and gate blocks; pathway/aligner weights are left as
// they are.
void zero_estimator_and_gate(CpaParams& params);

struct ParamRef {
    std::string name;
    Array* array;
};
std::vector<ParamRef> param_entries(CpaParams& params);

// ---- graph-level interface (used by the trainer and grad checks) ----

// Leaf vars over the parameter arrays, created once per forward pass.
struct CpaVars {
    Var est_w1, est_b1, est_w2, est_b2;
    Var sp_query, sp_wq, sp_wk, sp_wv;
    Var md_wq, md_wk, md_wv, md_wo;
    Var dn_wq, dn_wk, dn_wv, dn_wo;
    Var gate_w, gate_b;
    Var align_w;
    CpaConfig config;

    std::vector<Var> all() const;
};
CpaVars lift(const CpaParams& params, bool requires_grad);

struct GridVar {
    Var tokens;
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;
};

Var estimate_complexity_v(const GridVar& grid, const Var& text, const CpaVars& p);  // (3,)
Var sparse_pathway_v(const GridVar& grid, const CpaVars& p);                        // (d,)
Var medium_pathway_v(const GridVar& grid, const CpaVars& p);                        // (d,)
Var dense_pathway_v(const GridVar& grid, const CpaVars& p);                         // (d,)

struct FusionVars {
    Var w;        // (3,)
    Var v_fused;  // (d,)
};
FusionVars fuse_v(const Var& v_s, const Var& v_m, const Var& v_d, const Var& c, const CpaVars& p);

Var align_loss_v(const Var& v_fused, const Var& text, const CpaVars& p);  // scalar

struct CpaForwardVars {
    Var c;         // (3,)
    Var v_s, v_m, v_d;
    FusionVars fusion;
    Var align;     // L2^2 alignment distance
    Var gate_entropy;
    Var aux;       // lambda_align * align + lambda_entropy * gate_entropy
};
CpaForwardVars cpa_forward_v(const GridVar& grid, const Var& text, const CpaVars& p,
                             const CpaLossWeights& weights);

// ---- value-level interface (inference-style wrappers over the graph ops) ----

ComplexityProfile estimate_complexity(const TokenGrid& grid, const TextSummary& text,
                                      const CpaParams& params);
Array sparse_pathway(const TokenGrid& grid, const CpaParams& params);
Array medium_pathway(const TokenGrid& grid, const CpaParams& params);
Array dense_pathway(const TokenGrid& grid, const CpaParams& params);
FusionResult fuse(const Array& v_s, const Array& v_m, const Array& v_d,
                  const ComplexityProfile& profile, const CpaParams& params);
double align_loss(const Array& v_fused, const TextSummary& text, const CpaParams& params);
// Shannon entropy of a simplex vector, natural log; 0*log(0) := 0.
double entropy_reg(const Array& w);

struct CpaForwardResult {
    FusionResult fusion;
    double align = 0.0;
    double gate_entropy = 0.0;
    double aux_loss = 0.0;
};
CpaForwardResult cpa_forward(const TokenGrid& grid, const TextSummary& text,
                             const CpaParams& params, const CpaLossWeights& weights);

// Region pooling matrix for the medium pathway: (R, N) row-stochastic matrix
// averaging each spatial region's tokens. When an extent is not divisible by
// the region count the last region absorbs the remainder.
Array region_pool_matrix(std::size_t grid_h, std::size_t grid_w, std::size_t region_h,
                         std::size_t region_w);

}  // namespace xview::cpa
