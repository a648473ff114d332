#include "xview/cpa/cpa.hpp"

#include <cmath>
#include <stdexcept>

namespace xview::cpa {

using namespace xview::num;

void TokenGrid::validate() const {
    if (tokens.ndim() != 2) throw std::invalid_argument("TokenGrid: tokens must be (N, d)");
    if (grid_h * grid_w != tokens.rows()) {
        throw std::invalid_argument("TokenGrid: grid extents do not match token count");
    }
    tokens.check_finite("TokenGrid");
}

void TextSummary::validate() const {
    if (tokens.ndim() != 2 || tokens.rows() < 1) {
        throw std::invalid_argument("TextSummary: tokens must be (L >= 1, d)");
    }
    tokens.check_finite("TextSummary");
}

double FusionResult::reconstruction_error() const {
    double err = 0.0;
    for (std::size_t i = 0; i < v_fused.size(); ++i) {
        const double expect = w[0] * v_s[i] + w[1] * v_m[i] + w[2] * v_d[i];
        err = std::max(err, std::abs(v_fused[i] - expect));
    }
    return err;
}

std::size_t CpaParams::param_count() const {
    std::size_t n = 0;
    for (const auto& ref : param_entries(const_cast<CpaParams&>(*this))) n += ref.array->size();
    return n;
}

CpaParams cpa_init(const CpaConfig& config, Rng& rng) {
    const std::size_t d = config.d;
    const std::size_t h = config.hidden_or_default();
    const std::size_t da = config.align_or_default();
    const double proj_std = 1.0 / std::sqrt(static_cast<double>(d));
    const double est_std = 1.0 / std::sqrt(static_cast<double>(5 * d));

    CpaParams p;
    p.config = config;
    p.est_w1 = rng.normal_array({5 * d, h}, 0.0, est_std);
    p.est_b1 = Array({h});
    p.est_w2 = Array({h, 3});  // zero: uniform profile at start of training
    p.est_b2 = Array({3});
    p.sp_query = rng.normal_array({d}, 0.0, 1.0);
    p.sp_wq = rng.normal_array({d, d}, 0.0, proj_std);
    p.sp_wk = rng.normal_array({d, d}, 0.0, proj_std);
    p.sp_wv = rng.normal_array({d, d}, 0.0, proj_std);
    p.md_wq = rng.normal_array({d, d}, 0.0, proj_std);
    p.md_wk = rng.normal_array({d, d}, 0.0, proj_std);
    p.md_wv = rng.normal_array({d, d}, 0.0, proj_std);
    p.md_wo = rng.normal_array({d, d}, 0.0, proj_std);
    p.dn_wq = rng.normal_array({d, d}, 0.0, proj_std);
    p.dn_wk = rng.normal_array({d, d}, 0.0, proj_std);
    p.dn_wv = rng.normal_array({d, d}, 0.0, proj_std);
    p.dn_wo = rng.normal_array({d, d}, 0.0, proj_std);
    p.gate_w = Array({3 * d + 3, 3});  // zero: uniform gate at start of training
    p.gate_b = Array({3});
    p.align_w = rng.normal_array({d, da}, 0.0, proj_std);
    return p;
}

void zero_estimator_and_gate(CpaParams& params) {
    params.est_w1.fill(0.0);
    params.est_b1.fill(0.0);
    params.est_w2.fill(0.0);
    params.est_b2.fill(0.0);
    params.gate_w.fill(0.0);
    params.gate_b.fill(0.0);
}

std::vector<ParamRef> param_entries(CpaParams& p) {
    return {
        {"cpa.est_w1", &p.est_w1},   {"cpa.est_b1", &p.est_b1},
        {"cpa.est_w2", &p.est_w2},   {"cpa.est_b2", &p.est_b2},
        {"cpa.sp_query", &p.sp_query}, {"cpa.sp_wq", &p.sp_wq},
        {"cpa.sp_wk", &p.sp_wk},     {"cpa.sp_wv", &p.sp_wv},
        {"cpa.md_wq", &p.md_wq},     {"cpa.md_wk", &p.md_wk},
        {"cpa.md_wv", &p.md_wv},     {"cpa.md_wo", &p.md_wo},
        {"cpa.dn_wq", &p.dn_wq},     {"cpa.dn_wk", &p.dn_wk},
        {"cpa.dn_wv", &p.dn_wv},     {"cpa.dn_wo", &p.dn_wo},
        {"cpa.gate_w", &p.gate_w},   {"cpa.gate_b", &p.gate_b},
        {"cpa.align_w", &p.align_w},
    };
}

std::vector<Var> CpaVars::all() const {
    return {est_w1, est_b1, est_w2, est_b2, sp_query, sp_wq, sp_wk, sp_wv, md_wq, md_wk,
            md_wv, md_wo, dn_wq, dn_wk, dn_wv, dn_wo, gate_w, gate_b, align_w};
}

CpaVars lift(const CpaParams& p, bool requires_grad) {
    CpaVars v;
    v.config = p.config;
    v.est_w1 = make_leaf(p.est_w1, requires_grad);
    v.est_b1 = make_leaf(p.est_b1, requires_grad);
    v.est_w2 = make_leaf(p.est_w2, requires_grad);
    v.est_b2 = make_leaf(p.est_b2, requires_grad);
    v.sp_query = make_leaf(p.sp_query, requires_grad);
    v.sp_wq = make_leaf(p.sp_wq, requires_grad);
    v.sp_wk = make_leaf(p.sp_wk, requires_grad);
    v.sp_wv = make_leaf(p.sp_wv, requires_grad);
    v.md_wq = make_leaf(p.md_wq, requires_grad);
    v.md_wk = make_leaf(p.md_wk, requires_grad);
    v.md_wv = make_leaf(p.md_wv, requires_grad);
    v.md_wo = make_leaf(p.md_wo, requires_grad);
    v.dn_wq = make_leaf(p.dn_wq, requires_grad);
    v.dn_wk = make_leaf(p.dn_wk, requires_grad);
    v.dn_wv = make_leaf(p.dn_wv, requires_grad);
    v.dn_wo = make_leaf(p.dn_wo, requires_grad);
    v.gate_w = make_leaf(p.gate_w, requires_grad);
    v.gate_b = make_leaf(p.gate_b, requires_grad);
    v.align_w = make_leaf(p.align_w, requires_grad);
    return v;
}

Array region_pool_matrix(std::size_t grid_h, std::size_t grid_w, std::size_t region_h,
                         std::size_t region_w) {
    if (grid_h == 0 || grid_w == 0) throw std::invalid_argument("region_pool_matrix: empty grid");
    region_h = std::min(region_h, grid_h);
    region_w = std::min(region_w, grid_w);
    const std::size_t base_h = grid_h / region_h;
    const std::size_t base_w = grid_w / region_w;
    Array pool({region_h * region_w, grid_h * grid_w});
    for (std::size_t ri = 0; ri < region_h; ++ri) {
        const std::size_t r0 = ri * base_h;
        const std::size_t r1 = (ri + 1 == region_h) ? grid_h : r0 + base_h;
        for (std::size_t rj = 0; rj < region_w; ++rj) {
            const std::size_t c0 = rj * base_w;
            const std::size_t c1 = (rj + 1 == region_w) ? grid_w : c0 + base_w;
            const std::size_t region = ri * region_w + rj;
            const double weight = 1.0 / static_cast<double>((r1 - r0) * (c1 - c0));
            for (std::size_t r = r0; r < r1; ++r)
                for (std::size_t c = c0; c < c1; ++c)
                    pool[region * grid_h * grid_w + r * grid_w + c] = weight;
        }
    }
    return pool;
}

Var estimate_complexity_v(const GridVar& grid, const Var& text, const CpaVars& p) {
    const std::size_t d = p.config.d;
    if (grid.tokens->value.cols() != d || text->value.cols() != d) {
        throw std::invalid_argument("estimate_complexity: channel width mismatch");
    }
    Var stats = concat({mean_axis(grid.tokens, 0), std_axis(grid.tokens, 0),
                        max_axis(grid.tokens, 0), mean_axis(text, 0), std_axis(text, 0)});
    Var hidden = relu(dense_layer(stats, p.est_w1, p.est_b1));
    Var logits = dense_layer(hidden, p.est_w2, p.est_b2);
    return softmax(logits, 0);
}

Var sparse_pathway_v(const GridVar& grid, const CpaVars& p) {
    const std::size_t d = p.config.d;
    Var keys = matmul(grid.tokens, p.sp_wk);
    Var values = matmul(grid.tokens, p.sp_wv);
    Var query = vecmat(p.sp_query, p.sp_wq);  // (d,)
    Var scores = matmul(reshape(query, {1, d}), transpose(keys));
    Var attn = softmax(reshape(scale(scores, 1.0 / std::sqrt(static_cast<double>(d))),
                               {grid.tokens->value.rows()}),
                       0);
    Var out = matmul(reshape(attn, {1, attn->value.size()}), values);
    return reshape(out, {d});
}

Var medium_pathway_v(const GridVar& grid, const CpaVars& p) {
    const std::size_t d = p.config.d;
    Var pool = make_constant(
        region_pool_matrix(grid.grid_h, grid.grid_w, p.config.region_h, p.config.region_w));
    Var regions = matmul(pool, grid.tokens);  // (R, d)
    Var q = matmul(regions, p.md_wq);
    Var k = matmul(regions, p.md_wk);
    Var v = matmul(regions, p.md_wv);
    Var attn = softmax(scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(d))), 1);
    Var updated = matmul(attn, v);
    return vecmat(mean_axis(updated, 0), p.md_wo);
}

Var dense_pathway_v(const GridVar& grid, const CpaVars& p) {
    const std::size_t d = p.config.d;
    Var q = matmul(grid.tokens, p.dn_wq);
    Var k = matmul(grid.tokens, p.dn_wk);
    Var v = matmul(grid.tokens, p.dn_wv);
    Var attn = softmax(scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(d))), 1);
    Var updated = matmul(attn, v);
    return vecmat(mean_axis(updated, 0), p.dn_wo);
}

FusionVars fuse_v(const Var& v_s, const Var& v_m, const Var& v_d, const Var& c, const CpaVars& p) {
    Var gate_in = concat({v_s, v_m, v_d, c});
    Var logits = dense_layer(gate_in, p.gate_w, p.gate_b);
    Var w = softmax(logits, 0);
    Var fused = add(add(scalar_mul(slice(w, 0, 1), v_s), scalar_mul(slice(w, 1, 2), v_m)),
                    scalar_mul(slice(w, 2, 3), v_d));
    return {w, fused};
}

Var align_loss_v(const Var& v_fused, const Var& text, const CpaVars& p) {
    Var text_pooled = mean_axis(text, 0);
    Var va = vecmat(v_fused, p.align_w);
    Var ta = vecmat(text_pooled, p.align_w);
    Var diff = sub(va, ta);
    return sum_all(mul(diff, diff));
}

CpaForwardVars cpa_forward_v(const GridVar& grid, const Var& text, const CpaVars& p,
                             const CpaLossWeights& weights) {
    CpaForwardVars out;
    out.c = estimate_complexity_v(grid, text, p);
    out.v_s = sparse_pathway_v(grid, p);
    out.v_m = medium_pathway_v(grid, p);
    out.v_d = dense_pathway_v(grid, p);
    out.fusion = fuse_v(out.v_s, out.v_m, out.v_d, out.c, p);
    out.align = align_loss_v(out.fusion.v_fused, text, p);
    out.gate_entropy = entropy(out.fusion.w);
    Var aux = make_scalar(0.0);
    if (weights.lambda_align != 0.0) aux = add(aux, scale(out.align, weights.lambda_align));
    if (weights.lambda_entropy != 0.0) {
        aux = add(aux, scale(out.gate_entropy, weights.lambda_entropy));
    }
    out.aux = aux;
    return out;
}

// ---- value-level wrappers ----

namespace {

GridVar lift_grid(const TokenGrid& grid) {
    grid.validate();
    return {make_constant(grid.tokens), grid.grid_h, grid.grid_w};
}

}  // namespace

ComplexityProfile estimate_complexity(const TokenGrid& grid, const TextSummary& text,
                                      const CpaParams& params) {
    text.validate();
    CpaVars vars = lift(params, false);
    Var c = estimate_complexity_v(lift_grid(grid), make_constant(text.tokens), vars);
    return {c->value};
}

Array sparse_pathway(const TokenGrid& grid, const CpaParams& params) {
    return sparse_pathway_v(lift_grid(grid), lift(params, false))->value;
}

Array medium_pathway(const TokenGrid& grid, const CpaParams& params) {
    return medium_pathway_v(lift_grid(grid), lift(params, false))->value;
}

Array dense_pathway(const TokenGrid& grid, const CpaParams& params) {
    return dense_pathway_v(lift_grid(grid), lift(params, false))->value;
}

FusionResult fuse(const Array& v_s, const Array& v_m, const Array& v_d,
                  const ComplexityProfile& profile, const CpaParams& params) {
    CpaVars vars = lift(params, false);
    FusionVars fv = fuse_v(make_constant(v_s), make_constant(v_m), make_constant(v_d),
                           make_constant(profile.c), vars);
    FusionResult result;
    result.v_s = v_s;
    result.v_m = v_m;
    result.v_d = v_d;
    result.w = fv.w->value;
    result.v_fused = fv.v_fused->value;
    result.profile = profile;
    return result;
}

double align_loss(const Array& v_fused, const TextSummary& text, const CpaParams& params) {
    text.validate();
    CpaVars vars = lift(params, false);
    return align_loss_v(make_constant(v_fused), make_constant(text.tokens), vars)->value.item();
}

double entropy_reg(const Array& w) { return entropy(make_constant(w))->value.item(); }

CpaForwardResult cpa_forward(const TokenGrid& grid, const TextSummary& text,
                             const CpaParams& params, const CpaLossWeights& weights) {
    text.validate();
    CpaVars vars = lift(params, false);
    CpaForwardVars fv = cpa_forward_v(lift_grid(grid), make_constant(text.tokens), vars, weights);
    CpaForwardResult result;
    result.fusion.v_s = fv.v_s->value;
    result.fusion.v_m = fv.v_m->value;
    result.fusion.v_d = fv.v_d->value;
    result.fusion.w = fv.fusion.w->value;
    result.fusion.v_fused = fv.fusion.v_fused->value;
    result.fusion.profile = ComplexityProfile{fv.c->value};
    result.align = fv.align->value.item();
    result.gate_entropy = fv.gate_entropy->value.item();
    result.aux_loss = fv.aux->value.item();
    return result;
}

}  // namespace xview::cpa
