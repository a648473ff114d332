#include "xview/evalkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace xview::eval {

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean_of: empty input");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
    const double mu = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - mu) * (x - mu);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

namespace {

double beta_cf(double a, double b, double x) {
    // Lentz continued fraction for the incomplete beta.
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double t_two_sided_p(double t, double dof) {
    // p = I_{dof/(dof+t^2)}(dof/2, 1/2)
    const double x = dof / (dof + t * t);
    return incomplete_beta(dof / 2.0, 0.5, x);
}

std::vector<double> mid_ranks(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("pearson: length mismatch");
    const std::size_t n = xs.size();
    if (n < 3) throw std::invalid_argument("pearson: need at least 3 samples");

    // Welford-style running co-moment.
    double mx = 0.0, my = 0.0, cxy = 0.0, cxx = 0.0, cyy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double k = 1.0 / static_cast<double>(i + 1);
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        mx += dx * k;
        my += dy * k;
        cxy += dx * (ys[i] - my);
        cxx += dx * (xs[i] - mx);
        cyy += dy * (ys[i] - my);
    }

    Correlation out;
    out.n = n;
    if (cxx <= 0.0 || cyy <= 0.0) return out;  // constant series: undefined
    out.defined = true;
    out.r = cxy / std::sqrt(cxx * cyy);
    out.r = std::clamp(out.r, -1.0, 1.0);
    const double dof = static_cast<double>(n - 2);
    if (std::abs(out.r) >= 1.0) {
        out.p_value = 0.0;
    } else {
        const double t = out.r * std::sqrt(dof / (1.0 - out.r * out.r));
        out.p_value = t_two_sided_p(t, dof);
    }
    return out;
}

Correlation spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    return pearson(mid_ranks(xs), mid_ranks(ys));
}

}  // namespace xview::eval
