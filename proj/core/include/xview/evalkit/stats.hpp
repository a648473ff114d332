#pragma once

#include <optional>
#include <vector>

namespace xview::eval {

// Population mean/std (divide by n) over a sample vector.
double mean_of(const std::vector<double>& xs);
double std_of(const std::vector<double>& xs);

struct Correlation {
    bool defined = false;  // false when either series has zero variance
    double r = 0.0;
    double p_value = 1.0;  // two-sided, Student-t with n-2 dof
    std::size_t n = 0;
};

// Pearson correlation via a single-pass co-moment recurrence (Welford form).
// Throws std::invalid_argument for fewer than 3 points; flags `defined=false`
// when a series is constant.
Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Spearman rank correlation (mid-ranks on ties), same definedness rules.
Correlation spearman(const std::vector<double>& xs, const std::vector<double>& ys);

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation; used for the Student-t tail probability.
double incomplete_beta(double a, double b, double x);

}  // namespace xview::eval
