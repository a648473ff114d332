#include "xview/numerics/array.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace xview::num {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    return n;
}

Array::Array(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
    for (std::size_t s : shape_) {
        if (s == 0) throw std::invalid_argument("Array: zero extent in shape");
    }
}

Array::Array(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != data_.size()) {
        throw std::invalid_argument("Array: shape/data length mismatch");
    }
    for (std::size_t s : shape_) {
        if (s == 0) throw std::invalid_argument("Array: zero extent in shape");
    }
}

Array Array::scalar(double v) { return Array({1}, {v}); }

Array Array::zeros_like(const Array& other) { return Array(other.shape_); }

std::size_t Array::rows() const {
    if (ndim() != 2) throw std::invalid_argument("Array::rows: not 2-D");
    return shape_[0];
}

std::size_t Array::cols() const {
    if (ndim() != 2) throw std::invalid_argument("Array::cols: not 2-D");
    return shape_[1];
}

double& Array::at(std::size_t i, std::size_t j) {
    if (ndim() != 2) throw std::invalid_argument("Array::at: not 2-D");
    return data_[i * shape_[1] + j];
}

double Array::at(std::size_t i, std::size_t j) const {
    if (ndim() != 2) throw std::invalid_argument("Array::at: not 2-D");
    return data_[i * shape_[1] + j];
}

double Array::item() const {
    if (size() != 1) throw std::invalid_argument("Array::item: size != 1");
    return data_[0];
}

void Array::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Array::check_finite(const std::string& op) const {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            throw std::domain_error("non-finite value produced by " + op);
        }
    }
}

std::string Array::shape_str() const {
    std::ostringstream oss;
    oss << "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) oss << ",";
        oss << shape_[i];
    }
    oss << ")";
    return oss.str();
}

namespace {

void require_same_shape(const Array& a, const Array& b, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                                    " vs " + b.shape_str());
    }
}

}  // namespace

Array matmul_raw(const Array& a, const Array& b) {
    if (a.ndim() != 2 || b.ndim() != 2) throw std::invalid_argument("matmul: operands must be 2-D");
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: inner extents differ, " + a.shape_str() + " x " +
                                    b.shape_str());
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Array out({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = out.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = pa[i * k + p];
            const double* brow = pb + p * n;
            double* crow = pc + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
    return out;
}

Array transpose_raw(const Array& a) {
    if (a.ndim() != 2) throw std::invalid_argument("transpose: operand must be 2-D");
    const std::size_t m = a.rows(), n = a.cols();
    Array out({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
    return out;
}

Array add_raw(const Array& a, const Array& b) {
    require_same_shape(a, b, "add");
    Array out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

Array sub_raw(const Array& a, const Array& b) {
    require_same_shape(a, b, "sub");
    Array out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

Array mul_raw(const Array& a, const Array& b) {
    require_same_shape(a, b, "mul");
    Array out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    return out;
}

Array scale_raw(const Array& a, double c) {
    Array out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
    return out;
}

Array relu_raw(const Array& a) {
    Array out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
    return out;
}

Array add_rowwise_raw(const Array& m, const Array& v) {
    if (m.ndim() != 2 || v.ndim() != 1 || v.size() != m.cols()) {
        throw std::invalid_argument("add_rowwise: want (N,K) and (K,), got " + m.shape_str() +
                                    " and " + v.shape_str());
    }
    Array out = m;
    const std::size_t n = m.rows(), k = m.cols();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) out[i * k + j] += v[j];
    return out;
}

Array softmax_raw(const Array& x, std::size_t axis) {
    if (x.ndim() == 1) {
        if (axis != 0) throw std::invalid_argument("softmax: 1-D array has only axis 0");
        Array out = x;
        double mx = out[0];
        for (std::size_t i = 1; i < out.size(); ++i) mx = std::max(mx, out[i]);
        double sum = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = std::exp(out[i] - mx);
            sum += out[i];
        }
        for (std::size_t i = 0; i < out.size(); ++i) out[i] /= sum;
        return out;
    }
    if (x.ndim() != 2 || axis > 1) throw std::invalid_argument("softmax: want 1-D or 2-D, axis 0/1");
    if (axis == 0) return transpose_raw(softmax_raw(transpose_raw(x), 1));
    const std::size_t n = x.rows(), k = x.cols();
    Array out = x;
    for (std::size_t i = 0; i < n; ++i) {
        double* row = out.data() + i * k;
        double mx = row[0];
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (std::size_t j = 0; j < k; ++j) row[j] /= sum;
    }
    return out;
}

}  // namespace xview::num
