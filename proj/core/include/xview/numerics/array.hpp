#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace xview::num {

// Dense row-major array of 64-bit floats. Every public operation checks its
// result for NaN/Inf and throws std::domain_error instead of propagating
// non-finite values silently.
class Array {
public:
    Array() = default;
    explicit Array(std::vector<std::size_t> shape);
    Array(std::vector<std::size_t> shape, std::vector<double> data);

    static Array scalar(double v);
    static Array zeros_like(const Array& other);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t ndim() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    // 2-D accessors; throw unless ndim()==2.
    std::size_t rows() const;
    std::size_t cols() const;
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    const std::vector<double>& vec() const noexcept { return data_; }

    // Value of a single-element array.
    double item() const;

    bool same_shape(const Array& other) const noexcept { return shape_ == other.shape_; }
    void fill(double v);

    // Throws std::domain_error naming `op` if any element is NaN/Inf.
    void check_finite(const std::string& op) const;

    std::string shape_str() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Raw (non-differentiable) kernels shared by the autodiff forward passes and
// the inference fast path.
Array matmul_raw(const Array& a, const Array& b);
Array transpose_raw(const Array& a);
Array add_raw(const Array& a, const Array& b);
Array sub_raw(const Array& a, const Array& b);
Array mul_raw(const Array& a, const Array& b);
Array scale_raw(const Array& a, double c);
Array relu_raw(const Array& a);
Array add_rowwise_raw(const Array& m, const Array& v);
// Numerically stable softmax. For 2-D arrays `axis` selects rows (1) or
// columns (0); 1-D arrays use axis 0.
Array softmax_raw(const Array& x, std::size_t axis);

std::size_t shape_product(const std::vector<std::size_t>& shape);

}  // namespace xview::num
