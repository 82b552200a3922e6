#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <vector>

#include "rfgan/common.hpp"

namespace rfgan {

// Dense n-dimensional array of scalars in row-major order. Rank 0 is a
// scalar (one element). Immutable shape; element storage is plain and
// contiguous so kernels can work on raw spans.
template <class T>
class Tensor {
public:
    Tensor() : shape_{}, data_(1, T(0)) {}

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(checked_count(shape_), T(0)) {}

    Tensor(std::vector<std::size_t> shape, std::vector<T> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        require(data_.size() == checked_count(shape_),
                "Tensor: data length does not match shape product");
    }

    static Tensor scalar(T v) {
        Tensor t;
        t.data_[0] = v;
        return t;
    }

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

    static Tensor filled(std::vector<std::size_t> shape, T v) {
        Tensor t(std::move(shape));
        for (T& x : t.data_) x = v;
        return t;
    }

    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }

    // 2-D conveniences
    std::size_t rows() const { return rank() == 2 ? shape_[0] : (fail_2d(), 0); }
    std::size_t cols() const { return rank() == 2 ? shape_[1] : (fail_2d(), 0); }
    T& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    T at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<T> span() { return {data_.data(), data_.size()}; }
    std::span<const T> span() const { return {data_.data(), data_.size()}; }
    T& operator[](std::size_t i) { return data_[i]; }
    T operator[](std::size_t i) const { return data_[i]; }

    T value() const {
        require(size() == 1, "Tensor::value: tensor is not a scalar");
        return data_[0];
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (T v : data_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    void fill(T v) {
        for (T& x : data_) x = v;
    }

    template <class U>
    Tensor<U> cast() const {
        std::vector<U> out(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return Tensor<U>(shape_, std::move(out));
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
        os << "]";
        return os.str();
    }

private:
    static std::size_t checked_count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) {
            require(d > 0, "Tensor: extents must be positive");
            n *= d;
        }
        return n;
    }
    static void fail_2d() { fail("Tensor: 2-D access on non-matrix tensor"); }

    std::vector<std::size_t> shape_;
    std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

} // namespace rfgan
