#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sentcorr {

/// Dense row-major tensor of 64-bit reals. Rank 1 or 2 is all the models
/// need; the flat buffer is exposed for the optimizer and serialization.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        std::size_t n = 1;
        for (int d : shape_) {
            assert(d > 0);
            n *= static_cast<std::size_t>(d);
        }
        data_.assign(n, 0.0);
    }

    static Tensor zeros(int n) { return Tensor({n}); }
    static Tensor zeros(int rows, int cols) { return Tensor({rows, cols}); }

    static Tensor like(const Tensor& other) { return Tensor(other.shape_); }

    static Tensor from(std::vector<int> shape, std::vector<double> data) {
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_ = std::move(data);
        assert(t.size() == t.expected_size());
        return t;
    }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    int rows() const { return shape_[0]; }
    int cols() const { return shape_[1]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(int r, int c) {
        return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(shape_[1]) +
                     static_cast<std::size_t>(c)];
    }
    double at(int r, int c) const {
        return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(shape_[1]) +
                     static_cast<std::size_t>(c)];
    }

    std::span<double> row(int r) {
        std::size_t w = static_cast<std::size_t>(shape_[1]);
        return {data_.data() + static_cast<std::size_t>(r) * w, w};
    }
    std::span<const double> row(int r) const {
        std::size_t w = static_cast<std::size_t>(shape_[1]);
        return {data_.data() + static_cast<std::size_t>(r) * w, w};
    }

    std::span<double> flat() { return {data_.data(), data_.size()}; }
    std::span<const double> flat() const { return {data_.data(), data_.size()}; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
    void zero() { fill(0.0); }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(shape_[i]);
        }
        return s + "]";
    }

private:
    std::size_t expected_size() const {
        std::size_t n = 1;
        for (int d : shape_) n *= static_cast<std::size_t>(d);
        return n;
    }

    std::vector<int> shape_;
    std::vector<double> data_;
};

/// A parameter tensor with its stable name ("conv.weight", "lstm1.bias", ...).
/// The optimizer, checkpoints and the gradient checker all enumerate
/// parameters through lists of these.
struct NamedTensor {
    std::string name;
    Tensor* tensor;
};

}  // namespace sentcorr
