#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rfgan/rng.hpp"
#include "rfgan/tensor.hpp"

namespace rfgan {

// Mixture of k isotropic Gaussians with means on a circle.
struct RingSpec {
    std::size_t modes = 8;
    double radius = 2.0;
    double sigma = 0.1;

    void validate() const {
        require(modes >= 1, "RingSpec: modes must be >= 1");
        require(sigma > 0.0, "RingSpec: sigma must be > 0");
        require(radius > 0.0, "RingSpec: radius must be > 0");
    }
};

template <class T>
Tensor<T> ring_means(const RingSpec& spec) {
    spec.validate();
    Tensor<T> m({spec.modes, 2});
    for (std::size_t i = 0; i < spec.modes; ++i) {
        const double a = 2.0 * 3.14159265358979323846 * double(i) / double(spec.modes);
        m.at(i, 0) = T(spec.radius * std::cos(a));
        m.at(i, 1) = T(spec.radius * std::sin(a));
    }
    return m;
}

// n x 2 draw: mode index uniform over k, point = mean + N(0, sigma^2 I).
template <class T>
Tensor<T> sample_ring(const RingSpec& spec, std::size_t n, Rng& rng) {
    require(n >= 1, "sample_ring: n must be >= 1");
    const Tensor<T> means = ring_means<T>(spec);
    Tensor<T> out({n, 2});
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = std::size_t(rng.below(spec.modes));
        out.at(i, 0) = means.at(k, 0) + T(spec.sigma * rng.gaussian());
        out.at(i, 1) = means.at(k, 1) + T(spec.sigma * rng.gaussian());
    }
    return out;
}

// Affine map [lo,hi] -> [-1,1]; exact at both ends and the midpoint.
template <class T>
Tensor<T> normalize_unit_range(const Tensor<T>& x, double lo, double hi) {
    require(hi > lo, "normalize_unit_range: hi must be > lo");
    Tensor<T> out(x.shape());
    const double span = hi - lo;
    const double mid = lo + hi;
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = T((2.0 * double(x[i]) - mid) / span);
    return out;
}

// x + N(0, noise_std^2) elementwise; the caller keeps the clean x as target.
template <class T>
Tensor<T> corrupt(const Tensor<T>& x, double noise_std, Rng& rng) {
    require(noise_std >= 0.0, "corrupt: noise_std must be >= 0");
    Tensor<T> out(x.shape());
    if (noise_std == 0.0) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];
        return out;
    }
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] + T(noise_std * rng.gaussian());
    return out;
}

// IDX image file (big-endian magic 0x00000803, u8 pixels) as a (n,H,W)
// tensor with values 0..255.
TensorF load_idx(const std::string& path);

// Batch provider for training: either an endless synthetic ring sampler or
// a materialized table cycled in shuffled epochs.
template <class T>
class DataSource {
public:
    static DataSource ring(RingSpec spec) {
        spec.validate();
        DataSource s;
        s.ring_ = spec;
        s.dim_ = 2;
        return s;
    }

    static DataSource table(Tensor<T> rows) {
        require(rows.rank() == 2 && rows.rows() >= 1, "DataSource: table must be a [n,d] matrix");
        DataSource s;
        s.dim_ = rows.cols();
        s.table_ = std::move(rows);
        return s;
    }

    std::size_t dim() const { return dim_; }
    bool is_ring() const { return ring_.has_value(); }
    const RingSpec& ring_spec() const {
        require(ring_.has_value(), "DataSource: not a ring source");
        return *ring_;
    }
    std::size_t table_rows() const { return table_.rank() == 2 ? table_.rows() : 0; }

    Tensor<T> next_batch(std::size_t n, Rng& rng) {
        require(n >= 1, "DataSource: batch size must be >= 1");
        if (ring_) return sample_ring<T>(*ring_, n, rng);
        Tensor<T> out({n, dim_});
        for (std::size_t i = 0; i < n; ++i) {
            if (cursor_ >= order_.size()) reshuffle(rng);
            const std::size_t row = order_[cursor_++];
            for (std::size_t j = 0; j < dim_; ++j) out.at(i, j) = table_.at(row, j);
        }
        return out;
    }

private:
    void reshuffle(Rng& rng) {
        if (order_.size() != table_.rows()) {
            order_.resize(table_.rows());
            std::iota(order_.begin(), order_.end(), std::size_t(0));
        }
        for (std::size_t i = order_.size(); i > 1; --i)
            std::swap(order_[i - 1], order_[std::size_t(rng.below(i))]);
        cursor_ = 0;
    }

    std::optional<RingSpec> ring_;
    Tensor<T> table_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
    std::size_t dim_ = 0;
};

} // namespace rfgan
