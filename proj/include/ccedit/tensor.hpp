#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccedit {

// Dense row-major tensor of doubles. Feature maps use the layout
// (frames, channels, height, width); single frames drop the leading axis.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(numel(shape), 0.0) {}
    Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<int64_t>(data.size()) != numel(shape))
            throw std::invalid_argument("tensor: data size does not match shape");
    }

    static int64_t numel(const std::vector<int>& s) {
        int64_t n = 1;
        for (int d : s) {
            if (d <= 0) throw std::invalid_argument("tensor: nonpositive dim");
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int> s, double v) {
        Tensor t(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    int64_t size() const { return static_cast<int64_t>(data.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape.size()); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    // 4D accessor for (l, c, h, w) layouts.
    double& at4(int a, int b, int c, int d) {
        return data[((static_cast<int64_t>(a) * shape[1] + b) * shape[2] + c) * shape[3] + d];
    }
    double at4(int a, int b, int c, int d) const {
        return data[((static_cast<int64_t>(a) * shape[1] + b) * shape[2] + c) * shape[3] + d];
    }
    // 3D accessor for (c, h, w).
    double& at3(int a, int b, int c) {
        return data[(static_cast<int64_t>(a) * shape[1] + b) * shape[2] + c];
    }
    double at3(int a, int b, int c) const {
        return data[(static_cast<int64_t>(a) * shape[1] + b) * shape[2] + c];
    }
    // 2D accessor.
    double& at2(int a, int b) { return data[static_cast<int64_t>(a) * shape[1] + b]; }
    double at2(int a, int b) const { return data[static_cast<int64_t>(a) * shape[1] + b]; }

    bool all_finite() const;
    bool bitwise_equal(const Tensor& o) const;

    std::string shape_str() const;
};

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);

// Deterministic RNG: xoshiro256** seeded via splitmix64, Gaussian via
// Box-Muller. Bitwise reproducible for a fixed seed regardless of the
// platform's std distributions.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();
    double uniform();                    // [0, 1)
    double uniform(double lo, double hi);
    double normal();                     // standard Gaussian
    int uniform_int(int lo, int hi);     // inclusive range

    Tensor normal_tensor(std::vector<int> shape);
    Tensor uniform_tensor(std::vector<int> shape, double lo, double hi);

    // Derive an independent stream, e.g. one per training stage or run.
    Rng fork(uint64_t stream) const;

private:
    uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
    uint64_t seed_;
};

}  // namespace ccedit
