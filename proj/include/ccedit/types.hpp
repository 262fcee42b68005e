#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ccedit/tensor.hpp"

namespace ccedit {

// A single frame in pixel space: (3, h, w), values in [-1, 1].
struct PixelFrame {
    Tensor data;

    PixelFrame() = default;
    explicit PixelFrame(Tensor t) : data(std::move(t)) {
        if (data.ndim() != 3 || data.dim(0) != 3)
            throw std::invalid_argument("PixelFrame: expects (3,h,w), got " + data.shape_str());
    }
    int height() const { return data.dim(1); }
    int width() const { return data.dim(2); }
};

struct VideoClip {
    std::vector<PixelFrame> frames;
    double fps = 4.0;

    int length() const { return static_cast<int>(frames.size()); }
    void validate() const {
        if (frames.empty()) throw std::invalid_argument("VideoClip: empty");
        for (const auto& f : frames)
            if (f.height() != frames[0].height() || f.width() != frames[0].width())
                throw std::invalid_argument("VideoClip: frame size mismatch");
    }
};

// A single latent frame: (c_latent, h/f, w/f).
struct LatentFrame {
    Tensor data;

    LatentFrame() = default;
    explicit LatentFrame(Tensor t) : data(std::move(t)) {
        if (data.ndim() != 3)
            throw std::invalid_argument("LatentFrame: expects (c,h,w), got " + data.shape_str());
    }
};

// Latent frames packed as one (l, c, h, w) tensor.
struct LatentClip {
    Tensor data;

    LatentClip() = default;
    explicit LatentClip(Tensor t) : data(std::move(t)) {
        if (data.ndim() != 4)
            throw std::invalid_argument("LatentClip: expects (l,c,h,w), got " + data.shape_str());
    }
    int length() const { return data.dim(0); }
    LatentFrame frame(int i) const {
        Tensor t({data.dim(1), data.dim(2), data.dim(3)});
        int64_t per = t.size();
        std::copy(data.data.begin() + i * per, data.data.begin() + (i + 1) * per, t.data.begin());
        return LatentFrame(std::move(t));
    }
    void set_frame(int i, const LatentFrame& f) {
        int64_t per = f.data.size();
        std::copy(f.data.data.begin(), f.data.data.end(), data.data.begin() + i * per);
    }
};

}  // namespace ccedit
