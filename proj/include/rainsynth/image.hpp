// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rainsynth/errors.hpp"

namespace rainsynth {

/// Interleaved H x W x C raster of doubles, row-major. Values are nominally in
/// [0,1] but intermediate results may leave that range until clamp01().
class ImageTensor {
public:
    ImageTensor() = default;

    ImageTensor(int height, int width, int channels, double fill = 0.0)
        : h_(height), w_(width), c_(channels) {
        if (height <= 0 || width <= 0)
            throw InvalidArgument("ImageTensor: dimensions must be positive, got " +
                                  std::to_string(height) + "x" + std::to_string(width));
        if (channels != 1 && channels != 3)
            throw InvalidArgument("ImageTensor: channels must be 1 or 3, got " +
                                  std::to_string(channels));
        data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
    }

    int height() const noexcept { return h_; }
    int width() const noexcept { return w_; }
    int channels() const noexcept { return c_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& at(int y, int x, int c = 0) noexcept { return data_[index(y, x, c)]; }
    double at(int y, int x, int c = 0) const noexcept { return data_[index(y, x, c)]; }

    std::span<double> data() & noexcept { return data_; }
    std::span<const double> data() const& noexcept { return data_; }
    void data() && = delete; // a span into a temporary would dangle

    bool same_shape(const ImageTensor& o) const noexcept {
        return h_ == o.h_ && w_ == o.w_ && c_ == o.c_;
    }
    bool same_extent(const ImageTensor& o) const noexcept { return h_ == o.h_ && w_ == o.w_; }

    friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

private:
    std::size_t index(int y, int x, int c) const noexcept {
        return (static_cast<std::size_t>(y) * w_ + x) * c_ + c;
    }

    int h_ = 0;
    int w_ = 0;
    int c_ = 0;
    std::vector<double> data_;
};

/// Square, odd-sized filter. Blur and motion kernels built here are normalized.
class Kernel2D {
public:
    Kernel2D(int size, std::vector<double> weights) : size_(size), w_(std::move(weights)) {
        if (size < 1 || size % 2 == 0)
            throw InvalidArgument("Kernel2D: size must be odd and >= 1, got " + std::to_string(size));
        if (w_.size() != static_cast<std::size_t>(size) * size)
            throw InvalidArgument("Kernel2D: weight count does not match size");
    }

    static Kernel2D delta() { return Kernel2D(1, {1.0}); }

    int size() const noexcept { return size_; }
    int radius() const noexcept { return size_ / 2; }
    double at(int row, int col) const noexcept { return w_[static_cast<std::size_t>(row) * size_ + col]; }
    std::span<const double> weights() const noexcept { return w_; }

    double sum() const noexcept {
        double s = 0.0;
        for (double v : w_) s += v;
        return s;
    }

    Kernel2D transposed() const {
        std::vector<double> t(w_.size());
        for (int r = 0; r < size_; ++r)
            for (int c = 0; c < size_; ++c) t[static_cast<std::size_t>(c) * size_ + r] = at(r, c);
        return Kernel2D(size_, std::move(t));
    }

    friend bool operator==(const Kernel2D&, const Kernel2D&) = default;

private:
    int size_;
    std::vector<double> w_;
};

enum class Border { replicate };

inline Kernel2D gaussian_kernel(double sigma, int radius) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw InvalidArgument("gaussian_kernel: sigma must be finite and positive");
    if (radius < 1) throw InvalidArgument("gaussian_kernel: radius must be >= 1");

    const int size = 2 * radius + 1;
    std::vector<double> w(static_cast<std::size_t>(size) * size);
    const double denom = 2.0 * sigma * sigma;
    double sum = 0.0;
    for (int y = -radius; y <= radius; ++y)
        for (int x = -radius; x <= radius; ++x) {
            const double v = std::exp(-static_cast<double>(x * x + y * y) / denom);
            w[static_cast<std::size_t>(y + radius) * size + (x + radius)] = v;
            sum += v;
        }
    for (double& v : w) v /= sum;
    return Kernel2D(size, std::move(w));
}

namespace detail {

inline std::vector<int> replicate_indices(int n, int radius) {
    std::vector<int> idx(static_cast<std::size_t>(n) + 2 * radius);
    for (int i = -radius; i < n + radius; ++i) idx[i + radius] = std::clamp(i, 0, n - 1);
    return idx;
}

} // namespace detail

/// True 2-D convolution (kernel flipped) with replicate padding; channels are
/// filtered independently.
inline ImageTensor convolve2d(const ImageTensor& img, const Kernel2D& kernel,
                              Border = Border::replicate) {
    const int h = img.height(), w = img.width(), ch = img.channels();
    const int r = kernel.radius(), ks = kernel.size();
    ImageTensor out(h, w, ch);
    if (ks == 1) {
        const double k = kernel.at(0, 0);
        auto src = img.data();
        auto dst = out.data();
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = k * src[i];
        return out;
    }
    const auto rows = detail::replicate_indices(h, r);
    const auto cols = detail::replicate_indices(w, r);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int i = 0; i < ks; ++i) {
                    // flipped: kernel row i samples source offset (r - i)
                    const int sy = rows[y + (r - i) + r];
                    for (int j = 0; j < ks; ++j) {
                        const double k = kernel.at(i, j);
                        if (k == 0.0) continue;
                        acc += k * img.at(sy, cols[x + (r - j) + r], c);
                    }
                }
                out.at(y, x, c) = acc;
            }
    return out;
}

/// Catmull-Rom cubic (a = -0.5).
inline double cubic_weight(double x) noexcept {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

namespace detail {

struct CubicTaps {
    int index[4];
    double weight[4];
};

// Half-pixel-centered mapping: src = (dst + 0.5) * in / out - 0.5.
inline std::vector<CubicTaps> cubic_taps(int in_n, int out_n) {
    std::vector<CubicTaps> taps(out_n);
    const double scale = static_cast<double>(in_n) / out_n;
    for (int d = 0; d < out_n; ++d) {
        const double src = (d + 0.5) * scale - 0.5;
        const double base = std::floor(src);
        const double t = src - base;
        const int i0 = static_cast<int>(base);
        auto& tp = taps[d];
        for (int k = 0; k < 4; ++k) {
            tp.index[k] = std::clamp(i0 - 1 + k, 0, in_n - 1);
            tp.weight[k] = cubic_weight(t - (k - 1));
        }
    }
    return taps;
}

} // namespace detail

inline ImageTensor resize_bicubic(const ImageTensor& img, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0)
        throw InvalidArgument("resize_bicubic: output dimensions must be positive");
    const int h = img.height(), w = img.width(), ch = img.channels();
    const auto tx = detail::cubic_taps(w, out_w);
    const auto ty = detail::cubic_taps(h, out_h);

    ImageTensor horiz(h, out_w, ch);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < out_w; ++x)
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) acc += tx[x].weight[k] * img.at(y, tx[x].index[k], c);
                horiz.at(y, x, c) = acc;
            }

    ImageTensor out(out_h, out_w, ch);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x)
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) acc += ty[y].weight[k] * horiz.at(ty[y].index[k], x, c);
                out.at(y, x, c) = acc;
            }
    return out;
}

inline ImageTensor clamp01(ImageTensor img) {
    for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
    return img;
}

inline ImageTensor flip_horizontal(const ImageTensor& img) {
    ImageTensor out(img.height(), img.width(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c)
                out.at(y, x, c) = img.at(y, img.width() - 1 - x, c);
    return out;
}

/// Replicates a single-channel raster across `channels`.
inline ImageTensor broadcast_channels(const ImageTensor& img, int channels) {
    if (img.channels() == channels) return img;
    if (img.channels() != 1)
        throw InvalidArgument("broadcast_channels: only single-channel rasters can be broadcast");
    ImageTensor out(img.height(), img.width(), channels);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < channels; ++c) out.at(y, x, c) = img.at(y, x);
    return out;
}

} // namespace rainsynth
