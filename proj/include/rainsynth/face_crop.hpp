// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rainsynth/errors.hpp"
#include "rainsynth/image.hpp"
#include "rainsynth/rng.hpp"

namespace rainsynth {

/// Rectangle in normalized [0,1] coordinates.
struct NormRect {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

    bool valid() const noexcept {
        return 0.0 <= x0 && x0 < x1 && x1 <= 1.0 && 0.0 <= y0 && y0 < y1 && y1 <= 1.0;
    }

    friend bool operator==(const NormRect&, const NormRect&) = default;
};

/// Half-open integer box [x0, x1) x [y0, y1).
struct PixelBox {
    int x0, y0, x1, y1;
    int width() const noexcept { return x1 - x0; }
    int height() const noexcept { return y1 - y0; }
    bool contains(int x, int y) const noexcept { return x0 <= x && x < x1 && y0 <= y && y < y1; }
};

/// Floor mapping of a normalized rectangle onto an h x w grid.
inline PixelBox to_pixels(const NormRect& r, int h, int w) {
    return {static_cast<int>(std::floor(r.x0 * w)), static_cast<int>(std::floor(r.y0 * h)),
            static_cast<int>(std::floor(r.x1 * w)), static_cast<int>(std::floor(r.y1 * h))};
}

struct CropBoxes {
    NormRect eye;
    NormRect nose;
    NormRect lip;

    friend bool operator==(const CropBoxes&, const CropBoxes&) = default;
};

/// Average component positions for aligned 128x128 face crops.
inline CropBoxes default_boxes() {
    return {{0.15, 0.30, 0.85, 0.50}, {0.35, 0.45, 0.65, 0.70}, {0.30, 0.68, 0.70, 0.85}};
}

inline ImageTensor crop_region(const ImageTensor& img, const NormRect& r) {
    if (!r.valid()) throw InvalidArgument("crop_region: rectangle must satisfy 0 <= x0 < x1 <= 1, 0 <= y0 < y1 <= 1");
    const PixelBox b = to_pixels(r, img.height(), img.width());
    if (b.width() <= 0 || b.height() <= 0)
        throw InvalidArgument("crop_region: rectangle maps to an empty pixel box");
    ImageTensor out(b.height(), b.width(), img.channels());
    for (int y = 0; y < b.height(); ++y)
        for (int x = 0; x < b.width(); ++x)
            for (int c = 0; c < img.channels(); ++c) out.at(y, x, c) = img.at(b.y0 + y, b.x0 + x, c);
    return out;
}

enum class FaceClass : std::uint8_t { background = 0, skin = 1, eye = 2, nose = 3, lip = 4, hair = 5 };
inline constexpr int kFaceClassCount = 6;

/// Per-pixel face-parsing labels.
class ParsedMap {
public:
    ParsedMap(int height, int width, FaceClass fill = FaceClass::background)
        : h_(height), w_(width) {
        if (height <= 0 || width <= 0) throw InvalidArgument("ParsedMap: dimensions must be positive");
        labels_.assign(static_cast<std::size_t>(height) * width, static_cast<std::uint8_t>(fill));
    }

    int height() const noexcept { return h_; }
    int width() const noexcept { return w_; }

    FaceClass at(int y, int x) const noexcept { return static_cast<FaceClass>(labels_[idx(y, x)]); }
    void set(int y, int x, FaceClass c) noexcept { labels_[idx(y, x)] = static_cast<std::uint8_t>(c); }

    /// Throws if any raw value lies outside the class set.
    void set_raw(int y, int x, std::uint8_t v) {
        if (v >= kFaceClassCount) throw InvalidArgument("ParsedMap: label " + std::to_string(v) + " outside class set");
        labels_[idx(y, x)] = v;
    }

    std::span<const std::uint8_t> raw() const noexcept { return labels_; }

    std::array<std::size_t, kFaceClassCount> histogram() const {
        std::array<std::size_t, kFaceClassCount> hist{};
        for (auto v : labels_) ++hist[v];
        return hist;
    }

    friend bool operator==(const ParsedMap&, const ParsedMap&) = default;

private:
    std::size_t idx(int y, int x) const noexcept { return static_cast<std::size_t>(y) * w_ + x; }

    int h_, w_;
    std::vector<std::uint8_t> labels_;
};

/// Nearest-neighbour subsampling: output (y, x) takes the source label at
/// (y s + s/2, x s + s/2).
inline ParsedMap downsample_parsing(const ParsedMap& f, int s) {
    if (s < 1) throw InvalidArgument("downsample_parsing: scale must be >= 1");
    if (f.height() % s != 0 || f.width() % s != 0)
        throw InvalidArgument("downsample_parsing: map dimensions not divisible by scale");
    ParsedMap out(f.height() / s, f.width() / s);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out.set(y, x, f.at(y * s + s / 2, x * s + s / 2));
    return out;
}

namespace detail {

struct Ellipse {
    double cx, cy, rx, ry;
    bool contains(double x, double y) const noexcept {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        return dx * dx + dy * dy <= 1.0;
    }
};

struct Triangle {
    double ax, ay, bx, by, cx, cy;
    bool contains(double x, double y) const noexcept {
        auto edge = [](double px, double py, double qx, double qy, double rx, double ry) {
            return (qx - px) * (ry - py) - (qy - py) * (rx - px);
        };
        const double d1 = edge(ax, ay, bx, by, x, y);
        const double d2 = edge(bx, by, cx, cy, x, y);
        const double d3 = edge(cx, cy, ax, ay, x, y);
        const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
        const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
        return !(neg && pos);
    }
};

} // namespace detail

/// Geometric stand-in for a face-parsing annotation: hair, skin, two eyes, a
/// nose triangle and lips, all shifted together by up to `jitter` (normalized
/// units) drawn from `seed`. Each component is guaranteed at least one pixel.
inline ParsedMap synth_face_mask(int h, int w, std::uint64_t seed, double jitter = 0.02) {
    if (h < 16 || w < 16) throw InvalidArgument("synth_face_mask: dimensions must be >= 16");
    Rng rng(derive_seed(seed, kStreamMask));
    const double jx = rng.uniform(-jitter, jitter);
    const double jy = rng.uniform(-jitter, jitter);

    const detail::Ellipse hair{0.50 + jx, 0.38 + jy, 0.40, 0.36};
    const detail::Ellipse skin{0.50 + jx, 0.52 + jy, 0.32, 0.40};
    const detail::Ellipse eye_l{0.36 + jx, 0.40 + jy, 0.08, 0.035};
    const detail::Ellipse eye_r{0.64 + jx, 0.40 + jy, 0.08, 0.035};
    const detail::Triangle nose{0.50 + jx, 0.48 + jy, 0.43 + jx, 0.64 + jy, 0.57 + jx, 0.64 + jy};
    const detail::Ellipse lip{0.50 + jx, 0.76 + jy, 0.12, 0.035};

    ParsedMap map(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = (x + 0.5) / w, v = (y + 0.5) / h;
            FaceClass label = FaceClass::background;
            if (hair.contains(u, v)) label = FaceClass::hair;
            if (skin.contains(u, v)) label = FaceClass::skin;
            if (nose.contains(u, v)) label = FaceClass::nose;
            if (eye_l.contains(u, v) || eye_r.contains(u, v)) label = FaceClass::eye;
            if (lip.contains(u, v)) label = FaceClass::lip;
            map.set(y, x, label);
        }

    auto pin = [&](double u, double v, FaceClass c) {
        map.set(std::clamp(static_cast<int>(v * h), 0, h - 1), std::clamp(static_cast<int>(u * w), 0, w - 1), c);
    };
    pin(eye_l.cx, eye_l.cy, FaceClass::eye);
    pin(eye_r.cx, eye_r.cy, FaceClass::eye);
    pin(nose.ax, 0.5 * (nose.ay + nose.by), FaceClass::nose);
    pin(lip.cx, lip.cy, FaceClass::lip);
    return map;
}

} // namespace rainsynth
