// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>

#include "rainsynth/face_crop.hpp"
#include "rainsynth/image.hpp"
#include "rainsynth/io.hpp"
#include "rainsynth/rng.hpp"

namespace rainsynth {

/// Paints an RGB face from a parsing map: flat per-class colours with a
/// seeded tint, a vertical background gradient, a light blur and mild noise.
/// Output is already 8-bit representable.
inline ImageTensor render_synthetic_face(const ParsedMap& mask, std::uint64_t seed) {
    static constexpr std::array<std::array<double, 3>, kFaceClassCount> base = {{
        {0.45, 0.55, 0.65}, // background
        {0.86, 0.68, 0.57}, // skin
        {0.16, 0.11, 0.10}, // eye
        {0.78, 0.59, 0.50}, // nose
        {0.72, 0.32, 0.36}, // lip
        {0.26, 0.18, 0.12}, // hair
    }};
    Rng rng(derive_seed(seed, 0x66616365)); // "face"
    std::array<std::array<double, 3>, kFaceClassCount> palette{};
    for (int k = 0; k < kFaceClassCount; ++k)
        for (int c = 0; c < 3; ++c) palette[k][c] = std::clamp(base[k][c] + rng.uniform(-0.06, 0.06), 0.0, 1.0);

    const int h = mask.height(), w = mask.width();
    ImageTensor img(h, w, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto k = static_cast<int>(mask.at(y, x));
            const double shade = k == 0 ? 0.8 + 0.4 * y / h : 1.0;
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = palette[k][c] * shade;
        }
    img = convolve2d(img, gaussian_kernel(1.0, 2));
    for (double& v : img.data()) v += 0.01 * rng.normal();
    return quantize8(clamp01(std::move(img)));
}

} // namespace rainsynth
