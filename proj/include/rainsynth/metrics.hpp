// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "rainsynth/errors.hpp"
#include "rainsynth/image.hpp"
#include "rainsynth/losses.hpp"

namespace rainsynth {

/// SSIM constants of the reference implementation: 11x11 Gaussian window with
/// sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1 for [0,1] images.
struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;

    void validate() const {
        if (window < 1 || window % 2 == 0) throw InvalidArgument("SsimParams: window must be odd");
        if (!(sigma > 0.0)) throw InvalidArgument("SsimParams: sigma must be positive");
        if (!(k1 > 0.0) || !(k2 > 0.0)) throw InvalidArgument("SsimParams: k1, k2 must be positive");
        if (!(dynamic_range > 0.0)) throw InvalidArgument("SsimParams: dynamic_range must be positive");
    }

    double c1() const noexcept { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const noexcept { return (k2 * dynamic_range) * (k2 * dynamic_range); }

    friend bool operator==(const SsimParams&, const SsimParams&) = default;
};

/// 10 log10(peak^2 / MSE); +infinity for identical images.
inline double psnr(const ImageTensor& a, const ImageTensor& b, double peak = 1.0) {
    const double err = mse(a, b);
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / err);
}

namespace detail {

inline std::vector<double> gaussian_window_1d(int size, double sigma) {
    std::vector<double> g(size);
    const int r = size / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double x = i - r;
        g[i] = std::exp(-x * x / (2.0 * sigma * sigma));
        sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
}

// Valid-region separable filtering of a single-channel plane (row-major).
inline std::vector<double> filter_valid(const std::vector<double>& plane, int h, int w,
                                        const std::vector<double>& g) {
    const int n = static_cast<int>(g.size());
    const int oh = h - n + 1, ow = w - n + 1;
    std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += g[k] * plane[static_cast<std::size_t>(y) * w + x + k];
            tmp[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += g[k] * tmp[static_cast<std::size_t>(y + k) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    return out;
}

} // namespace detail

/// Mean SSIM over all fully-contained window positions; multi-channel images
/// are scored per channel and averaged.
inline double ssim(const ImageTensor& a, const ImageTensor& b, const SsimParams& p = {}) {
    p.validate();
    if (!a.same_shape(b)) throw InvalidArgument("ssim: image shapes differ");
    if (a.height() < p.window || a.width() < p.window)
        throw InvalidArgument("ssim: image smaller than the " + std::to_string(p.window) + "x" +
                              std::to_string(p.window) + " window");

    const int h = a.height(), w = a.width();
    const auto g = detail::gaussian_window_1d(p.window, p.sigma);
    const double c1 = p.c1(), c2 = p.c2();
    const std::size_t n = static_cast<std::size_t>(h) * w;

    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        std::vector<double> pa(n), pb(n), paa(n), pbb(n), pab(n);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                pa[i] = a.at(y, x, c);
                pb[i] = b.at(y, x, c);
                paa[i] = pa[i] * pa[i];
                pbb[i] = pb[i] * pb[i];
                pab[i] = pa[i] * pb[i];
            }
        const auto mu_a = detail::filter_valid(pa, h, w, g);
        const auto mu_b = detail::filter_valid(pb, h, w, g);
        const auto e_aa = detail::filter_valid(paa, h, w, g);
        const auto e_bb = detail::filter_valid(pbb, h, w, g);
        const auto e_ab = detail::filter_valid(pab, h, w, g);

        double channel_sum = 0.0;
        for (std::size_t i = 0; i < mu_a.size(); ++i) {
            const double ma = mu_a[i], mb = mu_b[i];
            const double var_a = e_aa[i] - ma * ma;
            const double var_b = e_bb[i] - mb * mb;
            const double cov = e_ab[i] - ma * mb;
            channel_sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                           ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
        }
        total += channel_sum / static_cast<double>(mu_a.size());
    }
    return total / a.channels();
}

} // namespace rainsynth
