// SPDX-License-Identifier: Apache-2.0
//
// Scale-aware heavy rain degradation:
//
//   J = (H conv K) downsampled by s
//   I = T * (J + sum_i S_i) + (1 - T) * A
//
// with S_i a rain-streak layer, T a transmission map and A a constant
// atmospheric-light map, plus the exact algebraic inverse of the second line.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "rainsynth/errors.hpp"
#include "rainsynth/image.hpp"
#include "rainsynth/rng.hpp"

namespace rainsynth {

template <typename T>
struct Range {
    T lo;
    T hi;

    bool contains(T v) const noexcept { return lo <= v && v <= hi; }
    friend bool operator==(const Range&, const Range&) = default;
};

/// Sampling ranges and pipeline switches. Defaults are toolkit choices, not
/// calibrated values.
struct DegradationConfig {
    int scale_s = 4;
    int num_streak_layers_m = 1;
    Range<double> noise_sigma_range{0.1, 0.3};
    Range<double> motion_angle_range{60.0, 120.0}; // degrees
    Range<int> motion_length_range{3, 9};          // LR pixels
    Range<double> atmo_range{0.7, 1.0};
    Range<double> transmission_range{0.4, 0.9};
    bool use_prefilter = false;
    double prefilter_sigma = 1.0;
    std::uint64_t master_seed = 0;

    static constexpr double kMinTransmission = 0.05;

    void validate() const {
        auto fail = [](const std::string& m) { throw InvalidArgument("DegradationConfig: " + m); };
        if (scale_s < 1) fail("scale_s must be >= 1");
        if (num_streak_layers_m < 1) fail("num_streak_layers_m must be >= 1");
        auto unit = [&](const Range<double>& r, const char* name) {
            if (!(r.lo <= r.hi)) fail(std::string(name) + " must have lo <= hi");
            if (!(r.lo > 0.0 && r.hi <= 1.0)) fail(std::string(name) + " must lie in (0,1]");
        };
        unit(noise_sigma_range, "noise_sigma_range");
        unit(atmo_range, "atmo_range");
        unit(transmission_range, "transmission_range");
        if (transmission_range.lo < kMinTransmission) fail("transmission_range.lo must be >= 0.05");
        if (!(motion_angle_range.lo <= motion_angle_range.hi) || motion_angle_range.lo < 0.0 ||
            !(motion_angle_range.hi < 180.0))
            fail("motion_angle_range must satisfy 0 <= lo <= hi < 180");
        if (motion_length_range.lo < 1 || motion_length_range.lo > motion_length_range.hi)
            fail("motion_length_range must satisfy 1 <= lo <= hi");
        if (use_prefilter && !(prefilter_sigma > 0.0 && std::isfinite(prefilter_sigma)))
            fail("prefilter_sigma must be positive");
    }

    friend bool operator==(const DegradationConfig&, const DegradationConfig&) = default;
};

/// One realized draw from a DegradationConfig.
struct RainParams {
    double noise_sigma = 0.0;
    double motion_angle = 0.0; // degrees
    int motion_length = 1;     // pixels
    double atmo_value = 1.0;
    double transmission_value = 1.0;
    std::uint64_t sample_seed = 0;

    friend bool operator==(const RainParams&, const RainParams&) = default;
};

/// The (S, T, A) triple at LR size. T and S may be single-channel and are
/// broadcast against the image; A is constant-valued.
struct PhysicalParams {
    std::vector<ImageTensor> rain_layers;
    ImageTensor transmission;
    ImageTensor atmospheric;
};

struct Composite {
    ImageTensor image;    // clamped to [0,1]
    ImageTensor preclamp; // exact compositor output
};

struct DegradedSample {
    ImageTensor lrhr;          // I, clamped
    ImageTensor lrhr_preclamp; // I before clamping
    ImageTensor lr;            // J
    PhysicalParams phys;
    RainParams params;
};

inline RainParams sample_params(const DegradationConfig& config, std::uint64_t index) {
    RainParams p;
    p.sample_seed = derive_seed(config.master_seed, index);
    Rng rng(derive_seed(p.sample_seed, kStreamParams));
    p.noise_sigma = rng.uniform(config.noise_sigma_range.lo, config.noise_sigma_range.hi);
    p.motion_angle = rng.uniform(config.motion_angle_range.lo, config.motion_angle_range.hi);
    p.motion_length = static_cast<int>(
        rng.uniform_int(config.motion_length_range.lo, config.motion_length_range.hi));
    p.atmo_value = rng.uniform(config.atmo_range.lo, config.atmo_range.hi);
    p.transmission_value = rng.uniform(config.transmission_range.lo, config.transmission_range.hi);
    return p;
}

namespace detail {

// Snaps values within rounding distance of an integer, so that axis-aligned
// angles rasterize exactly (cos 90deg is 6e-17, not 0).
inline double snap(double v) noexcept {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 ? r : v;
}

} // namespace detail

/// Line-segment PSF of `length` pixels through the kernel center. Samples are
/// taken every quarter pixel along the segment and splatted bilinearly.
/// Angles are counter-clockwise from the +x axis with rows growing downward.
inline Kernel2D motion_kernel(double angle_deg, int length) {
    if (length < 1) throw InvalidArgument("motion_kernel: length must be >= 1");
    if (!std::isfinite(angle_deg)) throw InvalidArgument("motion_kernel: angle must be finite");

    const int half = (length + 1) / 2; // ceil(length / 2)
    const int size = 2 * half + 1;
    std::vector<double> w(static_cast<std::size_t>(size) * size, 0.0);

    const double theta = angle_deg * std::numbers::pi / 180.0;
    const double dx = std::cos(theta), dy = -std::sin(theta);
    const int steps = 4 * (length - 1);
    const double extent = 0.5 * (length - 1);

    auto splat = [&](double px, double py, double mass) {
        const double fx = std::floor(px), fy = std::floor(py);
        const double tx = px - fx, ty = py - fy;
        const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
        const double corner[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
        const int ox[4] = {0, 1, 0, 1}, oy[4] = {0, 0, 1, 1};
        for (int k = 0; k < 4; ++k) {
            if (corner[k] == 0.0) continue;
            w[static_cast<std::size_t>(iy + oy[k]) * size + (ix + ox[k])] += mass * corner[k];
        }
    };

    for (int i = 0; i <= steps; ++i) {
        const double t = steps == 0 ? 0.0 : -extent + (2.0 * extent) * i / steps;
        splat(half + detail::snap(t * dx), half + detail::snap(t * dy), 1.0);
    }
    double sum = 0.0;
    for (double v : w) sum += v;
    for (double& v : w) v /= sum;
    return Kernel2D(size, std::move(w));
}

/// Raw N(0, noise_sigma^2) field that seeds the rain layer, single channel.
inline ImageTensor rain_noise_field(int h, int w, const RainParams& params) {
    ImageTensor noise(h, w, 1);
    Rng rng(derive_seed(params.sample_seed, kStreamNoise));
    for (double& v : noise.data()) v = params.noise_sigma * rng.normal();
    return noise;
}

/// Gaussian noise -> half-wave rectification -> motion blur -> clamp to [0,1].
inline ImageTensor synth_rain_layer(int h, int w, const RainParams& params) {
    ImageTensor field = rain_noise_field(h, w, params);
    for (double& v : field.data()) v = std::max(v, 0.0);
    return clamp01(convolve2d(field, motion_kernel(params.motion_angle, params.motion_length)));
}

inline ImageTensor make_transmission(int h, int w, double t) {
    if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument("make_transmission: t must lie in (0,1]");
    return ImageTensor(h, w, 1, t);
}

inline ImageTensor make_atmospheric(int h, int w, double a, int channels = 3) {
    if (!(a > 0.0 && a <= 1.0)) throw InvalidArgument("make_atmospheric: a must lie in (0,1]");
    return ImageTensor(h, w, channels, a);
}

/// Bicubic resolution conversion, optionally preceded by a Gaussian blur. The
/// result is clamped to [0,1] since it is itself a displayable image.
inline ImageTensor degrade_lr(const ImageTensor& hr, const DegradationConfig& config) {
    const int s = config.scale_s;
    if (s < 1) throw InvalidArgument("degrade_lr: scale_s must be >= 1");
    if (hr.height() % s != 0 || hr.width() % s != 0)
        throw InvalidArgument("degrade_lr: image " + std::to_string(hr.height()) + "x" +
                              std::to_string(hr.width()) + " is not divisible by scale " +
                              std::to_string(s));
    ImageTensor src = hr;
    if (config.use_prefilter) {
        const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * config.prefilter_sigma)));
        src = convolve2d(hr, gaussian_kernel(config.prefilter_sigma, radius));
    }
    if (s == 1) return clamp01(std::move(src));
    return clamp01(resize_bicubic(src, hr.height() / s, hr.width() / s));
}

namespace detail {

inline void check_physical(const ImageTensor& j, const PhysicalParams& phys) {
    auto check = [&](const ImageTensor& m, const char* name, bool allow_broadcast) {
        if (!m.same_extent(j))
            throw InvalidArgument(std::string("heavy rain model: ") + name + " extent does not match image");
        if (m.channels() != j.channels() && !(allow_broadcast && m.channels() == 1))
            throw InvalidArgument(std::string("heavy rain model: ") + name + " channel count mismatch");
    };
    check(phys.transmission, "transmission", true);
    check(phys.atmospheric, "atmospheric light", true);
    for (const auto& s : phys.rain_layers) check(s, "rain layer", true);
}

inline int chan(const ImageTensor& m, int c) noexcept { return m.channels() == 1 ? 0 : c; }

} // namespace detail

/// T * (J + sum S) + (1 - T) * A, unclamped. Shared by the compositor and the
/// recomposition from estimated parameters.
inline ImageTensor recompose(const ImageTensor& j, const std::vector<ImageTensor>& rain_layers,
                             const ImageTensor& transmission, const ImageTensor& atmospheric) {
    PhysicalParams view{rain_layers, transmission, atmospheric};
    detail::check_physical(j, view);
    ImageTensor out(j.height(), j.width(), j.channels());
    for (int y = 0; y < j.height(); ++y)
        for (int x = 0; x < j.width(); ++x)
            for (int c = 0; c < j.channels(); ++c) {
                double v = j.at(y, x, c);
                for (const auto& s : rain_layers) v += s.at(y, x, detail::chan(s, c));
                const double t = transmission.at(y, x, detail::chan(transmission, c));
                const double a = atmospheric.at(y, x, detail::chan(atmospheric, c));
                out.at(y, x, c) = t * v + (1.0 - t) * a;
            }
    return out;
}

inline ImageTensor recompose(const ImageTensor& j, const ImageTensor& rain_layer,
                             const ImageTensor& transmission, const ImageTensor& atmospheric) {
    return recompose(j, std::vector<ImageTensor>{rain_layer}, transmission, atmospheric);
}

inline Composite compose_heavyrain(const ImageTensor& j, const PhysicalParams& phys) {
    Composite out;
    out.preclamp = recompose(j, phys.rain_layers, phys.transmission, phys.atmospheric);
    out.image = clamp01(out.preclamp);
    return out;
}

/// J = (I - (1 - T) * A) / T - sum S. Exact on the unclamped compositor output.
inline ImageTensor invert_heavyrain(const ImageTensor& i_preclamp, const PhysicalParams& phys,
                                    double eps = 1e-6) {
    detail::check_physical(i_preclamp, phys);
    for (double t : phys.transmission.data())
        if (!(t >= eps))
            throw IllConditionedInversion("invert_heavyrain: transmission " + std::to_string(t) +
                                          " below conditioning floor " + std::to_string(eps));
    const ImageTensor& tm = phys.transmission;
    const ImageTensor& am = phys.atmospheric;
    ImageTensor out(i_preclamp.height(), i_preclamp.width(), i_preclamp.channels());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            for (int c = 0; c < out.channels(); ++c) {
                const double t = tm.at(y, x, detail::chan(tm, c));
                const double a = am.at(y, x, detail::chan(am, c));
                double v = (i_preclamp.at(y, x, c) - (1.0 - t) * a) / t;
                for (const auto& s : phys.rain_layers) v -= s.at(y, x, detail::chan(s, c));
                out.at(y, x, c) = v;
            }
    return out;
}

/// Rebuilds the (S, T, A) maps for a realized draw. Layer 0 uses the sample
/// seed directly; further layers use derived seeds.
inline PhysicalParams physical_from_params(const RainParams& params, int num_layers, int h, int w,
                                           int channels) {
    PhysicalParams phys;
    phys.rain_layers.reserve(num_layers);
    for (int i = 0; i < num_layers; ++i) {
        RainParams layer = params;
        if (i > 0) layer.sample_seed = derive_seed(params.sample_seed, (kStreamLayer << 32) + i);
        phys.rain_layers.push_back(synth_rain_layer(h, w, layer));
    }
    phys.transmission = make_transmission(h, w, params.transmission_value);
    phys.atmospheric = make_atmospheric(h, w, params.atmo_value, channels);
    return phys;
}

inline DegradedSample degrade_full(const ImageTensor& hr, const DegradationConfig& config,
                                   std::uint64_t index) {
    config.validate();
    DegradedSample out;
    out.lr = degrade_lr(hr, config);
    out.params = sample_params(config, index);
    out.phys = physical_from_params(out.params, config.num_streak_layers_m, out.lr.height(),
                                    out.lr.width(), out.lr.channels());
    Composite comp = compose_heavyrain(out.lr, out.phys);
    out.lrhr = std::move(comp.image);
    out.lrhr_preclamp = std::move(comp.preclamp);
    return out;
}

/// J + sum S, clamped: the rain-streaked image without veiling.
inline ImageTensor rain_streaked(const ImageTensor& j, const PhysicalParams& phys) {
    ImageTensor out = j;
    for (int y = 0; y < j.height(); ++y)
        for (int x = 0; x < j.width(); ++x)
            for (int c = 0; c < j.channels(); ++c)
                for (const auto& s : phys.rain_layers) out.at(y, x, c) += s.at(y, x, detail::chan(s, c));
    return clamp01(std::move(out));
}

} // namespace rainsynth
