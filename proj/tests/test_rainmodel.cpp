// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <numbers>
#include <algorithm>

#include "rainsynth/rain_model.hpp"
#include "test_util.hpp"

using namespace rainsynth;
using testutil::max_abs_diff;
using testutil::random_image;

namespace {

DegradationConfig collapsed_config() {
    DegradationConfig c;
    c.noise_sigma_range = {0.2, 0.2};
    c.motion_angle_range = {45.0, 45.0};
    c.motion_length_range = {5, 5};
    c.atmo_range = {0.9, 0.9};
    c.transmission_range = {0.6, 0.6};
    return c;
}

PhysicalParams random_phys(int h, int w, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> t(0.05, 1.0), a(0.01, 1.0);
    PhysicalParams p;
    p.rain_layers.push_back(random_image(h, w, 1, gen(), 0.0, 1.0));
    p.transmission = ImageTensor(h, w, 1);
    for (double& v : p.transmission.data()) v = t(gen);
    p.atmospheric = make_atmospheric(h, w, a(gen));
    return p;
}

} // namespace

TEST(SampleParams, CollapsedRangesYieldConstants) {
    const DegradationConfig c = collapsed_config();
    for (std::uint64_t i : {0ull, 1ull, 12345ull}) {
        const RainParams p = sample_params(c, i);
        EXPECT_EQ(p.noise_sigma, 0.2);
        EXPECT_EQ(p.motion_angle, 45.0);
        EXPECT_EQ(p.motion_length, 5);
        EXPECT_EQ(p.atmo_value, 0.9);
        EXPECT_EQ(p.transmission_value, 0.6);
    }
}

TEST(SampleParams, DeterministicAndOrderIndependent) {
    DegradationConfig c;
    c.master_seed = 99;
    const RainParams late = sample_params(c, 7);
    for (int i = 0; i < 7; ++i) (void)sample_params(c, i);
    EXPECT_EQ(sample_params(c, 7), late);
    EXPECT_NE(sample_params(c, 8).sample_seed, late.sample_seed);
}

TEST(SampleParams, DrawsStayInRange) {
    DegradationConfig c;
    c.master_seed = 5;
    std::set<int> lengths;
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const RainParams p = sample_params(c, i);
        EXPECT_TRUE(c.noise_sigma_range.contains(p.noise_sigma));
        EXPECT_TRUE(c.motion_angle_range.contains(p.motion_angle));
        EXPECT_TRUE(c.motion_length_range.contains(p.motion_length));
        EXPECT_TRUE(c.atmo_range.contains(p.atmo_value));
        EXPECT_TRUE(c.transmission_range.contains(p.transmission_value));
        lengths.insert(p.motion_length);
    }
    EXPECT_EQ(lengths.size(), 7u); // every integer in [3, 9] occurs
}

TEST(SampleParams, AtmosphericMeanMonteCarlo) {
    DegradationConfig c;
    c.atmo_range = {0.7, 1.0};
    c.master_seed = 2024;
    double sum = 0.0;
    for (std::uint64_t i = 0; i < 10000; ++i) sum += sample_params(c, i).atmo_value;
    EXPECT_NEAR(sum / 10000.0, 0.85, 0.01);
}

TEST(MotionKernel, LengthOneIsDelta) {
    for (double angle : {0.0, 33.0, 90.0, 179.0}) {
        const Kernel2D k = motion_kernel(angle, 1);
        ASSERT_EQ(k.size(), 3);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) EXPECT_EQ(k.at(r, c), r == 1 && c == 1 ? 1.0 : 0.0);
    }
    const ImageTensor img = random_image(9, 9, 3, 40);
    EXPECT_EQ(convolve2d(img, motion_kernel(57.0, 1)), img);
}

TEST(MotionKernel, HorizontalMassOnCentralRowSymmetric) {
    const Kernel2D k = motion_kernel(0.0, 5);
    ASSERT_EQ(k.size(), 7);
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 7; ++c) {
            if (r != 3) EXPECT_EQ(k.at(r, c), 0.0);
            EXPECT_NEAR(k.at(r, c), k.at(r, 6 - c), 1e-15);
        }
    EXPECT_NEAR(k.sum(), 1.0, 1e-12);
}

TEST(MotionKernel, NinetyDegreesIsTranspose) {
    for (int len : {2, 3, 4, 5, 8, 9}) {
        const Kernel2D k0 = motion_kernel(0.0, len), k90 = motion_kernel(90.0, len);
        ASSERT_EQ(k0.size(), k90.size());
        for (int r = 0; r < k0.size(); ++r)
            for (int c = 0; c < k0.size(); ++c) EXPECT_NEAR(k90.at(r, c), k0.at(c, r), 1e-15) << len;
    }
}

TEST(MotionKernel, SizeSumAndNonNegativity) {
    for (int len = 1; len <= 12; ++len)
        for (double angle = 0.0; angle < 180.0; angle += 7.5) {
            const Kernel2D k = motion_kernel(angle, len);
            EXPECT_EQ(k.size(), 2 * ((len + 1) / 2) + 1);
            EXPECT_NEAR(k.sum(), 1.0, 1e-12);
            for (double v : k.weights()) EXPECT_GE(v, 0.0);
        }
    EXPECT_THROW(motion_kernel(0.0, 0), InvalidArgument);
}

TEST(RainLayer, VanishingNoiseGivesZeros) {
    RainParams p;
    p.noise_sigma = 1e-9;
    p.motion_angle = 80;
    p.motion_length = 7;
    p.sample_seed = 3;
    // The layer is bounded by sigma times the largest raw normal draw.
    double peak = 0.0;
    const ImageTensor raw = rain_noise_field(24, 24, p);
    for (double v : raw.data()) peak = std::max(peak, std::abs(v));
    const ImageTensor layer = synth_rain_layer(24, 24, p);
    for (double v : layer.data()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, peak);
        EXPECT_LT(v, 1e-8);
    }
}

TEST(RainLayer, Deterministic) {
    RainParams p{0.25, 72.0, 6, 0.8, 0.5, 77};
    EXPECT_EQ(synth_rain_layer(20, 30, p), synth_rain_layer(20, 30, p));
}

TEST(RainLayer, LengthOneEqualsRectifiedClampedNoise) {
    RainParams p{0.3, 100.0, 1, 0.8, 0.5, 4242};
    const ImageTensor layer = synth_rain_layer(32, 32, p);
    // Regenerate the field with an independent engine wiring: same stream,
    // Box-Muller by hand.
    std::mt19937_64 eng(derive_seed(p.sample_seed, kStreamNoise));
    auto uniform = [&] { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    std::vector<double> expected;
    while (expected.size() < 32 * 32) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        expected.push_back(r * std::cos(2 * std::numbers::pi * u2));
        expected.push_back(r * std::sin(2 * std::numbers::pi * u2));
    }
    for (std::size_t i = 0; i < layer.size(); ++i)
        EXPECT_EQ(layer.data()[i], std::clamp(p.noise_sigma * expected[i], 0.0, 1.0)) << i;
}

TEST(RainLayer, BoundedAndNonNegative) {
    DegradationConfig c;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const RainParams p = sample_params(c, i);
        const ImageTensor layer = synth_rain_layer(32, 32, p);
        for (double v : layer.data()) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(Maps, TransmissionAndAtmospheric) {
    const ImageTensor t1 = make_transmission(4, 5, 1.0), t5 = make_transmission(4, 5, 0.5);
    EXPECT_EQ(t1.channels(), 1);
    for (double v : t1.data()) EXPECT_EQ(v, 1.0);
    for (double v : t5.data()) EXPECT_EQ(v, 0.5);
    const ImageTensor a = make_atmospheric(6, 7, 0.85);
    EXPECT_EQ(a.channels(), 3);
    std::set<double> distinct(a.data().begin(), a.data().end());
    EXPECT_EQ(distinct, std::set<double>{0.85});
    const ImageTensor ones = make_atmospheric(2, 2, 1.0);
    for (double v : ones.data()) EXPECT_EQ(v, 1.0);
    EXPECT_THROW(make_transmission(2, 2, 0.0), InvalidArgument);
    EXPECT_THROW(make_transmission(2, 2, 1.5), InvalidArgument);
    EXPECT_THROW(make_atmospheric(2, 2, -0.1), InvalidArgument);
    EXPECT_THROW(make_atmospheric(2, 2, 1.01), InvalidArgument);
}

TEST(DegradeLr, ScaleOneIsIdentity) {
    DegradationConfig c;
    c.scale_s = 1;
    const ImageTensor h = random_image(16, 12, 3, 11);
    EXPECT_EQ(degrade_lr(h, c), h);
}

TEST(DegradeLr, FourfoldShape) {
    const ImageTensor h = random_image(128, 128, 3, 12);
    const ImageTensor j = degrade_lr(h, DegradationConfig{});
    EXPECT_EQ(j.height(), 32);
    EXPECT_EQ(j.width(), 32);
}

TEST(DegradeLr, ConstantStaysConstant) {
    DegradationConfig c;
    const ImageTensor h(64, 48, 3, 0.3);
    EXPECT_LE(max_abs_diff(degrade_lr(h, c), ImageTensor(16, 12, 3, 0.3)), 1e-12);
    c.use_prefilter = true;
    c.prefilter_sigma = 1.5;
    EXPECT_LE(max_abs_diff(degrade_lr(h, c), ImageTensor(16, 12, 3, 0.3)), 1e-12);
}

TEST(DegradeLr, PrefilterChangesResult) {
    DegradationConfig c;
    const ImageTensor h = random_image(32, 32, 1, 13);
    const ImageTensor plain = degrade_lr(h, c);
    c.use_prefilter = true;
    EXPECT_GT(max_abs_diff(degrade_lr(h, c), plain), 1e-3);
}

TEST(DegradeLr, RejectsNonDivisible) {
    EXPECT_THROW(degrade_lr(ImageTensor(130, 128, 3), DegradationConfig{}), InvalidArgument);
}

TEST(Compose, DegenerateIdentities) {
    const ImageTensor j = random_image(8, 8, 3, 14);
    PhysicalParams clear{{ImageTensor(8, 8, 1, 0.0)}, make_transmission(8, 8, 1.0), make_atmospheric(8, 8, 0.77)};
    const Composite c1 = compose_heavyrain(j, clear);
    EXPECT_EQ(c1.preclamp, j);
    EXPECT_EQ(c1.image, j);

    PhysicalParams veiled{{random_image(8, 8, 1, 15)}, ImageTensor(8, 8, 1, 0.0), make_atmospheric(8, 8, 0.77)};
    EXPECT_EQ(compose_heavyrain(j, veiled).image, veiled.atmospheric);
}

TEST(Compose, ScalarExample) {
    PhysicalParams p{{ImageTensor(1, 1, 1, 0.2)}, ImageTensor(1, 1, 1, 0.8), ImageTensor(1, 1, 1, 1.0)};
    const Composite c = compose_heavyrain(ImageTensor(1, 1, 1, 0.5), p);
    EXPECT_NEAR(c.preclamp.at(0, 0), 0.76, 1e-15);
    EXPECT_NEAR(invert_heavyrain(ImageTensor(1, 1, 1, 0.76), p).at(0, 0), 0.5, 1e-15);
}

TEST(Compose, DimensionMismatchThrows) {
    PhysicalParams p{{ImageTensor(4, 4, 1)}, ImageTensor(4, 4, 1, 0.5), ImageTensor(4, 4, 3, 0.9)};
    EXPECT_THROW(compose_heavyrain(ImageTensor(5, 4, 3), p), InvalidArgument);
    EXPECT_THROW(recompose(ImageTensor(4, 4, 3), ImageTensor(3, 4, 1), p.transmission, p.atmospheric),
                 InvalidArgument);
}

TEST(Compose, AffineInJWithoutRain) {
    const ImageTensor j = random_image(10, 10, 3, 16);
    const double t = 0.63, a = 0.91;
    PhysicalParams p{{ImageTensor(10, 10, 1, 0.0)}, make_transmission(10, 10, t), make_atmospheric(10, 10, a)};
    const ImageTensor out = compose_heavyrain(j, p).preclamp;
    for (std::size_t i = 0; i < j.size(); ++i) EXPECT_NEAR(out.data()[i], t * j.data()[i] + (1 - t) * a, 1e-12);
}

TEST(Compose, VeilingIsMonotone) {
    const ImageTensor j = random_image(6, 6, 3, 17);
    const double a = 0.8;
    ImageTensor prev;
    for (double t = 1.0; t >= 0.05; t -= 0.05) {
        PhysicalParams p{{ImageTensor(6, 6, 1, 0.0)}, make_transmission(6, 6, t), make_atmospheric(6, 6, a)};
        const ImageTensor cur = compose_heavyrain(j, p).preclamp;
        if (!prev.empty())
            for (std::size_t i = 0; i < cur.size(); ++i)
                EXPECT_LE(std::abs(cur.data()[i] - a), std::abs(prev.data()[i] - a) + 1e-15);
        prev = cur;
    }
}

TEST(Recompose, GroundTruthEstimatesMatchCompositor) {
    std::mt19937_64 gen(18);
    const ImageTensor j = random_image(12, 9, 3, 19);
    const PhysicalParams p = random_phys(12, 9, gen);
    EXPECT_EQ(recompose(j, p.rain_layers, p.transmission, p.atmospheric), compose_heavyrain(j, p).preclamp);
    EXPECT_EQ(recompose(j, ImageTensor(12, 9, 1, 0.0), ImageTensor(12, 9, 1, 1.0), p.atmospheric), j);
}

TEST(Recompose, PerPixelScalarOracle) {
    const ImageTensor j = random_image(4, 4, 3, 20);
    const ImageTensor s = random_image(4, 4, 3, 21, 0.0, 0.5);
    const ImageTensor t = random_image(4, 4, 3, 22, 0.05, 1.0);
    const ImageTensor a = random_image(4, 4, 3, 23);
    const ImageTensor out = recompose(j, s, t, a);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double jj = j.data()[i], ss = s.data()[i], tt = t.data()[i], aa = a.data()[i];
        EXPECT_NEAR(out.data()[i], tt * (jj + ss) + (1 - tt) * aa, 1e-12);
    }
}

TEST(Invert, RoundTripHundredTrials) {
    std::mt19937_64 gen(24);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const ImageTensor j = random_image(16, 16, 3, gen());
        const PhysicalParams p = random_phys(16, 16, gen);
        worst = std::max(worst, max_abs_diff(invert_heavyrain(compose_heavyrain(j, p).preclamp, p), j));
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(Invert, DegenerateModelReturnsInput) {
    const ImageTensor i = random_image(5, 5, 3, 25);
    PhysicalParams p{{ImageTensor(5, 5, 1, 0.0)}, make_transmission(5, 5, 1.0), make_atmospheric(5, 5, 0.4)};
    EXPECT_EQ(invert_heavyrain(i, p), i);
}

TEST(Invert, IllConditionedThrows) {
    PhysicalParams p{{ImageTensor(3, 3, 1, 0.0)}, ImageTensor(3, 3, 1, 0.5), make_atmospheric(3, 3, 0.9)};
    p.transmission.at(1, 1) = 1e-8;
    EXPECT_THROW(invert_heavyrain(ImageTensor(3, 3, 3, 0.5), p), IllConditionedInversion);
}

TEST(Invert, MultipleLayers) {
    std::mt19937_64 gen(26);
    const ImageTensor j = random_image(8, 8, 3, 27);
    PhysicalParams p = random_phys(8, 8, gen);
    p.rain_layers.push_back(random_image(8, 8, 1, 28, 0.0, 0.3));
    p.rain_layers.push_back(random_image(8, 8, 1, 29, 0.0, 0.3));
    EXPECT_LE(max_abs_diff(invert_heavyrain(compose_heavyrain(j, p).preclamp, p), j), 1e-10);
}

TEST(DegradeFull, CollapsedToPureDownsampling) {
    DegradationConfig c;
    c.transmission_range = {1.0, 1.0};
    c.noise_sigma_range = {1e-12, 1e-12};
    const ImageTensor h = random_image(32, 32, 3, 30);
    const DegradedSample s = degrade_full(h, c, 3);
    EXPECT_LE(max_abs_diff(s.lrhr, s.lr), 1e-11);
}

TEST(DegradeFull, DeterministicAndInvertible) {
    DegradationConfig c;
    c.master_seed = 31;
    c.num_streak_layers_m = 2;
    const ImageTensor h = random_image(64, 64, 3, 32);
    const DegradedSample a = degrade_full(h, c, 9), b = degrade_full(h, c, 9);
    EXPECT_EQ(a.lrhr, b.lrhr);
    EXPECT_EQ(a.lrhr_preclamp, b.lrhr_preclamp);
    EXPECT_EQ(a.lr, b.lr);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.phys.rain_layers, b.phys.rain_layers);
    EXPECT_EQ(a.phys.rain_layers.size(), 2u);
    EXPECT_NE(a.phys.rain_layers[0], a.phys.rain_layers[1]);
    EXPECT_LE(max_abs_diff(invert_heavyrain(a.lrhr_preclamp, a.phys), a.lr), 1e-10);
    for (double v : a.lrhr.data()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(DegradationConfig, Validation) {
    DegradationConfig c;
    EXPECT_NO_THROW(c.validate());
    c.transmission_range = {0.01, 0.5};
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.motion_angle_range = {10, 180};
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.atmo_range = {0.9, 0.8};
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.motion_length_range = {0, 3};
    EXPECT_THROW(c.validate(), InvalidArgument);
}
