// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstring>

#include "rainsynth/config.hpp"
#include "rainsynth/io.hpp"
#include "test_util.hpp"

using namespace rainsynth;
using testutil::random_image;

TEST(Png, RgbAndGrayRoundTripAfterQuantization) {
    for (int c : {1, 3}) {
        const ImageTensor img = quantize8(random_image(9, 13, c, 1));
        const ImageTensor back = decode_png(encode_png(img));
        ASSERT_TRUE(back.same_shape(img));
        EXPECT_EQ(back, img);
    }
}

TEST(Png, QuantizationBound) {
    const ImageTensor img = random_image(16, 16, 3, 2);
    EXPECT_LE(testutil::max_abs_diff(decode_png(encode_png(img)), img), 0.5 / 255 + 1e-12);
}

TEST(Png, EncodingIsDeterministic) {
    const ImageTensor img = random_image(20, 20, 3, 3);
    EXPECT_EQ(encode_png(img), encode_png(img));
}

TEST(Png, GarbageIsRejected) {
    EXPECT_THROW(decode_png(Bytes{1, 2, 3, 4, 5}), IoError);
}

TEST(ParsedPng, RoundTripAndRejectsUnknownLabels) {
    const ParsedMap m = synth_face_mask(64, 64, 4);
    EXPECT_EQ(decode_parsed_png(encode_parsed_png(m)), m);
    ImageTensor bad(4, 4, 1, 200.0 / 255.0);
    EXPECT_THROW(decode_parsed_png(encode_png(bad)), CorruptionError);
}

TEST(RawF32, LayoutAndRoundTrip) {
    ImageTensor img(2, 3, 3);
    for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = 0.5 + 0.25 * static_cast<double>(i);
    const Bytes raw = encode_raw_f32(img);
    ASSERT_EQ(raw.size(), 16u + 4u * img.size());
    EXPECT_EQ(std::string(raw.begin(), raw.begin() + 4), "RSF1");
    EXPECT_EQ(raw[4], 2);
    EXPECT_EQ(raw[8], 3);
    EXPECT_EQ(raw[12], 3);
    float first;
    std::memcpy(&first, raw.data() + 16, 4); // host is little-endian in CI
    EXPECT_EQ(first, 0.5f);
    EXPECT_EQ(decode_raw_f32(raw), img); // values are exactly representable
}

TEST(RawF32, CorruptHeaderOrSize) {
    Bytes raw = encode_raw_f32(ImageTensor(2, 2, 1, 0.3));
    Bytes bad_magic = raw;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_raw_f32(bad_magic), CorruptionError);
    Bytes truncated(raw.begin(), raw.end() - 1);
    EXPECT_THROW(decode_raw_f32(truncated), CorruptionError);
}

TEST(Sha256, KnownVector) {
    const std::string s = "abc";
    EXPECT_EQ(sha256_hex(Bytes(s.begin(), s.end())),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Files, MissingFileIsIoErrorNamingPath) {
    try {
        read_file("/nonexistent/dir/x.png");
        FAIL();
    } catch (const IoError& e) {
        EXPECT_EQ(e.path(), "/nonexistent/dir/x.png");
    }
}

TEST(RunConfigFile, RoundTripsLosslessly) {
    RunConfig c;
    c.degradation.scale_s = 2;
    c.degradation.num_streak_layers_m = 3;
    c.degradation.noise_sigma_range = {0.123456789012345, 0.2999999999999999};
    c.degradation.motion_angle_range = {10.5, 170.25};
    c.degradation.motion_length_range = {2, 11};
    c.degradation.use_prefilter = true;
    c.degradation.prefilter_sigma = 0.7;
    c.degradation.master_seed = 18446744073709551615ull;
    c.loss_weights.omega1 = 0.3;
    c.loss_weights.gamma4 = 0.0;
    c.ssim.k1 = 0.02;
    c.crop_boxes.eye = {0.1, 0.2, 0.9, 0.45};
    c.hr_dir = "faces/hr";
    c.out_dir = "corpus";
    c.split_ratios = {18000, 1800, 100};
    c.write_preclamp = false;
    c.synth_masks = true;
    c.parsed_dir = "faces/parsed";
    const std::string text = dump_run_config(c);
    EXPECT_EQ(parse_run_config(text), c);
    EXPECT_EQ(dump_run_config(parse_run_config(text)), text);
}

TEST(RunConfigFile, DefaultsAndErrors) {
    EXPECT_EQ(parse_run_config("{}"), RunConfig{});
    EXPECT_THROW(parse_run_config("{not json"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"degradation": {"transmission_range": [0.01, 0.5]}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"degradation": {"scale_s": "four"}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"crop_boxes": {"eye": [0.5, 0.5, 0.4, 0.6]}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"io": {"split_ratios": [1, 2]}})"), ConfigError);
    EXPECT_THROW(parse_run_config("[]"), ConfigError);
}
