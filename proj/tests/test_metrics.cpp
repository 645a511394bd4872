// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rainsynth/metrics.hpp"
#include "test_util.hpp"

using namespace rainsynth;
using testutil::random_image;

namespace {

// Per-window brute force: explicit 2-D Gaussian weights, direct weighted
// moments at every fully contained window position.
double naive_ssim(const ImageTensor& a, const ImageTensor& b) {
    const int n = 11, r = 5;
    const double sigma = 1.5, c1 = 1e-4, c2 = 9e-4;
    double w[11][11], total = 0.0;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            total += w[y][x] = std::exp(-((y - r) * (y - r) + (x - r) * (x - r)) / (2 * sigma * sigma));
    double sum = 0.0;
    int count = 0;
    for (int ch = 0; ch < a.channels(); ++ch)
        for (int oy = 0; oy + n <= a.height(); ++oy)
            for (int ox = 0; ox + n <= a.width(); ++ox) {
                double ma = 0, mb = 0;
                for (int y = 0; y < n; ++y)
                    for (int x = 0; x < n; ++x) {
                        ma += w[y][x] / total * a.at(oy + y, ox + x, ch);
                        mb += w[y][x] / total * b.at(oy + y, ox + x, ch);
                    }
                double va = 0, vb = 0, cov = 0;
                for (int y = 0; y < n; ++y)
                    for (int x = 0; x < n; ++x) {
                        const double da = a.at(oy + y, ox + x, ch) - ma, db = b.at(oy + y, ox + x, ch) - mb;
                        va += w[y][x] / total * da * da;
                        vb += w[y][x] / total * db * db;
                        cov += w[y][x] / total * da * db;
                    }
                sum += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++count;
            }
    return sum / count;
}

} // namespace

TEST(Psnr, Cases) {
    const ImageTensor x = random_image(8, 8, 3, 1), y = random_image(8, 8, 3, 2);
    EXPECT_TRUE(std::isinf(psnr(x, x)));
    EXPECT_GT(psnr(x, x), 0);
    EXPECT_NEAR(psnr(ImageTensor(8, 8, 1, 0.0), ImageTensor(8, 8, 1, 0.1)), 20.0, 1e-9);
    EXPECT_EQ(psnr(x, y), psnr(y, x));
    EXPECT_THROW(psnr(x, ImageTensor(8, 8, 1)), InvalidArgument);
}

TEST(Psnr, DecreasesWithNoiseAmplitude) {
    const ImageTensor x = random_image(32, 32, 3, 3);
    const ImageTensor noise = random_image(32, 32, 3, 4, -1.0, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double amp : {0.001, 0.003, 0.01, 0.03, 0.1, 0.3}) {
        ImageTensor y = x;
        for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += amp * noise.data()[i];
        const double p = psnr(x, y);
        EXPECT_LT(p, prev);
        prev = p;
    }
}

TEST(Ssim, Identity) {
    const ImageTensor x = random_image(24, 24, 3, 5);
    EXPECT_NEAR(ssim(x, x), 1.0, 1e-12);
}

TEST(Ssim, ConstantImagesClosedForm) {
    const SsimParams p;
    EXPECT_NEAR(ssim(ImageTensor(16, 16, 1, 0.0), ImageTensor(16, 16, 1, 1.0)), p.c1() / (1 + p.c1()), 1e-9);
    EXPECT_NEAR(ssim(ImageTensor(16, 16, 3, 0.0), ImageTensor(16, 16, 3, 1.0)), 9.999e-5, 1e-8);
}

TEST(Ssim, MatchesNaiveSlidingWindow) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const ImageTensor a = random_image(16, 16, 1, 10 + s), b = random_image(16, 16, 1, 30 + s);
        EXPECT_NEAR(ssim(a, b), naive_ssim(a, b), 1e-9);
    }
    const ImageTensor a = random_image(19, 23, 3, 50), b = random_image(19, 23, 3, 51);
    EXPECT_NEAR(ssim(a, b), naive_ssim(a, b), 1e-9);
}

TEST(Ssim, SymmetricAndFlipInvariant) {
    const ImageTensor a = random_image(20, 17, 3, 60), b = random_image(20, 17, 3, 61);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
    EXPECT_NEAR(ssim(flip_horizontal(a), flip_horizontal(b)), ssim(a, b), 1e-12);
}

TEST(Ssim, TooSmallThrows) {
    EXPECT_THROW(ssim(ImageTensor(10, 16, 1), ImageTensor(10, 16, 1)), InvalidArgument);
    EXPECT_THROW(ssim(ImageTensor(16, 16, 1), ImageTensor(16, 16, 3)), InvalidArgument);
}
