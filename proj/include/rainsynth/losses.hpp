// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <string>

#include "rainsynth/errors.hpp"
#include "rainsynth/image.hpp"
#include "rainsynth/rain_model.hpp"

namespace rainsynth {

/// Loss weights. omega1 balances the perceptual term of the rain-removal
/// objective; gamma_p and gamma1..4 weight the generator objective.
struct LossWeights {
    double omega1 = 0.1;
    double gamma_p = 1e-3;
    double gamma1 = 1e-3;
    double gamma2 = 1e-4;
    double gamma3 = 1e-4;
    double gamma4 = 1e-4;

    void validate() const {
        for (double v : {omega1, gamma_p, gamma1, gamma2, gamma3, gamma4})
            if (!(v >= 0.0) || !std::isfinite(v))
                throw InvalidArgument("LossWeights: all weights must be finite and >= 0");
    }

    friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// Discriminator outputs for one image: global, eye, nose, lip.
struct DiscriminatorScores {
    double d_global = 0.0;
    double d_eye = 0.0;
    double d_nose = 0.0;
    double d_lip = 0.0;

    static DiscriminatorScores all(double v) { return {v, v, v, v}; }

    void validate() const {
        for (double v : {d_global, d_eye, d_nose, d_lip})
            if (!(v >= 0.0 && v <= 1.0))
                throw InvalidArgument("DiscriminatorScores: scores must lie in [0,1], got " +
                                      std::to_string(v));
    }
};

struct DiscriminatorLosses {
    double global = 0.0;
    double eye = 0.0;
    double nose = 0.0;
    double lip = 0.0;
};

using FeatureSet = std::array<ImageTensor, 3>;

/// Three-level feature pyramid used by the perceptual loss.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual FeatureSet extract(const ImageTensor& img) const = 0;
    virtual int min_size() const { return 8; }
};

/// Gradient magnitude at three Gaussian-pyramid levels. Level k+1 is level k
/// blurred with a 5x5 Gaussian (sigma 1) and decimated by two.
class PyramidGradientExtractor final : public FeatureExtractor {
public:
    FeatureSet extract(const ImageTensor& img) const override {
        if (img.height() < min_size() || img.width() < min_size())
            throw InvalidArgument("PyramidGradientExtractor: image must be at least 8x8");
        static const Kernel2D blur = gaussian_kernel(1.0, 2);
        FeatureSet out;
        ImageTensor base = img;
        for (int level = 0; level < 3; ++level) {
            out[level] = gradient_magnitude(base);
            if (level < 2) base = decimate2(convolve2d(base, blur));
        }
        return out;
    }

    static ImageTensor gradient_magnitude(const ImageTensor& img) {
        const int h = img.height(), w = img.width();
        ImageTensor out(h, w, img.channels());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < img.channels(); ++c) {
                    const double gx =
                        0.5 * (img.at(y, std::min(x + 1, w - 1), c) - img.at(y, std::max(x - 1, 0), c));
                    const double gy =
                        0.5 * (img.at(std::min(y + 1, h - 1), x, c) - img.at(std::max(y - 1, 0), x, c));
                    out.at(y, x, c) = std::sqrt(gx * gx + gy * gy);
                }
        return out;
    }

    static ImageTensor decimate2(const ImageTensor& img) {
        ImageTensor out((img.height() + 1) / 2, (img.width() + 1) / 2, img.channels());
        for (int y = 0; y < out.height(); ++y)
            for (int x = 0; x < out.width(); ++x)
                for (int c = 0; c < img.channels(); ++c) out.at(y, x, c) = img.at(2 * y, 2 * x, c);
        return out;
    }
};

inline const FeatureExtractor& default_extractor() {
    static const PyramidGradientExtractor extractor;
    return extractor;
}

inline double mse(const ImageTensor& a, const ImageTensor& b) {
    if (!a.same_shape(b)) throw InvalidArgument("mse: image shapes differ");
    auto da = a.data();
    auto db = b.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = da[i] - db[i];
        acc += d * d;
    }
    return acc / static_cast<double>(da.size());
}

/// mse(J_hat, J) + mse(I_hat, I); I_hat comes from recompose().
inline double loss_recon(const ImageTensor& j_hat, const ImageTensor& j, const ImageTensor& i_hat,
                         const ImageTensor& i) {
    return mse(j_hat, j) + mse(i_hat, i);
}

/// Sum over the three levels of the squared L2 feature distance.
inline double perceptual(const ImageTensor& a, const ImageTensor& b,
                         const FeatureExtractor& extractor = default_extractor()) {
    if (!a.same_shape(b)) throw InvalidArgument("perceptual: image shapes differ");
    const FeatureSet fa = extractor.extract(a);
    const FeatureSet fb = extractor.extract(b);
    double total = 0.0;
    for (std::size_t level = 0; level < fa.size(); ++level) {
        if (!fa[level].same_shape(fb[level]))
            throw InvalidArgument("perceptual: extractor produced mismatched feature shapes");
        auto da = fa[level].data();
        auto db = fb[level].data();
        for (std::size_t i = 0; i < da.size(); ++i) {
            const double d = da[i] - db[i];
            total += d * d;
        }
    }
    return total;
}

/// Rain-removal objective: reconstruction loss plus omega1 times the
/// perceptual loss over both (J_hat, J) and (I_hat, I).
inline double loss_rt(const ImageTensor& j_hat, const ImageTensor& j, const ImageTensor& i_hat,
                      const ImageTensor& i, const LossWeights& w,
                      const FeatureExtractor& extractor = default_extractor()) {
    w.validate();
    const double recon = loss_recon(j_hat, j, i_hat, i);
    if (w.omega1 == 0.0) return recon;
    return recon + w.omega1 * (perceptual(j_hat, j, extractor) + perceptual(i_hat, i, extractor));
}

/// Adversarial part of the generator objective:
/// g1 (1 - D_G) + g2 (1 - D_eye) + g3 (1 - D_nose) + g4 (1 - D_lip).
inline double loss_adversarial(const DiscriminatorScores& s, const LossWeights& w) {
    s.validate();
    return w.gamma1 * (1.0 - s.d_global) + w.gamma2 * (1.0 - s.d_eye) + w.gamma3 * (1.0 - s.d_nose) +
           w.gamma4 * (1.0 - s.d_lip);
}

/// Generator objective: mse(H, H_hat) + gamma_p * perceptual(H, H_hat) + adversarial.
inline double loss_generator(const ImageTensor& h, const ImageTensor& h_hat,
                             const DiscriminatorScores& scores, const LossWeights& w,
                             const FeatureExtractor& extractor = default_extractor()) {
    w.validate();
    const double adversarial = loss_adversarial(scores, w);
    const double pixel = mse(h, h_hat);
    const double feature = w.gamma_p == 0.0 ? 0.0 : w.gamma_p * perceptual(h, h_hat, extractor);
    return pixel + feature + adversarial;
}

/// 1 - real + fake for each discriminator.
inline DiscriminatorLosses loss_discriminators(const DiscriminatorScores& real,
                                               const DiscriminatorScores& fake) {
    real.validate();
    fake.validate();
    return {1.0 - real.d_global + fake.d_global, 1.0 - real.d_eye + fake.d_eye,
            1.0 - real.d_nose + fake.d_nose, 1.0 - real.d_lip + fake.d_lip};
}

} // namespace rainsynth
