// SPDX-License-Identifier: Apache-2.0
//
// nlohmann::json conversions for the toolkit's parameter types. Missing keys
// keep their defaults; present keys must have the right type.
#pragma once

#include <json.hpp>

#include "rainsynth/face_crop.hpp"
#include "rainsynth/losses.hpp"
#include "rainsynth/metrics.hpp"
#include "rainsynth/rain_model.hpp"

namespace rainsynth {

using json = nlohmann::json;

namespace detail {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

} // namespace detail

template <typename T>
void to_json(json& j, const Range<T>& r) {
    j = json::array({r.lo, r.hi});
}

template <typename T>
void from_json(const json& j, Range<T>& r) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("range must be a two-element array [lo, hi]");
    j.at(0).get_to(r.lo);
    j.at(1).get_to(r.hi);
}

inline void to_json(json& j, const DegradationConfig& c) {
    j = json{{"scale_s", c.scale_s},
             {"num_streak_layers_m", c.num_streak_layers_m},
             {"noise_sigma_range", c.noise_sigma_range},
             {"motion_angle_range", c.motion_angle_range},
             {"motion_length_range", c.motion_length_range},
             {"atmo_range", c.atmo_range},
             {"transmission_range", c.transmission_range},
             {"use_prefilter", c.use_prefilter},
             {"prefilter_sigma", c.prefilter_sigma},
             {"master_seed", c.master_seed}};
}

inline void from_json(const json& j, DegradationConfig& c) {
    detail::read_opt(j, "scale_s", c.scale_s);
    detail::read_opt(j, "num_streak_layers_m", c.num_streak_layers_m);
    detail::read_opt(j, "noise_sigma_range", c.noise_sigma_range);
    detail::read_opt(j, "motion_angle_range", c.motion_angle_range);
    detail::read_opt(j, "motion_length_range", c.motion_length_range);
    detail::read_opt(j, "atmo_range", c.atmo_range);
    detail::read_opt(j, "transmission_range", c.transmission_range);
    detail::read_opt(j, "use_prefilter", c.use_prefilter);
    detail::read_opt(j, "prefilter_sigma", c.prefilter_sigma);
    detail::read_opt(j, "master_seed", c.master_seed);
}

inline void to_json(json& j, const RainParams& p) {
    j = json{{"noise_sigma", p.noise_sigma},
             {"motion_angle", p.motion_angle},
             {"motion_length", p.motion_length},
             {"atmo_value", p.atmo_value},
             {"transmission_value", p.transmission_value},
             {"sample_seed", p.sample_seed}};
}

inline void from_json(const json& j, RainParams& p) {
    j.at("noise_sigma").get_to(p.noise_sigma);
    j.at("motion_angle").get_to(p.motion_angle);
    j.at("motion_length").get_to(p.motion_length);
    j.at("atmo_value").get_to(p.atmo_value);
    j.at("transmission_value").get_to(p.transmission_value);
    j.at("sample_seed").get_to(p.sample_seed);
}

inline void to_json(json& j, const LossWeights& w) {
    j = json{{"omega1", w.omega1}, {"gamma_p", w.gamma_p}, {"gamma1", w.gamma1},
             {"gamma2", w.gamma2}, {"gamma3", w.gamma3},   {"gamma4", w.gamma4}};
}

inline void from_json(const json& j, LossWeights& w) {
    detail::read_opt(j, "omega1", w.omega1);
    detail::read_opt(j, "gamma_p", w.gamma_p);
    detail::read_opt(j, "gamma1", w.gamma1);
    detail::read_opt(j, "gamma2", w.gamma2);
    detail::read_opt(j, "gamma3", w.gamma3);
    detail::read_opt(j, "gamma4", w.gamma4);
}

inline void to_json(json& j, const SsimParams& p) {
    j = json{{"window", p.window}, {"sigma", p.sigma}, {"k1", p.k1}, {"k2", p.k2},
             {"dynamic_range", p.dynamic_range}};
}

inline void from_json(const json& j, SsimParams& p) {
    detail::read_opt(j, "window", p.window);
    detail::read_opt(j, "sigma", p.sigma);
    detail::read_opt(j, "k1", p.k1);
    detail::read_opt(j, "k2", p.k2);
    detail::read_opt(j, "dynamic_range", p.dynamic_range);
}

inline void to_json(json& j, const NormRect& r) { j = json::array({r.x0, r.y0, r.x1, r.y1}); }

inline void from_json(const json& j, NormRect& r) {
    if (!j.is_array() || j.size() != 4) throw ConfigError("crop box must be [x0, y0, x1, y1]");
    r = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline void to_json(json& j, const CropBoxes& b) { j = json{{"eye", b.eye}, {"nose", b.nose}, {"lip", b.lip}}; }

inline void from_json(const json& j, CropBoxes& b) {
    detail::read_opt(j, "eye", b.eye);
    detail::read_opt(j, "nose", b.nose);
    detail::read_opt(j, "lip", b.lip);
}

} // namespace rainsynth
