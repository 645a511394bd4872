// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "rainsynth/dataset.hpp"
#include "rainsynth/serialization.hpp"

namespace rainsynth {

/// Everything a CLI run needs, in one JSON file:
///
///   {
///     "degradation":  { DegradationConfig fields },
///     "loss_weights": { LossWeights fields },
///     "ssim":         { SsimParams fields },
///     "crop_boxes":   { "eye": [x0,y0,x1,y1], "nose": [...], "lip": [...] },
///     "io": { "hr_dir": "...", "out_dir": "...", "split_ratios": [0.8,0.1,0.1],
///             "write_preclamp": true, "synth_masks": false, "parsed_dir": "..." }
///   }
///
/// Missing sections and keys take their defaults.
struct RunConfig {
    DegradationConfig degradation;
    LossWeights loss_weights;
    SsimParams ssim;
    CropBoxes crop_boxes = default_boxes();
    std::string hr_dir;
    std::string out_dir;
    SplitRatios split_ratios;
    bool write_preclamp = true;
    bool synth_masks = false;
    std::optional<std::string> parsed_dir;

    void validate() const {
        try {
            degradation.validate();
            loss_weights.validate();
            ssim.validate();
            split_ratios.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
        for (const NormRect* r : {&crop_boxes.eye, &crop_boxes.nose, &crop_boxes.lip})
            if (!r->valid()) throw ConfigError("crop box outside [0,1]^2 or empty");
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline void to_json(json& j, const RunConfig& c) {
    json io{{"hr_dir", c.hr_dir},
            {"out_dir", c.out_dir},
            {"split_ratios", c.split_ratios},
            {"write_preclamp", c.write_preclamp},
            {"synth_masks", c.synth_masks}};
    if (c.parsed_dir) io["parsed_dir"] = *c.parsed_dir;
    j = json{{"degradation", c.degradation},
             {"loss_weights", c.loss_weights},
             {"ssim", c.ssim},
             {"crop_boxes", c.crop_boxes},
             {"io", io}};
}

inline void from_json(const json& j, RunConfig& c) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    detail::read_opt(j, "degradation", c.degradation);
    detail::read_opt(j, "loss_weights", c.loss_weights);
    detail::read_opt(j, "ssim", c.ssim);
    detail::read_opt(j, "crop_boxes", c.crop_boxes);
    if (auto it = j.find("io"); it != j.end()) {
        const json& io = *it;
        detail::read_opt(io, "hr_dir", c.hr_dir);
        detail::read_opt(io, "out_dir", c.out_dir);
        detail::read_opt(io, "split_ratios", c.split_ratios);
        detail::read_opt(io, "write_preclamp", c.write_preclamp);
        detail::read_opt(io, "synth_masks", c.synth_masks);
        if (auto p = io.find("parsed_dir"); p != io.end() && !p->is_null()) c.parsed_dir = p->get<std::string>();
    }
}

/// Parses and validates; every failure surfaces as ConfigError except a
/// missing or unreadable file, which is an IoError.
inline RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    try {
        cfg = json::parse(text).get<RunConfig>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed run config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    const Bytes raw = read_file(path);
    return parse_run_config(std::string(raw.begin(), raw.end()));
}

inline std::string dump_run_config(const RunConfig& cfg) { return json(cfg).dump(2) + "\n"; }

} // namespace rainsynth
