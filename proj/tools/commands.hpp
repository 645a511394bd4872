// SPDX-License-Identifier: Apache-2.0
//
// Subcommand bodies for the rainsynth CLI. Standard output carries JSON
// lines only; diagnostics go to the error stream.
//
// Exit codes: 0 ok, 1 usage / config / data error, 2 I/O error.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "rainsynth/rainsynth.hpp"

namespace rainsynth::cli {

inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kIoError = 2;

/// RAINSYNTH_THREADS caps the worker count; unset or invalid means hardware
/// parallelism.
inline int threads_from_env() {
    if (const char* v = std::getenv("RAINSYNTH_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(v, &end, 10);
        if (end != v && *end == '\0' && n > 0) return static_cast<int>(n);
    }
    return 0;
}

/// JSON number, or the string "inf" for an infinite PSNR.
inline json score_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

struct SynthArgs {
    std::string config_file;
    std::string hr_dir;
    std::string out_dir;
    std::optional<std::size_t> count;
    std::optional<std::uint64_t> seed;
};

inline int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_run_config(args.config_file);
    } catch (const IoError& e) {
        err << "config error: " << e.what() << "\n";
        return kDataError;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kDataError;
    }
    if (args.seed) cfg.degradation.master_seed = *args.seed;

    GenerateOptions opts;
    opts.ratios = cfg.split_ratios;
    opts.threads = threads_from_env();
    opts.write_preclamp = cfg.write_preclamp;
    opts.synth_masks = cfg.synth_masks;
    if (cfg.parsed_dir) opts.parsed_dir = *cfg.parsed_dir;
    opts.count = args.count;

    const auto start = std::chrono::steady_clock::now();
    Manifest m;
    try {
        m = generate_dataset(args.hr_dir, cfg.degradation, args.out_dir, opts);
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    for (const auto& e : m.errors) err << "skipped " << e.file << ": " << e.message << "\n";
    std::size_t per_split[3] = {0, 0, 0};
    for (const auto& r : m.records) ++per_split[static_cast<int>(r.split)];
    out << json{{"command", "synth"},
                {"manifest", (m.root / "manifest.json").string()},
                {"records", m.records.size()},
                {"train", per_split[0]},
                {"val", per_split[1]},
                {"test", per_split[2]},
                {"errors", m.errors.size()},
                {"master_seed", m.config.master_seed},
                {"elapsed_s", elapsed}}
               .dump()
        << "\n";
    return kOk;
}

namespace detail {

/// Loads a manifest, mapping failures onto exit codes.
inline std::optional<Manifest> open_manifest(const std::string& path, std::ostream& err, int& code) {
    try {
        return load_manifest(path);
    } catch (const std::exception& e) {
        err << "cannot load manifest: " << e.what() << "\n";
        code = kIoError;
        return std::nullopt;
    }
}

inline bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace detail

/// Recovers J from the stored pre-clamp dump and the recorded parameters.
/// Writes a PNG, or a raw float dump when out_path ends in ".f32".
inline int cmd_invert(const std::string& manifest_path, const std::string& id, const std::string& out_path,
                      std::ostream& out, std::ostream& err) {
    int code = kOk;
    auto m = detail::open_manifest(manifest_path, err, code);
    if (!m) return code;
    const SampleRecord* rec = m->find(id);
    if (!rec) {
        err << "unknown sample id '" << id << "'\n";
        return kDataError;
    }
    if (!rec->has("preclamp_lrhr")) {
        err << "sample '" << id << "' has no pre-clamp dump; regenerate with io.write_preclamp = true\n";
        return kDataError;
    }
    try {
        const LoadedSample s = load_sample(*m, id);
        const ImageTensor recovered = invert_heavyrain(*s.lrhr_preclamp, s.phys);
        const ImageTensor reference = replay_sample(*m, id).lr;
        if (detail::has_suffix(out_path, ".f32"))
            write_file(out_path, encode_raw_f32(recovered));
        else
            write_png(out_path, recovered);
        double max_err = 0.0;
        for (std::size_t i = 0; i < recovered.size(); ++i)
            max_err = std::max(max_err, std::abs(recovered.data()[i] - reference.data()[i]));
        out << json{{"command", "invert"},
                    {"id", id},
                    {"output", out_path},
                    {"psnr", score_value(psnr(recovered, reference))},
                    {"max_abs_error", max_err}}
                   .dump()
            << "\n";
    } catch (const IllConditionedInversion& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        err << "I/O error: " << e.what() << "\n";
        return kIoError;
    }
    return kOk;
}

enum class Metric { psnr, ssim, both };

inline int cmd_score(const std::string& ref_dir, const std::string& test_dir, Metric metric, std::ostream& out,
                     std::ostream& err, const SsimParams& ssim_params = {}) {
    std::vector<fs::path> ref_files, test_files;
    try {
        ref_files = list_png_inputs(ref_dir);
        test_files = list_png_inputs(test_dir);
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return kIoError;
    }
    std::set<std::string> ref_names, test_names;
    for (const auto& p : ref_files) ref_names.insert(p.filename().string());
    for (const auto& p : test_files) test_names.insert(p.filename().string());
    if (ref_names != test_names) {
        err << "file sets differ\n";
        for (const auto& n : ref_names)
            if (!test_names.count(n)) err << "  only in " << ref_dir << ": " << n << "\n";
        for (const auto& n : test_names)
            if (!ref_names.count(n)) err << "  only in " << test_dir << ": " << n << "\n";
        return kDataError;
    }
    if (ref_names.empty()) {
        err << "no PNG files to score\n";
        return kDataError;
    }

    const bool want_psnr = metric != Metric::ssim, want_ssim = metric != Metric::psnr;
    double psnr_sum = 0.0, ssim_sum = 0.0;
    bool psnr_inf = false;
    std::vector<std::string> lines;
    for (const auto& name : ref_names) {
        json rec{{"file", name}};
        try {
            const ImageTensor a = read_png(fs::path(ref_dir) / name);
            const ImageTensor b = read_png(fs::path(test_dir) / name);
            if (!a.same_shape(b)) {
                err << name << ": image shapes differ\n";
                return kDataError;
            }
            if (want_psnr) {
                const double p = psnr(a, b);
                if (std::isinf(p)) psnr_inf = true;
                else psnr_sum += p;
                rec["psnr"] = score_value(p);
            }
            if (want_ssim) {
                const double s = ssim(a, b, ssim_params);
                ssim_sum += s;
                rec["ssim"] = s;
            }
        } catch (const IoError& e) {
            err << "I/O error: " << e.what() << "\n";
            return kIoError;
        } catch (const InvalidArgument& e) {
            err << name << ": " << e.what() << "\n";
            return kDataError;
        }
        lines.push_back(rec.dump());
    }
    for (const auto& l : lines) out << l << "\n";
    const double n = static_cast<double>(ref_names.size());
    json agg{{"aggregate", true}, {"count", ref_names.size()}};
    if (want_psnr) agg["psnr_mean"] = psnr_inf ? json("inf") : json(psnr_sum / n);
    if (want_ssim) agg["ssim_mean"] = ssim_sum / n;
    out << agg.dump() << "\n";
    return kOk;
}

/// HR | LR | rain-streaked | LRHR | S | A | T, each resized to HR size.
inline ImageTensor build_montage(const ImageTensor& hr, const DegradedSample& s) {
    const int h = hr.height(), w = hr.width();
    auto panel = [&](const ImageTensor& img) {
        const ImageTensor up = (img.height() == h && img.width() == w) ? img : resize_bicubic(img, h, w);
        return broadcast_channels(clamp01(up), 3);
    };
    const ImageTensor panels[] = {panel(hr),
                                  panel(s.lr),
                                  panel(rain_streaked(s.lr, s.phys)),
                                  panel(s.lrhr),
                                  panel(rain_layer_image(s.phys)),
                                  panel(s.phys.atmospheric),
                                  panel(s.phys.transmission)};
    constexpr int count = static_cast<int>(std::size(panels));
    ImageTensor out(h, w * count, 3);
    for (int p = 0; p < count; ++p)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c) out.at(y, p * w + x, c) = panels[p].at(y, x, c);
    return out;
}

inline constexpr int kMontagePanels = 7;

inline int cmd_inspect(const std::string& manifest_path, const std::string& id,
                       const std::optional<std::string>& montage, std::ostream& out, std::ostream& err) {
    int code = kOk;
    auto m = detail::open_manifest(manifest_path, err, code);
    if (!m) return code;
    const SampleRecord* rec = m->find(id);
    if (!rec) {
        err << "unknown sample id '" << id << "'\n";
        return kDataError;
    }
    json info = *rec;
    info["command"] = "inspect";
    json abs_paths = json::object();
    for (const auto& [kind, rel] : rec->paths) abs_paths[kind] = (m->root / rel).string();
    info["files"] = abs_paths;
    if (montage) {
        try {
            const DegradedSample s = replay_sample(*m, id);
            const ImageTensor hr = read_png(m->path_of(*rec, "hr"));
            write_png(*montage, build_montage(hr, s));
            info["montage"] = *montage;
            info["montage_panels"] = json::array({"hr", "lr", "rain_streaked", "lrhr", "rain_layer", "atmospheric", "transmission"});
        } catch (const std::exception& e) {
            err << "I/O error: " << e.what() << "\n";
            return kIoError;
        }
    }
    out << info.dump() << "\n";
    return kOk;
}

} // namespace rainsynth::cli
