// SPDX-License-Identifier: Apache-2.0
//
// Reproducible synthetic corpus generation.
//
// Layout under the output directory:
//   hr/<id>.png  lr/<id>.png  lrhr/<id>.png  rain/<id>.png
//   parsed/<id>.png (optional)  preclamp/<id>.f32 (optional)
//   manifest.json  records.jsonl
//
// Every sample is a pure function of (HR image, config, sample index), so the
// output is byte-identical regardless of worker count.
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rainsynth/errors.hpp"
#include "rainsynth/face_crop.hpp"
#include "rainsynth/io.hpp"
#include "rainsynth/rain_model.hpp"
#include "rainsynth/serialization.hpp"

namespace rainsynth {

inline constexpr const char* kToolkitVersion = "rainsynth 0.1.0";

enum class Split { train, val, test };

inline const char* to_string(Split s) noexcept {
    switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    return "?";
}

inline Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw CorruptionError("unknown split '" + s + "'");
}

/// Relative split weights; they need not sum to one.
struct SplitRatios {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;

    void validate() const {
        if (!(train >= 0 && val >= 0 && test >= 0) || !(train + val + test > 0))
            throw InvalidArgument("SplitRatios: weights must be >= 0 with a positive sum");
    }
    friend bool operator==(const SplitRatios&, const SplitRatios&) = default;
};

/// Largest-remainder apportionment of n items.
inline std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& r) {
    r.validate();
    const double total = r.train + r.val + r.test;
    const std::array<double, 3> weights = {r.train, r.val, r.test};
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double exact = static_cast<double>(n) * weights[i] / total;
        // tolerate representation error such as 10 * 0.8 / 1.0000000000000002
        counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        remainder[i] = exact - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    while (assigned < n) {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (remainder[i] > remainder[best]) best = i;
        ++counts[best];
        remainder[best] = -1.0;
        ++assigned;
    }
    while (assigned > n) { // only reachable through the tolerance above
        for (int i = 2; i >= 0 && assigned > n; --i)
            if (counts[i] > 0) --counts[i], --assigned;
    }
    return counts;
}

/// Orders ids by a seeded hash and fills train, val, test quotas in that order.
/// An id's position in the order depends only on (id, seed).
inline std::vector<Split> assign_splits(const std::vector<std::string>& ids, const SplitRatios& ratios,
                                        std::uint64_t seed) {
    const auto counts = split_counts(ids.size(), ratios);
    std::vector<std::size_t> order(ids.size());
    std::vector<std::uint64_t> keys(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        order[i] = i;
        keys[i] = derive_seed(seed, fnv1a64(ids[i]));
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return keys[a] != keys[b] ? keys[a] < keys[b] : ids[a] < ids[b];
    });
    std::vector<Split> out(ids.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < counts[0]; ++i) out[order[k++]] = Split::train;
    for (std::size_t i = 0; i < counts[1]; ++i) out[order[k++]] = Split::val;
    for (std::size_t i = 0; i < counts[2]; ++i) out[order[k++]] = Split::test;
    return out;
}

struct SampleRecord {
    std::string id;
    std::uint64_t index = 0;
    Split split = Split::train;
    /// Artifact kind ("hr", "lr", "lrhr", "rain_layer", "parsed_hr", "preclamp_lrhr")
    /// to path relative to the manifest directory.
    std::map<std::string, std::string> paths;
    std::map<std::string, std::string> sha256;
    std::array<int, 3> hr_shape{}; // h, w, c
    std::array<int, 3> lr_shape{};
    RainParams params;

    bool has(const std::string& kind) const { return paths.count(kind) != 0; }
};

struct GenerationError {
    std::string file;
    std::string message;
};

struct Manifest {
    std::string toolkit_version = kToolkitVersion;
    std::string generated_at;
    DegradationConfig config;
    SplitRatios ratios;
    std::string parsed_source = "none"; // none | synthetic | directory
    std::vector<SampleRecord> records;
    std::vector<GenerationError> errors;
    fs::path root; // directory holding manifest.json; not serialized

    const SampleRecord* find(const std::string& id) const {
        for (const auto& r : records)
            if (r.id == id) return &r;
        return nullptr;
    }

    const SampleRecord& at(const std::string& id) const {
        if (const auto* r = find(id)) return *r;
        throw InvalidArgument("unknown sample id '" + id + "'");
    }

    fs::path path_of(const SampleRecord& r, const std::string& kind) const { return root / r.paths.at(kind); }
};

// ---------------------------------------------------------------------------
// JSON form

inline void to_json(json& j, const SampleRecord& r) {
    j = json{{"id", r.id},
             {"index", r.index},
             {"split", to_string(r.split)},
             {"paths", r.paths},
             {"sha256", r.sha256},
             {"hr_shape", r.hr_shape},
             {"lr_shape", r.lr_shape},
             {"params", r.params},
             {"atmo_value", r.params.atmo_value},
             {"transmission_value", r.params.transmission_value}};
}

inline void from_json(const json& j, SampleRecord& r) {
    j.at("id").get_to(r.id);
    j.at("index").get_to(r.index);
    r.split = split_from_string(j.at("split").get<std::string>());
    j.at("paths").get_to(r.paths);
    j.at("sha256").get_to(r.sha256);
    j.at("hr_shape").get_to(r.hr_shape);
    j.at("lr_shape").get_to(r.lr_shape);
    j.at("params").get_to(r.params);
}

inline void to_json(json& j, const SplitRatios& r) { j = json::array({r.train, r.val, r.test}); }

inline void from_json(const json& j, SplitRatios& r) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("split_ratios must be [train, val, test]");
    r = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json manifest_to_json(const Manifest& m) {
    json errors = json::array();
    for (const auto& e : m.errors) errors.push_back({{"file", e.file}, {"message", e.message}});
    return json{{"toolkit_version", m.toolkit_version},
                {"generated_at", m.generated_at},
                {"config", m.config},
                {"split_ratios", m.ratios},
                {"parsed_source", m.parsed_source},
                {"records_file", "records.jsonl"},
                {"record_count", m.records.size()},
                {"records", m.records},
                {"errors", errors}};
}

inline Manifest manifest_from_json(const json& j) {
    Manifest m;
    j.at("toolkit_version").get_to(m.toolkit_version);
    detail::read_opt(j, "generated_at", m.generated_at);
    j.at("config").get_to(m.config);
    j.at("split_ratios").get_to(m.ratios);
    detail::read_opt(j, "parsed_source", m.parsed_source);
    j.at("records").get_to(m.records);
    if (auto it = j.find("errors"); it != j.end())
        for (const auto& e : *it) m.errors.push_back({e.at("file").get<std::string>(), e.at("message").get<std::string>()});
    return m;
}

/// Writes manifest.json and records.jsonl into m.root.
inline void write_manifest(const Manifest& m) {
    const std::string doc = manifest_to_json(m).dump(2) + "\n";
    write_file(m.root / "manifest.json", Bytes(doc.begin(), doc.end()));
    std::string lines;
    for (const auto& r : m.records) lines += json(r).dump() + "\n";
    write_file(m.root / "records.jsonl", Bytes(lines.begin(), lines.end()));
}

/// Accepts either the manifest file or the directory containing it.
inline Manifest load_manifest(const fs::path& path) {
    const fs::path file = fs::is_directory(path) ? path / "manifest.json" : path;
    const Bytes raw = read_file(file);
    Manifest m;
    try {
        m = manifest_from_json(json::parse(raw.begin(), raw.end()));
        m.config.validate();
    } catch (const json::exception& e) {
        throw CorruptionError(file.string() + ": malformed manifest: " + e.what());
    } catch (const ConfigError& e) {
        throw CorruptionError(file.string() + ": malformed manifest: " + e.what());
    } catch (const InvalidArgument& e) {
        throw CorruptionError(file.string() + ": invalid manifest config: " + e.what());
    }
    m.root = file.parent_path();
    return m;
}

// ---------------------------------------------------------------------------
// Generation

struct GenerateOptions {
    SplitRatios ratios;
    int threads = 0; // 0: hardware concurrency
    bool write_preclamp = true;
    bool synth_masks = false;
    std::optional<fs::path> parsed_dir; // <id>.png label maps matching HR inputs
    std::optional<std::size_t> count;   // use only the first N inputs
};

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
}

inline std::vector<fs::path> list_png_inputs(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError(dir.string(), "not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

/// Encoded artifacts of one sample, keyed like SampleRecord::paths.
struct SampleArtifacts {
    std::map<std::string, Bytes> files;
    DegradedSample sample;
};

inline std::string artifact_path(const std::string& kind, const std::string& id) {
    if (kind == "hr") return "hr/" + id + ".png";
    if (kind == "lr") return "lr/" + id + ".png";
    if (kind == "lrhr") return "lrhr/" + id + ".png";
    if (kind == "rain_layer") return "rain/" + id + ".png";
    if (kind == "parsed_hr") return "parsed/" + id + ".png";
    if (kind == "preclamp_lrhr") return "preclamp/" + id + ".f32";
    throw InvalidArgument("unknown artifact kind '" + kind + "'");
}

/// Sum of the rain layers, clamped; the persisted "rain_layer" image.
inline ImageTensor rain_layer_image(const PhysicalParams& phys) {
    ImageTensor sum = phys.rain_layers.front();
    for (std::size_t i = 1; i < phys.rain_layers.size(); ++i) {
        auto dst = sum.data();
        auto src = phys.rain_layers[i].data();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
    return clamp01(std::move(sum));
}

/// Produces every artifact that can be re-derived from (HR, config, index).
inline SampleArtifacts render_sample(const ImageTensor& hr, const DegradationConfig& config, std::uint64_t index,
                                     bool with_preclamp, bool synth_mask) {
    SampleArtifacts out;
    out.sample = degrade_full(hr, config, index);
    out.files["hr"] = encode_png(hr);
    out.files["lr"] = encode_png(out.sample.lr);
    out.files["lrhr"] = encode_png(out.sample.lrhr);
    out.files["rain_layer"] = encode_png(rain_layer_image(out.sample.phys));
    if (synth_mask)
        out.files["parsed_hr"] = encode_parsed_png(synth_face_mask(hr.height(), hr.width(), out.sample.params.sample_seed));
    if (with_preclamp) out.files["preclamp_lrhr"] = encode_raw_f32(out.sample.lrhr_preclamp);
    return out;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Generates the corpus into out_dir. Unreadable inputs are recorded in
/// Manifest::errors and skipped; an empty input set is an error.
inline Manifest generate_dataset(const fs::path& hr_dir, const DegradationConfig& config, const fs::path& out_dir,
                                 const GenerateOptions& opts = {}) {
    config.validate();
    opts.ratios.validate();
    auto inputs = list_png_inputs(hr_dir);
    if (opts.count && *opts.count < inputs.size()) inputs.resize(*opts.count);
    if (inputs.empty()) throw IoError(hr_dir.string(), "no PNG inputs found");
    fs::create_directories(out_dir);

    struct Slot {
        std::optional<SampleRecord> record;
        std::optional<GenerationError> error;
    };
    std::vector<Slot> slots(inputs.size());

    std::map<std::string, std::size_t> first_by_id;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const std::string id = inputs[i].stem().string();
        if (!first_by_id.emplace(id, i).second)
            slots[i].error = GenerationError{inputs[i].string(), "duplicate sample id '" + id + "'"};
    }

    parallel_for(inputs.size(), resolve_threads(opts.threads), [&](std::size_t i) {
        if (slots[i].error) return;
        const std::string id = inputs[i].stem().string();
        try {
            const ImageTensor hr = quantize8(read_png(inputs[i]));
            SampleArtifacts art = render_sample(hr, config, i, opts.write_preclamp, opts.synth_masks);
            if (opts.parsed_dir) {
                const fs::path src = *opts.parsed_dir / (id + ".png");
                if (fs::exists(src)) {
                    const ParsedMap map = decode_parsed_png(read_file(src), src.string());
                    if (map.height() != hr.height() || map.width() != hr.width())
                        throw IoError(src.string(), "parsing map size does not match HR image");
                    art.files["parsed_hr"] = encode_parsed_png(map);
                }
            }
            SampleRecord rec;
            rec.id = id;
            rec.index = i;
            rec.params = art.sample.params;
            rec.hr_shape = {hr.height(), hr.width(), hr.channels()};
            rec.lr_shape = {art.sample.lr.height(), art.sample.lr.width(), art.sample.lr.channels()};
            for (const auto& [kind, bytes] : art.files) {
                rec.paths[kind] = artifact_path(kind, id);
                rec.sha256[kind] = sha256_hex(bytes);
                write_file(out_dir / rec.paths[kind], bytes);
            }
            slots[i].record = std::move(rec);
        } catch (const std::exception& e) {
            slots[i].error = GenerationError{inputs[i].string(), e.what()};
        }
    });

    Manifest m;
    m.generated_at = utc_timestamp();
    m.config = config;
    m.ratios = opts.ratios;
    m.parsed_source = opts.synth_masks ? "synthetic" : opts.parsed_dir ? "directory" : "none";
    m.root = out_dir;
    for (auto& s : slots) {
        if (s.record) m.records.push_back(std::move(*s.record));
        if (s.error) m.errors.push_back(std::move(*s.error));
    }
    if (m.records.empty()) throw IoError(hr_dir.string(), "no input could be processed");

    std::vector<std::string> ids;
    for (const auto& r : m.records) ids.push_back(r.id);
    const auto splits = assign_splits(ids, m.ratios, config.master_seed);
    for (std::size_t i = 0; i < m.records.size(); ++i) m.records[i].split = splits[i];

    write_manifest(m);
    return m;
}

// ---------------------------------------------------------------------------
// Loading and verification

struct LoadedSample {
    ImageTensor lrhr; // I
    ImageTensor lr;   // J
    ImageTensor hr;   // H
    PhysicalParams phys;
    RainParams params;
    std::optional<ParsedMap> parsed;
    std::optional<ImageTensor> lrhr_preclamp;
};

inline Bytes read_checked(const Manifest& m, const SampleRecord& r, const std::string& kind) {
    const fs::path path = m.path_of(r, kind);
    if (!fs::exists(path)) throw IoError(path.string(), "missing sample file");
    Bytes data = read_file(path);
    if (auto it = r.sha256.find(kind); it != r.sha256.end() && sha256_hex(data) != it->second)
        throw CorruptionError(path.string() + ": checksum mismatch");
    return data;
}

/// Decodes a stored sample. (S, T, A) are rebuilt from the recorded float
/// parameters, not from the quantized rain PNG.
inline LoadedSample load_sample(const Manifest& m, const std::string& id) {
    const SampleRecord& r = m.at(id);
    LoadedSample out;
    out.hr = decode_png(read_checked(m, r, "hr"), m.path_of(r, "hr").string());
    out.lr = decode_png(read_checked(m, r, "lr"), m.path_of(r, "lr").string());
    out.lrhr = decode_png(read_checked(m, r, "lrhr"), m.path_of(r, "lrhr").string());
    if (r.has("parsed_hr"))
        out.parsed = decode_parsed_png(read_checked(m, r, "parsed_hr"), m.path_of(r, "parsed_hr").string());
    if (r.has("preclamp_lrhr"))
        out.lrhr_preclamp = decode_raw_f32(read_checked(m, r, "preclamp_lrhr"), m.path_of(r, "preclamp_lrhr").string());
    out.params = r.params;
    out.phys = physical_from_params(r.params, m.config.num_streak_layers_m, out.lr.height(), out.lr.width(),
                                    out.lr.channels());
    return out;
}

/// Re-runs the degradation from the stored HR image; yields the exact
/// in-memory tensors of the original generation run.
inline DegradedSample replay_sample(const Manifest& m, const std::string& id) {
    const SampleRecord& r = m.at(id);
    const ImageTensor hr = decode_png(read_checked(m, r, "hr"), m.path_of(r, "hr").string());
    return degrade_full(hr, m.config, r.index);
}

struct VerifyEntry {
    std::string id;
    bool ok = true;
    std::string message;
};

struct VerifyReport {
    std::vector<VerifyEntry> entries;

    std::size_t failures() const {
        return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return !e.ok; }));
    }
    bool all_ok() const { return failures() == 0; }
};

/// Regenerates every record from its seed and compares the result byte-wise
/// with the stored files.
inline VerifyReport verify_manifest(const Manifest& m, int threads = 1) {
    VerifyReport report;
    report.entries.resize(m.records.size());
    parallel_for(m.records.size(), resolve_threads(threads), [&](std::size_t i) {
        const SampleRecord& r = m.records[i];
        VerifyEntry& e = report.entries[i];
        e.id = r.id;
        auto fail = [&](const std::string& msg) {
            e.ok = false;
            e.message = msg;
        };
        try {
            const fs::path hr_path = m.path_of(r, "hr");
            const ImageTensor hr = decode_png(read_file(hr_path), hr_path.string());
            const SampleArtifacts art = render_sample(hr, m.config, r.index, r.has("preclamp_lrhr"),
                                                      m.parsed_source == "synthetic" && r.has("parsed_hr"));
            if (art.sample.params != r.params) return fail("recorded parameters do not match the seed");
            for (const auto& [kind, rel] : r.paths) {
                const Bytes stored = read_file(m.root / rel);
                if (auto it = r.sha256.find(kind); it != r.sha256.end() && sha256_hex(stored) != it->second)
                    return fail(kind + ": checksum mismatch");
                if (auto it = art.files.find(kind); it != art.files.end() && it->second != stored)
                    return fail(kind + ": regenerated bytes differ");
            }
        } catch (const std::exception& ex) {
            fail(ex.what());
        }
    });
    return report;
}

} // namespace rainsynth
