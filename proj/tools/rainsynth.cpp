// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace rainsynth::cli;

    CLI::App app{"Heavy-rain low-resolution face image synthesis toolkit"};
    app.require_subcommand(1);

    SynthArgs synth;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    auto* sub_synth = app.add_subcommand("synth", "Generate a synthetic corpus from a directory of HR PNGs");
    sub_synth->add_option("config_file", synth.config_file, "Run configuration (JSON)")->required();
    sub_synth->add_option("hr_dir", synth.hr_dir, "Directory of clean HR PNG images")->required();
    sub_synth->add_option("out_dir", synth.out_dir, "Output directory")->required();
    auto* opt_count = sub_synth->add_option("--count", count, "Use only the first N inputs (lexicographic)");
    auto* opt_seed = sub_synth->add_option("--seed", seed, "Override degradation.master_seed");

    std::string manifest, id, out_path;
    auto* sub_invert = app.add_subcommand("invert", "Recover J from a sample's pre-clamp dump");
    sub_invert->add_option("manifest", manifest, "manifest.json or its directory")->required();
    sub_invert->add_option("id", id, "Sample id")->required();
    sub_invert->add_option("out_path", out_path, "Output (.png, or .f32 for a raw float dump)")->required();

    std::string ref_dir, test_dir, metric_name = "both";
    auto* sub_score = app.add_subcommand("score", "PSNR/SSIM between same-named PNGs of two directories");
    sub_score->add_option("ref_dir", ref_dir)->required();
    sub_score->add_option("test_dir", test_dir)->required();
    sub_score->add_option("--metric", metric_name, "psnr, ssim or both")
        ->check(CLI::IsMember({"psnr", "ssim", "both"}));

    std::string montage;
    auto* sub_inspect = app.add_subcommand("inspect", "Print a sample's parameters and files");
    sub_inspect->add_option("manifest", manifest)->required();
    sub_inspect->add_option("id", id)->required();
    auto* opt_montage = sub_inspect->add_option("--montage", montage, "Write a seven-panel montage PNG");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kDataError;
    }

    if (sub_synth->parsed()) {
        if (*opt_count) synth.count = count;
        if (*opt_seed) synth.seed = seed;
        return cmd_synth(synth, std::cout, std::cerr);
    }
    if (sub_invert->parsed()) return cmd_invert(manifest, id, out_path, std::cout, std::cerr);
    if (sub_score->parsed()) {
        const Metric metric = metric_name == "psnr" ? Metric::psnr : metric_name == "ssim" ? Metric::ssim : Metric::both;
        return cmd_score(ref_dir, test_dir, metric, std::cout, std::cerr);
    }
    if (sub_inspect->parsed()) {
        std::optional<std::string> m;
        if (*opt_montage) m = montage;
        return cmd_inspect(manifest, id, m, std::cout, std::cerr);
    }
    return kDataError;
}
