#include <algorithm>
#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rangeface/commands.hpp"
#include "rangeface/run_config.hpp"

namespace {

std::string flag_for_key(const std::string& key) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '.', '-');
    return flag;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Range-image face recognition pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 1;
    int jobs = 1;
    bool verbose = false;
    app.add_option("--config", config_path, "config file of key = value lines");
    auto* seed_opt = app.add_option("--seed", seed, "seed for data generation");
    auto* jobs_opt = app.add_option("--jobs", jobs, "parallel worker count");
    app.add_flag("--verbose", verbose, "chattier logs");

    // every dotted config key doubles as a global flag: detector.w -> --detector-w
    auto knob_values = std::make_shared<std::map<std::string, std::string>>();
    for (const std::string& key : rangeface::RunConfig::known_keys()) {
        if (key.rfind("run.", 0) == 0) continue;  // --seed/--jobs/--verbose cover these
        app.add_option_function<std::string>(
            flag_for_key(key),
            [key, knob_values](const std::string& v) { (*knob_values)[key] = v; },
            "set " + key);
    }

    std::string synth_out;
    int synth_subjects = 10;
    int synth_scans = 4;
    double synth_jitter = 10.0;
    double synth_noise = 0.5;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scan corpus");
    synth->fallthrough();
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--subjects", synth_subjects, "number of subjects");
    synth->add_option("--scans", synth_scans, "scans per subject (1..16)");
    synth->add_option("--pose-jitter", synth_jitter, "per-axis pose jitter, degrees");
    synth->add_option("--noise-sigma", synth_noise, "depth noise sigma");

    std::string pre_manifest, pre_out;
    CLI::App* pre = app.add_subcommand("preprocess", "register scans and build range images");
    pre->fallthrough();
    pre->add_option("--manifest", pre_manifest, "dataset manifest")->required();
    pre->add_option("--out", pre_out, "output directory")->required();

    std::string desc_in, desc_out;
    CLI::App* desc = app.add_subcommand("describe", "detect points and build descriptors");
    desc->fallthrough();
    desc->add_option("--in", desc_in, "range image directory")->required();
    desc->add_option("--out", desc_out, "output directory")->required();

    std::string match_probe, match_gallery;
    CLI::App* match = app.add_subcommand("match", "print the match count of two descriptor files");
    match->fallthrough();
    match->add_option("probe", match_probe, "probe descriptor file")->required();
    match->add_option("gallery", match_gallery, "gallery descriptor file")->required();

    std::string eval_desc, eval_manifest, eval_report;
    std::vector<std::string> eval_protocols;
    CLI::App* eval = app.add_subcommand("evaluate", "score recognition protocols");
    eval->fallthrough();
    eval->add_option("--descriptors", eval_desc, "descriptor directory")->required();
    eval->add_option("--manifest", eval_manifest, "dataset manifest")->required();
    eval->add_option("--protocol", eval_protocols, "protocol name (repeatable)")->required();
    eval->add_option("--report-dir", eval_report, "where report.txt/json go (default: descriptor dir)");

    CLI11_PARSE(app, argc, argv);

    try {
        rangeface::RunConfig cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const auto& [key, value] : *knob_values) cfg.set(key, value);
        if (seed_opt->count() > 0) cfg.seed = seed;
        if (jobs_opt->count() > 0) cfg.jobs = jobs;
        if (verbose) cfg.verbose = true;
        cfg.validate();

        if (synth->parsed())
            return rangeface::cmd_synth(synth_out, synth_subjects, synth_scans, synth_jitter,
                                        synth_noise, cfg, std::cout);
        if (pre->parsed())
            return rangeface::cmd_preprocess(pre_manifest, pre_out, cfg, std::cout);
        if (desc->parsed()) return rangeface::cmd_describe(desc_in, desc_out, cfg, std::cout);
        if (match->parsed())
            return rangeface::cmd_match(match_probe, match_gallery, cfg, std::cout);
        if (eval->parsed())
            return rangeface::cmd_evaluate(eval_desc, eval_manifest, eval_protocols,
                                           eval_report.empty() ? eval_desc : eval_report, cfg,
                                           std::cout);
        return 1;  // unreachable with require_subcommand(1)
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
