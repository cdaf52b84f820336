#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "lrst/experiment.hpp"

namespace {

lrst::ExperimentSpec load_spec(const std::string& path, std::uint64_t seed_override,
                               bool have_seed, const std::string& out_override) {
    lrst::ExperimentSpec spec = lrst::ExperimentSpec::parse_file(path);
    if (have_seed) spec.seeds = {seed_override};
    if (!out_override.empty()) spec.out_dir = out_override;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-Tucker-rank + sparse tensor estimation"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string out_override;
    std::string instance_path;
    std::uint64_t seed_override = 0;
    bool have_seed = false;
    bool force = false;
    int threads = 1;

    auto add_common = [&](CLI::App* cmd, bool needs_instance) {
        cmd->add_option("--spec", spec_path, "experiment spec file")->required();
        cmd->add_option("--out", out_override, "output directory (overrides the spec's out key)");
        cmd->add_option("--seed", seed_override, "replace the spec's seed list by this one seed")
            ->each([&](const std::string&) { have_seed = true; });
        cmd->add_flag("--force", force, "overwrite a non-empty output directory");
        cmd->add_option("--threads", threads, "worker threads for independent runs");
        if (needs_instance) {
            cmd->add_option("--instance", instance_path,
                            "instance directory (or observation.lrst file for fit)")
                ->required();
        }
    };

    CLI::App* synth = app.add_subcommand("synth", "generate synthetic instances");
    add_common(synth, false);
    CLI::App* fit = app.add_subcommand("fit", "run a solver on an instance");
    add_common(fit, true);
    CLI::App* bic = app.add_subcommand("bic", "rank/sparsity scan by the BIC criterion");
    add_common(bic, true);
    CLI::App* compare = app.add_subcommand("compare", "rgrad vs pgd error and step-time traces");
    add_common(compare, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return lrst::kExitUsage;
    }

    try {
        const lrst::ExperimentSpec spec =
            load_spec(spec_path, seed_override, have_seed, out_override);
        if (spec.out_dir.empty()) {
            std::fprintf(stderr, "error: no output directory (spec key 'out' or --out)\n");
            return lrst::kExitUsage;
        }
        const std::filesystem::path out = spec.out_dir;
        if (app.got_subcommand(synth)) return lrst::cmd_synth(spec, out, force);
        if (app.got_subcommand(fit)) return lrst::cmd_fit(spec, instance_path, out, force);
        if (app.got_subcommand(bic)) return lrst::cmd_bic(spec, instance_path, out, force, threads);
        if (app.got_subcommand(compare)) return lrst::cmd_compare(spec, out, force);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return lrst::kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return lrst::kExitNumerical;
    }
    return lrst::kExitUsage;
}
