#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graphxain/pipeline.hpp"

using namespace graphxain;

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k;
    std::optional<std::size_t> m;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    bool mock = false;
    bool expand_connected = false;
};

// Flags win over config values; --seed also pins the train/explainer seeds.
RunConfig resolve_config(const CliOptions& opt) {
    RunConfig cfg;
    if (!opt.config_path.empty()) cfg = load_run_config(opt.config_path);
    if (opt.seed) {
        cfg.seed = *opt.seed;
        cfg.train.seed = *opt.seed;
        cfg.explainer.seed = *opt.seed;
    }
    if (opt.k) cfg.k = *opt.k;
    if (opt.m) cfg.m = *opt.m;
    if (opt.out_dir) cfg.out_dir = *opt.out_dir;
    if (opt.format) cfg.output_format = *opt.format;
    if (opt.mock) cfg.provider.mock = true;
    if (opt.expand_connected) cfg.expand_connected = true;
    return cfg;
}

void add_common(CLI::App* cmd, CliOptions& opt, bool config_required = true) {
    auto* c = cmd->add_option("--config", opt.config_path, "Run configuration JSON");
    if (config_required) c->required();
    cmd->add_option("--seed", opt.seed, "Master seed (overrides config)");
    cmd->add_option("--k", opt.k, "Subgraph truncation size");
    cmd->add_option("--m", opt.m, "Feature truncation size");
    cmd->add_option("--out", opt.out_dir, "Output directory");
    cmd->add_flag("--mock", opt.mock, "Use the offline mock provider");
    cmd->add_flag("--expand-connected", opt.expand_connected,
                  "Grow the view until it is connected");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"graphxain: train a GCN, explain node predictions, narrate the explanations"};
    app.require_subcommand(1);

    CliOptions opt;
    std::vector<std::string> node_ids;
    std::size_t sample_count = 0;
    std::string node_id;
    std::string view_file;

    auto* train_cmd = app.add_subcommand("train", "Train the classifier and save a checkpoint");
    add_common(train_cmd, opt);

    auto* explain_cmd = app.add_subcommand("explain", "Explain predictions for chosen nodes");
    add_common(explain_cmd, opt);
    explain_cmd->add_option("--node", node_ids, "External node id (repeatable)");
    explain_cmd->add_option("--sample", sample_count, "Explain a seeded sample of N nodes");

    auto* narrate_cmd = app.add_subcommand("narrate", "Generate a narrative for one node");
    add_common(narrate_cmd, opt);
    narrate_cmd->add_option("--node", node_id, "External node id")->required();
    narrate_cmd->add_option("--format", opt.format, "Artifact format: json|text");
    bool describe_flag = false;
    narrate_cmd->add_flag("--describe", describe_flag, "Emit the plain description instead");

    auto* describe_cmd = app.add_subcommand("describe", "Generate the plain description");
    add_common(describe_cmd, opt);
    describe_cmd->add_option("--node", node_id, "External node id")->required();
    describe_cmd->add_option("--format", opt.format, "Artifact format: json|text");

    auto* render_cmd = app.add_subcommand("render", "Render a view file to DOT + importances");
    add_common(render_cmd, opt, /*config_required=*/false);
    render_cmd->add_option("--view", view_file, "ExplanationView JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    return run_guarded(
        [&] {
            RunConfig cfg = resolve_config(opt);
            if (train_cmd->parsed()) {
                cmd_train(cfg, std::cout);
            } else if (explain_cmd->parsed()) {
                cmd_explain(cfg, node_ids, sample_count, std::cout);
            } else if (narrate_cmd->parsed()) {
                cmd_narrate(cfg, node_id, describe_flag, std::cout);
            } else if (describe_cmd->parsed()) {
                cmd_narrate(cfg, node_id, /*describe=*/true, std::cout);
            } else if (render_cmd->parsed()) {
                cmd_render(cfg, view_file, std::cout);
            }
        },
        std::cerr);
}
