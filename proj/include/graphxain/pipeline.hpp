#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "graphxain/chat_client.hpp"
#include "graphxain/explainer.hpp"
#include "graphxain/gcn.hpp"

namespace graphxain {

// One committable JSON config drives every subcommand; CLI flags win over
// config values. Artifacts land under out_dir:
//   checkpoint.json, report.json, id_map.json,
//   explain/<id>.json, explain/<id>.view.json,
//   narrate/<id>.json (or .txt), render/<id>.dot, render/<id>.importance.json
struct RunConfig {
    std::filesystem::path nodes_csv;
    std::filesystem::path edges_csv;
    std::filesystem::path checkpoint; // defaults to out_dir/checkpoint.json
    std::filesystem::path out_dir = "out";
    std::string dataset_description;
    TrainConfig train;
    ExplainerConfig explainer;
    ProviderConfig provider;
    std::size_t k = 7;
    std::size_t m = 7;
    bool expand_connected = false;
    std::uint64_t seed = 42; // master seed: split + sampling; default for train/explainer
    NodeAggregation aggregation = NodeAggregation::sum;
    std::size_t parallelism = 1;
    std::string output_format = "json"; // narrate artifact: "json" | "text"

    std::filesystem::path checkpoint_path() const {
        return checkpoint.empty() ? out_dir / "checkpoint.json" : checkpoint;
    }
};

RunConfig load_run_config(const std::filesystem::path& path);

// External ids are file-name sanitized: anything outside [A-Za-z0-9._-] -> '_'.
std::string sanitize_id(const std::string& id);

void cmd_train(const RunConfig& cfg, std::ostream& out);

// Explicit ids, or a seeded sample of `sample_count` nodes when ids is empty.
void cmd_explain(const RunConfig& cfg, const std::vector<std::string>& ids,
                 std::size_t sample_count, std::ostream& out);

// Reads explain/<id>.view.json when present, otherwise explains inline.
// describe = true emits the deterministic description instead of calling the
// narrative provider.
void cmd_narrate(const RunConfig& cfg, const std::string& id, bool describe, std::ostream& out);

void cmd_render(const RunConfig& cfg, const std::filesystem::path& view_file, std::ostream& out);

// Runs fn, mapping thrown errors to the documented exit codes.
int run_guarded(const std::function<void()>& fn, std::ostream& err);

} // namespace graphxain
