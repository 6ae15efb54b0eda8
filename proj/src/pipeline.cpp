#include "graphxain/pipeline.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "graphxain/errors.hpp"
#include "graphxain/narrative.hpp"
#include "graphxain/render.hpp"
#include "graphxain/rng.hpp"

namespace graphxain {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << content;
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

void maybe_path(const nlohmann::json& j, const char* key, std::filesystem::path& into) {
    if (j.contains(key)) into = j.at(key).get<std::string>();
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config " + path.string() + ": " + e.what());
    }
    RunConfig cfg;
    maybe_path(j, "nodes_csv", cfg.nodes_csv);
    maybe_path(j, "edges_csv", cfg.edges_csv);
    maybe_path(j, "checkpoint", cfg.checkpoint);
    maybe_path(j, "out_dir", cfg.out_dir);
    maybe(j, "dataset_description", cfg.dataset_description);
    maybe(j, "seed", cfg.seed);
    maybe(j, "k", cfg.k);
    maybe(j, "m", cfg.m);
    maybe(j, "expand_connected", cfg.expand_connected);
    maybe(j, "parallelism", cfg.parallelism);
    maybe(j, "output_format", cfg.output_format);
    if (j.contains("importance_aggregation")) {
        const std::string agg = j.at("importance_aggregation").get<std::string>();
        if (agg == "sum") cfg.aggregation = NodeAggregation::sum;
        else if (agg == "max") cfg.aggregation = NodeAggregation::max;
        else throw ValidationError("importance_aggregation must be 'sum' or 'max'");
    }

    cfg.train.seed = cfg.seed;
    cfg.explainer.seed = cfg.seed;
    if (j.contains("train")) {
        const auto& t = j.at("train");
        maybe(t, "learning_rate", cfg.train.learning_rate);
        maybe(t, "weight_decay", cfg.train.weight_decay);
        maybe(t, "epochs", cfg.train.epochs);
        maybe(t, "hidden", cfg.train.hidden);
        maybe(t, "seed", cfg.train.seed);
        maybe(t, "init_scale", cfg.train.init_scale);
        maybe(t, "standardize_features", cfg.train.standardize_features);
    }
    if (j.contains("explainer")) {
        const auto& e = j.at("explainer");
        maybe(e, "epochs", cfg.explainer.epochs);
        maybe(e, "learning_rate", cfg.explainer.learning_rate);
        maybe(e, "size_weight_edge", cfg.explainer.size_weight_edge);
        maybe(e, "entropy_weight_edge", cfg.explainer.entropy_weight_edge);
        maybe(e, "size_weight_feature", cfg.explainer.size_weight_feature);
        maybe(e, "entropy_weight_feature", cfg.explainer.entropy_weight_feature);
        maybe(e, "seed", cfg.explainer.seed);
    }
    if (j.contains("provider")) {
        const auto& p = j.at("provider");
        maybe(p, "endpoint_url", cfg.provider.endpoint_url);
        maybe(p, "model_name", cfg.provider.model_name);
        maybe(p, "api_key_env", cfg.provider.api_key_env);
        maybe(p, "temperature", cfg.provider.temperature);
        maybe(p, "timeout_seconds", cfg.provider.timeout_seconds);
        maybe(p, "max_retries", cfg.provider.max_retries);
        maybe(p, "backoff_base_seconds", cfg.provider.backoff_base_seconds);
        maybe(p, "max_in_flight", cfg.provider.max_in_flight);
        maybe(p, "mock", cfg.provider.mock);
    }
    if (cfg.k < 1 || cfg.m < 1) throw ValidationError("k and m must be >= 1");
    if (cfg.parallelism < 1) throw ValidationError("parallelism must be >= 1");
    return cfg;
}

std::string sanitize_id(const std::string& id) {
    std::string out = id;
    for (char& c : out) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' ||
                        c == '-';
        if (!ok) c = '_';
    }
    return out;
}

namespace {

Graph load_graph(const RunConfig& cfg) {
    if (cfg.nodes_csv.empty() || cfg.edges_csv.empty()) {
        throw ValidationError("config must set nodes_csv and edges_csv");
    }
    return ingest(cfg.nodes_csv, cfg.edges_csv);
}

GcnModel load_model_for(const RunConfig& cfg, const Graph& g) {
    GcnModel model = load_checkpoint(cfg.checkpoint_path());
    if (model.num_features != g.num_features) {
        throw ValidationError("checkpoint expects " + std::to_string(model.num_features) +
                              " features but the graph has " + std::to_string(g.num_features));
    }
    return model;
}

struct Explained {
    Explanation explanation;
    ExplanationView view;
};

Explained explain_one(const RunConfig& cfg, const GcnModel& model, const Graph& g,
                      const NormalizedAdjacency& adj, std::uint32_t target) {
    Explained out{explain(model, g, adj, target, cfg.explainer), {}};
    const std::size_t comp = out.explanation.computation_nodes.size();
    const std::size_t k = std::min(cfg.k, comp);
    if (cfg.expand_connected) {
        out.view = expand_to_connected(out.explanation, k, comp, cfg.m, cfg.aggregation);
    } else {
        out.view = truncate(out.explanation, k, cfg.m, cfg.aggregation);
    }
    return out;
}

std::vector<std::string> labels_for(const Graph& g, const ExplanationView& view) {
    std::vector<std::string> labels;
    labels.reserve(view.nodes.size());
    for (std::uint32_t n : view.nodes) labels.push_back(g.node_ids.at(n));
    return labels;
}

} // namespace

void cmd_train(const RunConfig& cfg, std::ostream& out) {
    Graph g = load_graph(cfg);
    SplitMasks masks = split(g, cfg.seed);
    auto [model, report] = train(g, masks, cfg.train);

    save_checkpoint(model, report, cfg.checkpoint_path());
    nlohmann::ordered_json rj;
    rj["seed"] = cfg.seed;
    rj["train_loss"] = report.train_loss;
    rj["val_loss"] = report.val_loss;
    rj["val_auc"] = report.val_auc; // NaN entries serialize as null
    rj["test_auc"] = report.test_auc;
    rj["wall_seconds"] = report.wall_seconds;
    write_file(cfg.out_dir / "report.json", rj.dump(2) + "\n");
    write_file(cfg.out_dir / "id_map.json", id_map_json(g));

    char auc_buf[32];
    std::snprintf(auc_buf, sizeof(auc_buf), "%.4f", report.test_auc);
    out << "trained " << report.train_loss.size() << " epochs on " << g.num_nodes
        << " nodes; final test AUC: " << auc_buf << "\n";
    out << "checkpoint: " << cfg.checkpoint_path().string() << "\n";
}

void cmd_explain(const RunConfig& cfg, const std::vector<std::string>& ids,
                 std::size_t sample_count, std::ostream& out) {
    Graph g = load_graph(cfg);
    GcnModel model = load_model_for(cfg, g);
    NormalizedAdjacency adj = normalize(g);

    std::vector<std::uint32_t> targets;
    if (!ids.empty()) {
        for (const auto& id : ids) targets.push_back(g.index_of(id));
    } else {
        if (sample_count == 0) throw ValidationError("pass --node ids or --sample N");
        if (sample_count > g.num_nodes) {
            throw ValidationError("sample larger than the graph");
        }
        std::vector<std::uint32_t> all(g.num_nodes);
        for (std::uint32_t i = 0; i < g.num_nodes; ++i) all[i] = i;
        Rng rng(cfg.seed);
        targets = rng.sample(std::move(all), sample_count);
    }

    std::vector<std::string> lines(targets.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= targets.size()) return;
            const std::uint32_t t = targets[i];
            Explained exp = explain_one(cfg, model, g, adj, t);
            const std::string file_id = sanitize_id(g.node_ids[t]);
            write_file(cfg.out_dir / "explain" / (file_id + ".json"),
                       explanation_to_json(exp.explanation));
            write_file(cfg.out_dir / "explain" / (file_id + ".view.json"),
                       view_to_json(exp.view, labels_for(g, exp.view)));
            std::ostringstream line;
            line << "node " << g.node_ids[t] << ": prediction=" << format_value(exp.explanation.prediction)
                 << " label=" << exp.explanation.predicted_label << " k_used=" << exp.view.k_used
                 << " connected=" << (exp.view.connected ? "true" : "false");
            lines[i] = line.str();
        }
    };
    const std::size_t n_threads = std::min(cfg.parallelism, targets.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& line : lines) out << line << "\n";
}

void cmd_narrate(const RunConfig& cfg, const std::string& id, bool describe, std::ostream& out) {
    Graph g = load_graph(cfg);
    const std::uint32_t target = g.index_of(id);
    const std::string file_id = sanitize_id(id);

    ExplanationView view;
    const auto view_path = cfg.out_dir / "explain" / (file_id + ".view.json");
    if (std::filesystem::exists(view_path)) {
        view = view_from_json(read_file(view_path)).view;
    } else {
        GcnModel model = load_model_for(cfg, g);
        NormalizedAdjacency adj = normalize(g);
        view = explain_one(cfg, model, g, adj, target).view;
    }

    PromptBundle bundle = make_bundle(g, view, cfg.dataset_description);
    NarrativeResult result;
    nlohmann::ordered_json artifact;
    if (describe) {
        result = generate_description(view, view.prediction, bundle.target_id,
                                      bundle.target_features, labels_for(g, view));
        artifact = nlohmann::ordered_json::parse(narrative_result_to_json(result));
    } else {
        const std::string prompt = build_prompt(bundle);
        result = generate_narrative(prompt, cfg.provider);
        StructureReport report = validate_narrative_structure(result.text, prompt, bundle);
        artifact = nlohmann::ordered_json::parse(narrative_result_to_json(result));
        artifact["structure_report"] =
            nlohmann::ordered_json::parse(structure_report_to_json(report));
        out << "structure: paragraphs=" << report.paragraph_count
            << " target=" << (report.mentions_target ? "yes" : "no")
            << " feature=" << (report.mentions_feature ? "yes" : "no")
            << " neighbor=" << (report.mentions_neighbor ? "yes" : "no")
            << " numbers_ok=" << (report.hallucination_free ? "yes" : "no") << "\n";
    }

    if (cfg.output_format == "text") {
        write_file(cfg.out_dir / "narrate" / (file_id + ".txt"), result.text);
    } else {
        write_file(cfg.out_dir / "narrate" / (file_id + ".json"), artifact.dump(2) + "\n");
    }
    out << result.text;
    if (!result.text.empty() && result.text.back() != '\n') out << "\n";
}

void cmd_render(const RunConfig& cfg, const std::filesystem::path& view_file, std::ostream& out) {
    LoadedView loaded = view_from_json(read_file(view_file));

    std::string stem = view_file.stem().string(); // "<id>.view" or "<id>"
    if (stem.size() > 5 && stem.ends_with(".view")) stem = stem.substr(0, stem.size() - 5);
    const auto dot_path = cfg.out_dir / "render" / (stem + ".dot");
    const auto imp_path = cfg.out_dir / "render" / (stem + ".importance.json");
    write_file(dot_path, to_dot(loaded.view, loaded.node_labels));
    write_file(imp_path, importance_json(loaded.view));
    out << "wrote " << dot_path.string() << "\n";
    out << "wrote " << imp_path.string() << "\n";
}

int run_guarded(const std::function<void()>& fn, std::ostream& err) {
    try {
        fn();
        return exit_code::ok;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace graphxain
