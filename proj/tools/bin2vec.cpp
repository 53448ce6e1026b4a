#include "bin2vec/corpus.hpp"
#include "bin2vec/dataset.hpp"
#include "bin2vec/error.hpp"
#include "bin2vec/features.hpp"
#include "bin2vec/gcn/checkpoint.hpp"
#include "bin2vec/graph_builder.hpp"
#include "bin2vec/interchange.hpp"
#include "bin2vec/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace bin2vec;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kParseError = 2, kUnsupportedArch = 3 };

bool json_logs = false;

void log_line(const std::string& event, const std::string& message) {
    if (json_logs) {
        nlohmann::ordered_json j;
        j["event"] = event;
        j["message"] = message;
        std::cerr << j.dump() << "\n";
    } else {
        std::cerr << event << ": " << message << "\n";
    }
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path cache_dir() {
    const char* env = std::getenv("BIN2VEC_CACHE");
    return env ? fs::path(env) : fs::path();
}

std::size_t default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<std::size_t> parse_layers(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, ',')) {
        std::size_t pos = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(part, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != part.size() || v == 0) throw Error("bad layer size '" + part + "' in --layers " + s);
        out.push_back(v);
    }
    if (out.empty()) throw Error("--layers needs at least one size");
    return out;
}

/// Training flags; each one overrides the config file only when given.
struct TrainFlags {
    std::string config_file;
    std::string layers;
    std::size_t mlp_hidden = 0;
    std::string norm;
    std::string optimizer;
    double lr = 0;
    std::size_t batch_size = 0;
    std::size_t max_epochs = 0;
    std::size_t patience = 0;
    std::size_t min_count = 0;
    std::size_t runs = 0;
    std::uint64_t seed = 0;
    std::string precision;
    bool no_baseline = false;
    std::vector<CLI::Option*> opts;

    void add(CLI::App* app) {
        opts.push_back(app->add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile));
        opts.push_back(app->add_option("--layers", layers, "comma-separated GCN layer sizes"));
        opts.push_back(app->add_option("--mlp-hidden", mlp_hidden, "hidden width of the classifier head"));
        opts.push_back(app->add_option("--norm", norm, "adjacency normalization")->check(CLI::IsMember({"symmetric", "row"})));
        opts.push_back(app->add_option("--optimizer", optimizer)->check(CLI::IsMember({"adam", "sgd"})));
        opts.push_back(app->add_option("--lr", lr, "learning rate"));
        opts.push_back(app->add_option("--batch-size", batch_size));
        opts.push_back(app->add_option("--max-epochs", max_epochs));
        opts.push_back(app->add_option("--patience", patience));
        opts.push_back(app->add_option("--min-count", min_count, "node-label frequency threshold"));
        opts.push_back(app->add_option("--runs", runs, "number of seeds"));
        opts.push_back(app->add_option("--seed", seed));
        opts.push_back(app->add_option("--precision", precision)->check(CLI::IsMember({"float", "double"})));
        opts.push_back(app->add_flag("--no-baseline", no_baseline, "skip the bag-of-words baseline"));
    }

    bool given(const char* name) const {
        for (auto* o : opts) {
            if (o->check_lname(std::string(name).substr(2)) && o->count() > 0) return true;
        }
        return false;
    }

    TrainConfig resolve() const {
        TrainConfig c;
        if (!config_file.empty()) c = TrainConfig::from_json(nlohmann::json::parse(read_file(config_file)));
        if (given("--layers")) c.layers = parse_layers(layers);
        if (given("--mlp-hidden")) c.mlp_hidden = mlp_hidden;
        if (given("--norm")) c.mode = gcn::parse_norm_mode(norm);
        if (given("--optimizer")) c.optimizer.kind = gcn::parse_optimizer(optimizer);
        if (given("--lr")) c.optimizer.learning_rate = lr;
        if (given("--batch-size")) c.batch_size = batch_size;
        if (given("--max-epochs")) c.max_epochs = max_epochs;
        if (given("--patience")) c.patience = patience;
        if (given("--min-count")) c.min_count = min_count;
        if (given("--runs")) c.runs = runs;
        if (given("--seed")) c.seed = seed;
        if (given("--precision")) c.single_precision = precision == "float";
        if (no_baseline) c.baseline = false;
        if (c.batch_size == 0 || c.runs == 0 || c.max_epochs == 0) throw Error("batch size, runs and epochs must be positive");
        return c;
    }
};

struct DataFlags {
    std::string manifest;
    std::size_t jobs = default_jobs();

    void add(CLI::App* app) {
        app->add_option("--manifest", manifest, "CSV manifest (path,label,group,flag)")->required()->check(CLI::ExistingFile);
        app->add_option("--jobs,-j", jobs, "parallel lifting workers");
    }

    std::pair<Manifest, std::vector<LoadedProgram>> load() const {
        auto m = read_manifest(manifest);
        log_line("load", std::to_string(m.entries.size()) + " programs from " + manifest);
        auto programs = load_programs(m, jobs, cache_dir());
        std::size_t nodes = 0;
        for (const auto& p : programs) nodes += p.graph.node_count();
        log_line("load", "mean graph size " + std::to_string(programs.empty() ? 0 : nodes / programs.size()) + " nodes");
        return {std::move(m), std::move(programs)};
    }
};

void write_config(const fs::path& dir, const TrainConfig& cfg, const std::string& manifest) {
    auto j = cfg.to_json();
    j["manifest"] = fs::absolute(manifest).string();
    write_file(dir / "config.json", j.dump(2) + "\n");
}

int cmd_lift(const std::string& input, std::string output, const std::string& label, const std::string& unresolved) {
    ProgramDump d;
    d.binary_id = fs::path(input).filename().string();
    if (!label.empty()) d.label = label;
    d.cfg = build_cfg(load_elf_file(input));
    if (output.empty()) output = input + dump_extension;
    write_file(output, write_dump({d}));
    if (!unresolved.empty()) write_file(unresolved, unresolved_report(d.cfg));
    log_line("lift", d.binary_id + ": " + std::to_string(d.cfg.blocks.size()) + " blocks, " +
                         std::to_string(d.cfg.unresolved.size()) + " unresolved");
    return kOk;
}

int cmd_graph(const std::string& input, const std::string& format, const std::string& output) {
    auto g = build_program_graph(fs::path(input));
    std::string text = format == "dot" ? graph_to_dot(g, fs::path(input).filename().string()) : graph_to_json(g);
    if (output.empty() || output == "-") {
        std::cout << text;
    } else {
        write_file(output, text);
    }
    if (g.dropped_cfg_edges > 0) log_line("graph", std::to_string(g.dropped_cfg_edges) + " CFG edges to missing blocks dropped");
    return kOk;
}

int cmd_validate(const std::vector<std::string>& inputs) {
    bool ok = true;
    for (const auto& in : inputs) {
        std::ifstream f(in, std::ios::binary);
        if (!f) {
            std::cout << in << ": cannot read\n";
            ok = false;
            continue;
        }
        auto report = validate_dump(f);
        if (report.empty()) {
            std::cout << in << ": ok\n";
        } else {
            ok = false;
            for (const auto& v : report) std::cout << in << ": " << v << "\n";
        }
    }
    return ok ? kOk : kFailure;
}

int cmd_train(const DataFlags& data, const TrainFlags& flags, const std::string& out_root) {
    auto cfg = flags.resolve();
    auto [m, programs] = data.load();
    if (m.mode != TaskMode::multiclass) throw Error("train expects a multiclass manifest; use experiment for per-group tasks");
    auto set = label_multiclass(m, programs);
    auto run = train_run(set, cfg, cfg.seed);
    fs::path dir = fs::path(out_root) / run_dir_name(cfg, cfg.seed);
    fs::create_directories(dir);
    write_config(dir, cfg, data.manifest);
    run.vocab.save(dir / "vocab.txt");
    gcn::save_checkpoint(dir / "model.ckpt", run.checkpoint);
    nlohmann::ordered_json classes = set.class_names;
    write_file(dir / "classes.json", classes.dump() + "\n");
    auto j = run_to_json(run.result);
    j["classes"] = set.class_names;
    write_file(dir / "results.json", j.dump(2) + "\n");
    ExperimentResult e;
    e.class_names = set.class_names;
    e.runs.push_back(run.result);
    e.mean_accuracy = run.result.test_accuracy;
    if (run.result.baseline) e.baseline_mean = run.result.baseline->test_accuracy;
    e.per_class_recall.assign(set.class_names.size(), 0.0);
    for (std::size_t i = 0; i < set.class_names.size(); ++i) {
        auto total = std::accumulate(run.result.confusion[i].begin(), run.result.confusion[i].end(), std::size_t{0});
        if (total) e.per_class_recall[i] = static_cast<double>(run.result.confusion[i][i]) / static_cast<double>(total);
    }
    write_file(dir / "results.txt", experiment_table({e}));
    std::cout << dir.string() << "\n";
    log_line("train", "test accuracy " + fixed(run.result.test_accuracy) + " after " + std::to_string(run.result.epochs) + " epochs");
    return kOk;
}

struct LoadedModel {
    gcn::Model<double> model;
    Vocabulary vocab;
    std::vector<std::string> classes;
    TrainConfig config;
};

LoadedModel load_model_dir(const fs::path& dir) {
    LoadedModel lm;
    auto ck = gcn::load_checkpoint(dir / "model.ckpt");
    lm.vocab = Vocabulary::load(dir / "vocab.txt");
    if (lm.vocab.hash() != ck.vocab_hash) throw Error("vocabulary in " + dir.string() + " does not match the checkpoint");
    lm.model = gcn::Model<double>(ck.config, ck.params);
    lm.classes = nlohmann::json::parse(read_file(dir / "classes.json")).get<std::vector<std::string>>();
    lm.config = TrainConfig::from_json(nlohmann::json::parse(read_file(dir / "config.json")));
    return lm;
}

int cmd_eval(const DataFlags& data, const std::string& model_dir, const std::string& which) {
    auto lm = load_model_dir(model_dir);
    auto [m, programs] = data.load();
    auto set = label_multiclass(m, programs);
    if (set.class_names != lm.classes) throw Error("manifest classes differ from the model's classes");
    LabelledSet chosen = set;
    if (which != "all") {
        auto split = split_indices(set.size(), lm.config.seed);
        chosen = set.subset(which == "test" ? split.test : which == "val" ? split.val : split.train);
    }
    auto samples = make_samples<double>(chosen, lm.vocab, lm.model.config.mode);
    auto ev = evaluate(lm.model, samples, lm.classes.size());
    nlohmann::ordered_json j;
    j["split"] = which;
    j["samples"] = samples.size();
    j["accuracy"] = ev.accuracy;
    j["classes"] = lm.classes;
    j["confusion"] = ev.confusion;
    std::cout << j.dump(2) << "\n";
    return kOk;
}

int cmd_predict(const std::string& model_dir, const std::vector<std::string>& inputs, std::size_t top_k) {
    auto lm = load_model_dir(model_dir);
    std::vector<gcn::GraphSample<double>> samples;
    for (const auto& in : inputs) {
        auto g = build_program_graph(fs::path(in));
        samples.push_back(gcn::make_sample<double>(featurize(g, lm.vocab), g.edges, lm.model.config.mode, 0));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto probs = lm.model.forward(gcn::batch_graphs(std::vector<const gcn::GraphSample<double>*>{&samples[i]}));
        std::vector<std::size_t> order(lm.classes.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
            return probs(0, static_cast<Eigen::Index>(a)) > probs(0, static_cast<Eigen::Index>(b));
        });
        std::cout << inputs[i];
        for (std::size_t k = 0; k < std::min(top_k, order.size()); ++k) {
            std::cout << "\t" << lm.classes[order[k]] << "=" << fixed(probs(0, static_cast<Eigen::Index>(order[k])));
        }
        std::cout << "\n";
    }
    return kOk;
}

int cmd_experiment(const DataFlags& data, const TrainFlags& flags, const std::string& out_root) {
    auto cfg = flags.resolve();
    auto [m, programs] = data.load();
    auto results = run_experiment(m, programs, cfg, [](const std::string& s) { log_line("experiment", s); });
    fs::path dir = fs::path(out_root) / run_dir_name(cfg, cfg.seed);
    fs::create_directories(dir);
    write_config(dir, cfg, data.manifest);
    nlohmann::ordered_json j;
    j["mode"] = task_mode_name(m.mode);
    j["results"] = nlohmann::ordered_json::array();
    for (const auto& r : results) j["results"].push_back(experiment_to_json(r));
    write_file(dir / "results.json", j.dump(2) + "\n");
    auto table = experiment_table(results);
    write_file(dir / "results.txt", table);
    std::cout << table << dir.string() << "\n";
    return kOk;
}

int cmd_sweep(const DataFlags& data, const TrainFlags& flags, const std::string& out_root, std::size_t repeats) {
    auto cfg = flags.resolve();
    auto [m, programs] = data.load();
    if (m.mode != TaskMode::multiclass) throw Error("sweep expects a multiclass manifest");
    SweepSpec spec;
    spec.timing_repeats = repeats;
    auto rows = sweep(label_multiclass(m, programs), cfg, spec, [](const std::string& s) { log_line("sweep", s); });
    fs::path dir = fs::path(out_root) / ("sweep-" + run_dir_name(cfg, cfg.seed));
    fs::create_directories(dir);
    write_config(dir, cfg, data.manifest);
    write_file(dir / "sweep.json", sweep_to_json(rows).dump(2) + "\n");
    auto table = sweep_table(rows);
    bool monotonic = time_grows_with_depth(rows);
    table += std::string("time grows with depth: ") + (monotonic ? "yes" : "no") + "\n";
    write_file(dir / "sweep.txt", table);
    std::cout << table << dir.string() << "\n";
    return kOk;
}

int cmd_corpus(const std::string& spec_dir, const std::string& out_dir, const corpus::Options& opt) {
    auto m = corpus::make_corpus(spec_dir, out_dir, opt);
    log_line("corpus-make", std::to_string(m.entries.size()) + " binaries, manifest " + (fs::path(out_dir) / "manifest.csv").string());
    return kOk;
}

}

int main(int argc, char** argv) {
    CLI::App app{"Program graphs and graph-convolutional classifiers for x86-64 ELF binaries"};
    app.require_subcommand(1);
    std::string log_format = "text";
    app.add_option("--log-format", log_format, "stderr log format")->check(CLI::IsMember({"text", "json"}));

    std::string input, output, label, unresolved, format = "json", model_dir, which = "test", out_root = "runs";
    std::vector<std::string> inputs;
    std::size_t top_k = 3, repeats = 5;
    DataFlags data;
    TrainFlags train_flags;
    corpus::Options corpus_opt;
    corpus_opt.jobs = default_jobs();

    auto* lift = app.add_subcommand("lift", "lift an ELF binary to a .b2v.jsonl dump");
    lift->add_option("input", input)->required();
    lift->add_option("-o,--output", output, "dump path (default <input>.b2v.jsonl)");
    lift->add_option("--label", label, "class label stored in the dump");
    lift->add_option("--unresolved", unresolved, "write unresolved indirect-branch sites here");

    auto* graph = app.add_subcommand("graph", "emit the program graph of an ELF file or dump");
    graph->add_option("input", input)->required();
    graph->add_option("--format", format)->check(CLI::IsMember({"dot", "json"}));
    graph->add_option("-o,--output", output);

    auto* validate = app.add_subcommand("validate", "check dumps against the interchange schema");
    validate->add_option("inputs", inputs)->required();

    auto* train = app.add_subcommand("train", "train one model; writes a run directory");
    data.add(train);
    train_flags.add(train);
    train->add_option("--out", out_root, "parent of run directories");

    auto* eval = app.add_subcommand("eval", "evaluate a trained model on a manifest");
    data.add(eval);
    eval->add_option("--model-dir", model_dir)->required()->check(CLI::ExistingDirectory);
    eval->add_option("--split", which, "split of the training seed to score")->check(CLI::IsMember({"train", "val", "test", "all"}));

    auto* predict = app.add_subcommand("predict", "top-k classes for binaries or dumps");
    predict->add_option("--model-dir", model_dir)->required()->check(CLI::ExistingDirectory);
    predict->add_option("--top-k,-k", top_k);
    predict->add_option("inputs", inputs)->required();

    auto* experiment = app.add_subcommand("experiment", "multi-seed experiment with the bag-of-words baseline");
    DataFlags exp_data;
    TrainFlags exp_flags;
    exp_data.add(experiment);
    exp_flags.add(experiment);
    experiment->add_option("--out", out_root);

    auto* sweep_cmd = app.add_subcommand("sweep", "depth and width sweep with timing");
    DataFlags sweep_data;
    TrainFlags sweep_flags;
    sweep_data.add(sweep_cmd);
    sweep_flags.add(sweep_cmd);
    sweep_cmd->add_option("--out", out_root);
    sweep_cmd->add_option("--repeats", repeats, "timing repeats (minimum is reported)");

    std::string spec_dir, corpus_out;
    auto* corpus_cmd = app.add_subcommand("corpus-make", "compile the bundled C templates into a labelled corpus");
    corpus_cmd->add_option("spec_dir", spec_dir)->required()->check(CLI::ExistingDirectory);
    corpus_cmd->add_option("out_dir", corpus_out)->required();
    corpus_cmd->add_option("--variants", corpus_opt.variants, "variants per class");
    corpus_cmd->add_option("--seed", corpus_opt.seed);
    corpus_cmd->add_option("--cc", corpus_opt.cc, "C compiler");
    corpus_cmd->add_option("--jobs,-j", corpus_opt.jobs);

    CLI11_PARSE(app, argc, argv);
    json_logs = log_format == "json";

    try {
        if (*lift) return cmd_lift(input, output, label, unresolved);
        if (*graph) return cmd_graph(input, format, output);
        if (*validate) return cmd_validate(inputs);
        if (*train) return cmd_train(data, train_flags, out_root);
        if (*eval) return cmd_eval(data, model_dir, which);
        if (*predict) return cmd_predict(model_dir, inputs, top_k);
        if (*experiment) return cmd_experiment(exp_data, exp_flags, out_root);
        if (*sweep_cmd) return cmd_sweep(sweep_data, sweep_flags, out_root, repeats);
        if (*corpus_cmd) return cmd_corpus(spec_dir, corpus_out, corpus_opt);
    } catch (const UnsupportedArchError& e) {
        log_line("error", std::string("unsupported-architecture: ") + e.what());
        return kUnsupportedArch;
    } catch (const ParseError& e) {
        log_line("error", std::string("parse: ") + e.what());
        return kParseError;
    } catch (const SchemaError& e) {
        log_line("error", std::string("schema: ") + e.what());
        return kParseError;
    } catch (const std::exception& e) {
        log_line("error", e.what());
        return kFailure;
    }
    return kFailure;
}
