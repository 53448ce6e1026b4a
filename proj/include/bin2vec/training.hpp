#ifndef BIN2VEC_TRAINING_HPP
#define BIN2VEC_TRAINING_HPP

#include "bin2vec/baseline.hpp"
#include "bin2vec/dataset.hpp"
#include "bin2vec/error.hpp"
#include "bin2vec/features.hpp"
#include "bin2vec/gcn/batch.hpp"
#include "bin2vec/gcn/checkpoint.hpp"
#include "bin2vec/gcn/model.hpp"
#include "bin2vec/gcn/optimizer.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace bin2vec {

// ---------------------------------------------------------------------------
// Splits

struct Split {
    std::vector<std::size_t> train, val, test;
};

/// Uniform integer in [0, bound) by rejection, independent of the standard
/// library's distribution implementations.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    while (true) {
        std::uint64_t x = rng();
        if (x < limit) return x % bound;
    }
}

/// 70:15:15 with floor(0.15 n) for validation and test; train takes the rest.
inline Split split_indices(std::size_t n, std::uint64_t seed) {
    if (n < 10) throw Error("need at least 10 entries to split, got " + std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[uniform_below(rng, i + 1)]);
    const std::size_t held = n * 15 / 100;
    Split s;
    s.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(held), order.begin() + static_cast<std::ptrdiff_t>(2 * held));
    s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(2 * held), order.end());
    return s;
}

// ---------------------------------------------------------------------------
// Configuration

struct TrainConfig {
    std::vector<std::size_t> layers{128, 128, 64};
    std::size_t mlp_hidden = 64;
    gcn::NormMode mode = gcn::NormMode::symmetric;
    gcn::OptimizerConfig optimizer;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
    std::size_t min_count = 5;
    std::size_t runs = 5;
    std::uint64_t seed = 0;
    bool single_precision = false;
    bool baseline = true;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["layers"] = layers;
        j["mlp_hidden"] = mlp_hidden;
        j["normalization"] = gcn::norm_mode_name(mode);
        j["optimizer"] = gcn::optimizer_name(optimizer.kind);
        j["learning_rate"] = optimizer.learning_rate;
        j["batch_size"] = batch_size;
        j["max_epochs"] = max_epochs;
        j["patience"] = patience;
        j["min_count"] = min_count;
        j["runs"] = runs;
        j["seed"] = seed;
        j["precision"] = single_precision ? "float" : "double";
        j["baseline"] = baseline;
        return j;
    }

    static TrainConfig from_json(const nlohmann::json& j) {
        TrainConfig c;
        if (j.contains("layers")) c.layers = j.at("layers").get<std::vector<std::size_t>>();
        if (j.contains("mlp_hidden")) c.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
        if (j.contains("normalization")) c.mode = gcn::parse_norm_mode(j.at("normalization").get<std::string>());
        if (j.contains("optimizer")) c.optimizer.kind = gcn::parse_optimizer(j.at("optimizer").get<std::string>());
        if (j.contains("learning_rate")) c.optimizer.learning_rate = j.at("learning_rate").get<double>();
        if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
        if (j.contains("max_epochs")) c.max_epochs = j.at("max_epochs").get<std::size_t>();
        if (j.contains("patience")) c.patience = j.at("patience").get<std::size_t>();
        if (j.contains("min_count")) c.min_count = j.at("min_count").get<std::size_t>();
        if (j.contains("runs")) c.runs = j.at("runs").get<std::size_t>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("precision")) {
            auto p = j.at("precision").get<std::string>();
            if (p != "float" && p != "double") throw Error("precision must be float or double");
            c.single_precision = p == "float";
        }
        if (j.contains("baseline")) c.baseline = j.at("baseline").get<bool>();
        return c;
    }

    /// Hash of everything except the seed, so runs of one config share a prefix.
    std::uint64_t hash() const {
        auto j = to_json();
        j.erase("seed");
        return fnv1a(j.dump());
    }
};

inline std::string run_dir_name(const TrainConfig& cfg, std::uint64_t seed) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << cfg.hash() << std::dec << "-" << seed;
    return s.str();
}

// ---------------------------------------------------------------------------
// Labelled data

struct LabelledSet {
    std::vector<const LoadedProgram*> programs;
    std::vector<int> labels;
    std::vector<std::string> class_names;

    std::size_t size() const { return programs.size(); }

    LabelledSet subset(const std::vector<std::size_t>& idx) const {
        LabelledSet out;
        out.class_names = class_names;
        for (auto i : idx) {
            out.programs.push_back(programs[i]);
            out.labels.push_back(labels[i]);
        }
        return out;
    }

    std::vector<const ProgramGraph*> graphs() const {
        std::vector<const ProgramGraph*> out;
        for (const auto* p : programs) out.push_back(&p->graph);
        return out;
    }

    std::vector<const std::vector<std::string>*> docs() const {
        std::vector<const std::vector<std::string>*> out;
        for (const auto* p : programs) out.push_back(&p->bow_tokens);
        return out;
    }
};

/// Multiclass labelling: class id = position of the label among the sorted names.
inline LabelledSet label_multiclass(const Manifest& m, const std::vector<LoadedProgram>& programs) {
    LabelledSet s;
    s.class_names = m.class_names();
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        auto it = std::lower_bound(s.class_names.begin(), s.class_names.end(), m.entries[i].label);
        s.programs.push_back(&programs[i]);
        s.labels.push_back(static_cast<int>(it - s.class_names.begin()));
    }
    return s;
}

/// Binary good (0) / bad (1) labelling of the entries of one group.
inline LabelledSet label_group(const Manifest& m, const std::vector<LoadedProgram>& programs, const std::string& group) {
    LabelledSet s;
    s.class_names = {"good", "bad"};
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        if (m.entries[i].group != group) continue;
        s.programs.push_back(&programs[i]);
        s.labels.push_back(m.entries[i].flag == "bad" ? 1 : 0);
    }
    return s;
}

template <typename S>
std::vector<gcn::GraphSample<S>> make_samples(const LabelledSet& set, const Vocabulary& vocab, gcn::NormMode mode) {
    std::vector<gcn::GraphSample<S>> out;
    out.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& g = set.programs[i]->graph;
        out.push_back(gcn::make_sample<S>(featurize(g, vocab), g.edges, mode, set.labels[i]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Training and evaluation

struct Evaluation {
    double accuracy = 0;
    double loss = 0;  // mean cross-entropy
    std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
    std::vector<int> predictions;
};

template <typename S>
Evaluation evaluate(const gcn::Model<S>& model, const std::vector<gcn::GraphSample<S>>& samples, std::size_t classes,
                    std::size_t batch_size = 32) {
    Evaluation e;
    e.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
    std::size_t correct = 0;
    double loss_sum = 0;
    for (std::size_t start = 0; start < samples.size(); start += batch_size) {
        std::vector<const gcn::GraphSample<S>*> chunk;
        for (std::size_t i = start; i < std::min(samples.size(), start + batch_size); ++i) chunk.push_back(&samples[i]);
        auto probs = model.forward(gcn::batch_graphs(chunk));
        for (std::size_t k = 0; k < chunk.size(); ++k) {
            auto row = probs.row(static_cast<Eigen::Index>(k));
            Eigen::Index best = 0;
            row.maxCoeff(&best);
            int predicted = static_cast<int>(best);
            int truth = chunk[k]->label;
            e.predictions.push_back(predicted);
            ++e.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
            correct += predicted == truth;
            loss_sum += static_cast<double>(gcn::cross_entropy<S>(row, truth));
        }
    }
    if (!samples.empty()) {
        e.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
        e.loss = loss_sum / static_cast<double>(samples.size());
    }
    return e;
}

struct EpochRecord {
    double train_loss = 0;
    double val_accuracy = 0;
    double val_loss = 0;
};

template <typename S>
struct TrainOutcome {
    gcn::Model<S> model;
    std::size_t epochs = 0;      // epochs actually run
    std::size_t best_epoch = 0;  // 1-based epoch whose weights were kept
    double best_val_accuracy = -1;
    std::vector<EpochRecord> history;
    double seconds = 0;
};

/// Trains with per-epoch reshuffling and early stopping after `patience`
/// epochs without a gain in validation accuracy. The restored weights are
/// those with the best validation accuracy, ties going to the lower
/// validation loss.
template <typename S>
TrainOutcome<S> train_model(const std::vector<gcn::GraphSample<S>>& train, const std::vector<gcn::GraphSample<S>>& val,
                            const gcn::ModelConfig& model_cfg, const TrainConfig& cfg) {
    if (train.empty()) throw TrainingError("empty training split");
    auto t0 = std::chrono::steady_clock::now();
    TrainOutcome<S> out;
    out.model = gcn::Model<S>(model_cfg);
    gcn::Optimizer<S> opt(cfg.optimizer);
    std::mt19937_64 rng(model_cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    gcn::Params<S> best = out.model.params;
    std::size_t since_best = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[uniform_below(rng, i + 1)]);
        double loss_sum = 0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::vector<const gcn::GraphSample<S>*> chunk;
            for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i) chunk.push_back(&train[order[i]]);
            auto batch = gcn::batch_graphs(chunk);
            gcn::ForwardCache<S> cache;
            S loss = out.model.loss(batch, &cache);
            if (!std::isfinite(static_cast<double>(loss))) {
                throw TrainingError("loss is " + std::to_string(static_cast<double>(loss)) + " at epoch " +
                                    std::to_string(epoch) + ", batch " + std::to_string(batches + 1));
            }
            auto grads = out.model.backward(batch, cache);
            opt.step(out.model.params, grads);
            loss_sum += static_cast<double>(loss);
            ++batches;
        }
        auto ev = val.empty() ? Evaluation{} : evaluate(out.model, val, model_cfg.classes, cfg.batch_size);
        out.history.push_back({loss_sum / static_cast<double>(batches), ev.accuracy, ev.loss});
        out.epochs = epoch;
        const bool improved = ev.accuracy > out.best_val_accuracy;
        if (improved || (ev.accuracy == out.best_val_accuracy && ev.loss < best_val_loss)) {
            out.best_val_accuracy = ev.accuracy;
            best_val_loss = ev.loss;
            out.best_epoch = epoch;
            best = out.model.params;
        }
        if (improved) {
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    out.model.params = best;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

inline gcn::ModelConfig model_config(const TrainConfig& cfg, std::size_t input_dim, std::size_t classes,
                                     std::uint64_t seed) {
    gcn::ModelConfig m;
    m.input_dim = input_dim;
    m.layers = cfg.layers;
    m.mlp_hidden = cfg.mlp_hidden;
    m.classes = classes;
    m.mode = cfg.mode;
    m.seed = seed;
    return m;
}

// ---------------------------------------------------------------------------
// Single-seed runs and multi-seed experiments

struct RunResult {
    std::uint64_t seed = 0;
    double val_accuracy = 0;
    double test_accuracy = 0;
    std::size_t epochs = 0;
    std::size_t best_epoch = 0;
    double train_seconds = 0;
    std::size_t vocab_size = 0;
    std::uint64_t vocab_hash = 0;
    std::vector<std::vector<std::size_t>> confusion;
    std::optional<bow::BaselineResult> baseline;
    std::size_t train_size = 0, val_size = 0, test_size = 0;
};

struct TrainedRun {
    RunResult result;
    Vocabulary vocab;
    gcn::Checkpoint checkpoint;
};

template <typename S>
TrainedRun train_run_as(const LabelledSet& data, const TrainConfig& cfg, std::uint64_t seed) {
    auto split = split_indices(data.size(), seed);
    auto train = data.subset(split.train), val = data.subset(split.val), test = data.subset(split.test);
    TrainedRun run;
    run.vocab = build_vocab(train.graphs(), cfg.min_count);
    const auto classes = data.class_names.size();
    auto xtr = make_samples<S>(train, run.vocab, cfg.mode);
    auto xva = make_samples<S>(val, run.vocab, cfg.mode);
    auto xte = make_samples<S>(test, run.vocab, cfg.mode);
    auto mc = model_config(cfg, run.vocab.size(), classes, seed);
    auto outcome = train_model<S>(xtr, xva, mc, cfg);
    auto test_eval = evaluate(outcome.model, xte, classes, cfg.batch_size);

    auto& r = run.result;
    r.seed = seed;
    r.val_accuracy = outcome.best_val_accuracy;
    r.test_accuracy = test_eval.accuracy;
    r.epochs = outcome.epochs;
    r.best_epoch = outcome.best_epoch;
    r.train_seconds = outcome.seconds;
    r.vocab_size = run.vocab.size();
    r.vocab_hash = run.vocab.hash();
    r.confusion = test_eval.confusion;
    r.train_size = train.size();
    r.val_size = val.size();
    r.test_size = test.size();
    if (cfg.baseline) {
        r.baseline = bow::run_baseline(train.docs(), train.labels, val.docs(), val.labels, test.docs(), test.labels,
                                       classes);
    }
    run.checkpoint = {mc, run.vocab.hash(), outcome.model.params.template cast<double>()};
    return run;
}

inline TrainedRun train_run(const LabelledSet& data, const TrainConfig& cfg, std::uint64_t seed) {
    return cfg.single_precision ? train_run_as<float>(data, cfg, seed) : train_run_as<double>(data, cfg, seed);
}

struct ExperimentResult {
    std::string group;  // empty in multiclass mode
    std::vector<std::string> class_names;
    std::vector<RunResult> runs;
    double mean_accuracy = 0;
    double std_accuracy = 0;
    double baseline_mean = 0;
    double baseline_std = 0;
    std::vector<std::vector<std::size_t>> confusion;  // summed over runs
    std::vector<double> per_class_recall;
    double seconds = 0;
};

/// Population mean and standard deviation.
inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

using ProgressFn = std::function<void(const std::string&)>;

inline ExperimentResult run_labelled_experiment(const LabelledSet& data, const TrainConfig& cfg,
                                                const ProgressFn& progress = {}) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentResult e;
    e.class_names = data.class_names;
    const auto c = data.class_names.size();
    e.confusion.assign(c, std::vector<std::size_t>(c, 0));
    std::vector<double> accs, base;
    for (std::size_t r = 0; r < cfg.runs; ++r) {
        auto run = train_run(data, cfg, cfg.seed + r);
        accs.push_back(run.result.test_accuracy);
        if (run.result.baseline) base.push_back(run.result.baseline->test_accuracy);
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t j = 0; j < c; ++j) e.confusion[i][j] += run.result.confusion[i][j];
        if (progress) {
            std::ostringstream msg;
            msg << "seed " << run.result.seed << ": gcn test " << run.result.test_accuracy << " (" << run.result.epochs
                << " epochs, " << run.result.train_seconds << " s)";
            if (run.result.baseline) msg << ", bow test " << run.result.baseline->test_accuracy;
            progress(msg.str());
        }
        e.runs.push_back(std::move(run.result));
    }
    std::tie(e.mean_accuracy, e.std_accuracy) = mean_std(accs);
    std::tie(e.baseline_mean, e.baseline_std) = mean_std(base);
    for (std::size_t i = 0; i < c; ++i) {
        std::size_t total = std::accumulate(e.confusion[i].begin(), e.confusion[i].end(), std::size_t{0});
        e.per_class_recall.push_back(total == 0 ? 0.0 : static_cast<double>(e.confusion[i][i]) / static_cast<double>(total));
    }
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return e;
}

/// One result in multiclass mode; one independent result per group otherwise.
inline std::vector<ExperimentResult> run_experiment(const Manifest& m, const std::vector<LoadedProgram>& programs,
                                                    const TrainConfig& cfg, const ProgressFn& progress = {}) {
    std::vector<ExperimentResult> out;
    if (m.mode == TaskMode::multiclass) {
        out.push_back(run_labelled_experiment(label_multiclass(m, programs), cfg, progress));
        return out;
    }
    for (const auto& g : m.groups()) {
        if (progress) progress("group " + g);
        auto r = run_labelled_experiment(label_group(m, programs, g), cfg, progress);
        r.group = g;
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Depth / width sweep

struct SweepRow {
    std::string axis;  // "depth" or "width"
    std::vector<std::size_t> layers;
    double val_accuracy = 0;
    std::size_t epochs = 0;
    double seconds_per_100 = 0;
};

/// Seconds for one optimisation pass over 100 training samples (cycling the
/// training split if it is smaller), best of `repeats`.
template <typename S>
double time_per_100(const std::vector<gcn::GraphSample<S>>& train, const gcn::ModelConfig& mc, const TrainConfig& cfg,
                    std::size_t repeats) {
    std::vector<const gcn::GraphSample<S>*> pool;
    for (std::size_t i = 0; i < 100; ++i) pool.push_back(&train[i % train.size()]);
    std::vector<gcn::GraphBatch<S>> batches;
    for (std::size_t start = 0; start < pool.size(); start += cfg.batch_size) {
        std::vector<const gcn::GraphSample<S>*> chunk(pool.begin() + static_cast<std::ptrdiff_t>(start),
                                                      pool.begin() + static_cast<std::ptrdiff_t>(std::min(pool.size(), start + cfg.batch_size)));
        batches.push_back(gcn::batch_graphs(chunk));
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < repeats; ++r) {
        gcn::Model<S> model(mc);
        gcn::Optimizer<S> opt(cfg.optimizer);
        auto t0 = std::chrono::steady_clock::now();
        for (const auto& b : batches) {
            gcn::ForwardCache<S> cache;
            model.loss(b, &cache);
            auto g = model.backward(b, cache);
            opt.step(model.params, g);
        }
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

struct SweepSpec {
    std::vector<std::size_t> depths{1, 2, 3, 4, 5, 6, 7, 8};
    std::size_t depth_width = 64;
    std::vector<std::size_t> widths{32, 64, 128, 256};
    std::size_t width_depth = 3;
    std::size_t timing_repeats = 5;
};

template <typename S>
std::vector<SweepRow> sweep_as(const LabelledSet& data, const TrainConfig& cfg, const SweepSpec& spec,
                               const ProgressFn& progress) {
    auto split = split_indices(data.size(), cfg.seed);
    auto train = data.subset(split.train), val = data.subset(split.val);
    auto vocab = build_vocab(train.graphs(), cfg.min_count);
    auto xtr = make_samples<S>(train, vocab, cfg.mode);
    auto xva = make_samples<S>(val, vocab, cfg.mode);
    std::vector<std::pair<std::string, std::vector<std::size_t>>> configs;
    for (auto d : spec.depths) configs.emplace_back("depth", std::vector<std::size_t>(d, spec.depth_width));
    for (auto w : spec.widths) configs.emplace_back("width", std::vector<std::size_t>(spec.width_depth, w));
    std::vector<SweepRow> rows(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        rows[i].axis = configs[i].first;
        rows[i].layers = configs[i].second;
        rows[i].seconds_per_100 = std::numeric_limits<double>::infinity();
    }
    for (std::size_t r = 0; r < spec.timing_repeats; ++r) {
        for (auto& row : rows) {
            TrainConfig c = cfg;
            c.layers = row.layers;
            auto mc = model_config(c, vocab.size(), data.class_names.size(), cfg.seed);
            row.seconds_per_100 = std::min(row.seconds_per_100, time_per_100<S>(xtr, mc, c, 1));
        }
    }
    for (auto& row : rows) {
        const auto& axis = row.axis;
        const auto& layers = row.layers;
        TrainConfig c = cfg;
        c.layers = layers;
        auto mc = model_config(c, vocab.size(), data.class_names.size(), cfg.seed);
        auto outcome = train_model<S>(xtr, xva, mc, c);
        row.val_accuracy = outcome.best_val_accuracy;
        row.epochs = outcome.epochs;
        if (progress) {
            std::ostringstream msg;
            msg << axis << " " << layers.size() << "x" << layers.front() << ": val " << row.val_accuracy << ", "
                << row.seconds_per_100 << " s/100";
            progress(msg.str());
        }
    }
    return rows;
}

inline std::vector<SweepRow> sweep(const LabelledSet& data, const TrainConfig& cfg, const SweepSpec& spec = {},
                                   const ProgressFn& progress = {}) {
    return cfg.single_precision ? sweep_as<float>(data, cfg, spec, progress) : sweep_as<double>(data, cfg, spec, progress);
}

/// True when time per 100 samples strictly increases along the depth rows.
inline bool time_grows_with_depth(const std::vector<SweepRow>& rows) {
    const SweepRow* prev = nullptr;
    for (const auto& r : rows) {
        if (r.axis != "depth") continue;
        if (prev && !(r.seconds_per_100 > prev->seconds_per_100)) return false;
        prev = &r;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Reports

inline constexpr const char* kBaselineFootnote =
    "baseline: L2-regularised multinomial logistic regression on log(1+count) bag-of-IR-lines features "
    "(linear substitute for a Gaussian-kernel SVM); lambda and min_count chosen on validation";

inline nlohmann::ordered_json run_to_json(const RunResult& r) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["train_size"] = r.train_size;
    j["val_size"] = r.val_size;
    j["test_size"] = r.test_size;
    j["val_accuracy"] = r.val_accuracy;
    j["test_accuracy"] = r.test_accuracy;
    j["epochs"] = r.epochs;
    j["best_epoch"] = r.best_epoch;
    j["train_seconds"] = r.train_seconds;
    j["vocab_size"] = r.vocab_size;
    j["vocab_hash"] = ir::to_hex(r.vocab_hash);
    j["confusion"] = r.confusion;
    if (r.baseline) {
        nlohmann::ordered_json b;
        b["val_accuracy"] = r.baseline->val_accuracy;
        b["test_accuracy"] = r.baseline->test_accuracy;
        b["lambda"] = r.baseline->lambda;
        b["min_count"] = r.baseline->min_count;
        b["vocab_size"] = r.baseline->vocab_size;
        j["baseline"] = std::move(b);
    }
    return j;
}

inline nlohmann::ordered_json experiment_to_json(const ExperimentResult& e) {
    nlohmann::ordered_json j;
    if (!e.group.empty()) j["group"] = e.group;
    j["classes"] = e.class_names;
    j["runs"] = nlohmann::ordered_json::array();
    for (const auto& r : e.runs) j["runs"].push_back(run_to_json(r));
    j["mean_accuracy"] = e.mean_accuracy;
    j["std_accuracy"] = e.std_accuracy;
    if (!e.runs.empty() && e.runs.front().baseline) {
        j["baseline_mean_accuracy"] = e.baseline_mean;
        j["baseline_std_accuracy"] = e.baseline_std;
        j["baseline_note"] = kBaselineFootnote;
    }
    j["confusion"] = e.confusion;
    j["per_class_recall"] = e.per_class_recall;
    j["seconds"] = e.seconds;
    return j;
}

inline std::string fixed(double x, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << x;
    return s.str();
}

inline std::string experiment_table(const std::vector<ExperimentResult>& results) {
    std::ostringstream out;
    bool any_baseline = false;
    for (const auto& e : results) {
        out << (e.group.empty() ? std::string("experiment") : "group " + e.group) << "\n";
        out << "  seed  val     test    epochs  bow_test\n";
        for (const auto& r : e.runs) {
            out << "  " << std::setw(4) << r.seed << "  " << fixed(r.val_accuracy) << "  " << fixed(r.test_accuracy)
                << "  " << std::setw(6) << r.epochs << "  " << (r.baseline ? fixed(r.baseline->test_accuracy) : "-")
                << "\n";
            any_baseline = any_baseline || r.baseline.has_value();
        }
        out << "  gcn mean " << fixed(e.mean_accuracy) << " +/- " << fixed(e.std_accuracy);
        if (!e.runs.empty() && e.runs.front().baseline) {
            out << "   bow mean " << fixed(e.baseline_mean) << " +/- " << fixed(e.baseline_std);
        }
        out << "\n  recall";
        for (std::size_t i = 0; i < e.class_names.size(); ++i) {
            out << "  " << e.class_names[i] << "=" << fixed(e.per_class_recall[i], 3);
        }
        out << "\n";
    }
    if (any_baseline) out << "note: " << kBaselineFootnote << "\n";
    return out.str();
}

inline nlohmann::ordered_json sweep_to_json(const std::vector<SweepRow>& rows) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json o;
        o["axis"] = r.axis;
        o["layers"] = r.layers;
        o["val_accuracy"] = r.val_accuracy;
        o["epochs"] = r.epochs;
        o["seconds_per_100"] = r.seconds_per_100;
        j.push_back(std::move(o));
    }
    return j;
}

inline std::string sweep_table(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    for (const char* axis : {"depth", "width"}) {
        out << (std::string(axis) == "depth" ? "depth (width fixed)\n" : "width (depth fixed)\n");
        out << "  layers          val_acc  s/100\n";
        for (const auto& r : rows) {
            if (r.axis != axis) continue;
            std::string name = std::to_string(r.layers.size()) + "x" + std::to_string(r.layers.front());
            out << "  " << std::left << std::setw(14) << name << std::right << "  " << fixed(r.val_accuracy) << "  "
                << fixed(r.seconds_per_100, 5) << "\n";
        }
    }
    return out.str();
}

}

#endif
