#include "support.hpp"

#include "bin2vec/training.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <regex>
#include <set>

using namespace bin2vec;

namespace {

void expect_partition(const Split& s, std::size_t n) {
    std::vector<std::size_t> all;
    for (const auto* part : {&s.train, &s.val, &s.test}) all.insert(all.end(), part->begin(), part->end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> want(n);
    std::iota(want.begin(), want.end(), 0);
    EXPECT_EQ(all, want);
}

/// Two classes that differ by which opcode dominates a chain of nodes.
std::vector<LoadedProgram> toy_programs(std::size_t per_class, std::mt19937_64& rng) {
    std::vector<LoadedProgram> out;
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            LoadedProgram p;
            p.path = "toy" + std::to_string(c) + "_" + std::to_string(i);
            std::size_t n = 4 + rng() % 6;
            p.graph.labels.push_back("Source");
            for (std::size_t k = 0; k < n; ++k) {
                bool signal = rng() % 3 != 0;
                p.graph.labels.push_back(signal ? (c == 0 ? "Add64" : "Xor64") : (rng() % 2 ? "rax" : "0x8"));
                p.bow_tokens.push_back(p.graph.labels.back());
            }
            p.graph.labels.push_back("Sink");
            for (std::size_t k = 0; k + 1 < p.graph.labels.size(); ++k) p.graph.edges.emplace_back(k, k + 1);
            out.push_back(std::move(p));
        }
    }
    return out;
}

Manifest toy_manifest(const std::vector<LoadedProgram>& progs) {
    Manifest m;
    for (const auto& p : progs) m.entries.push_back({p.path, p.path.substr(0, 4), "", ""});
    return m;
}

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.layers = {16, 8};
    cfg.mlp_hidden = 16;
    cfg.optimizer.learning_rate = 0.01;
    cfg.max_epochs = 60;
    cfg.min_count = 1;
    cfg.runs = 2;
    cfg.batch_size = 8;
    return cfg;
}

}

TEST(Split, HundredEntries) {
    auto s = split_indices(100, 3);
    EXPECT_EQ(s.train.size(), 70u);
    EXPECT_EQ(s.val.size(), 15u);
    EXPECT_EQ(s.test.size(), 15u);
    expect_partition(s, 100);
}

TEST(Split, TenEntriesRoundingRule) {
    for (std::size_t n : {10, 13, 19, 20, 99, 320}) {
        auto s = split_indices(n, 1);
        std::size_t held = static_cast<std::size_t>(std::floor(0.15 * static_cast<double>(n)));
        EXPECT_EQ(s.val.size(), held) << n;
        EXPECT_EQ(s.test.size(), held) << n;
        EXPECT_EQ(s.train.size(), n - 2 * held) << n;
        expect_partition(s, n);
    }
    auto ten = split_indices(10, 0);
    EXPECT_EQ(ten.train.size(), 8u);
    EXPECT_EQ(ten.val.size(), 1u);
    EXPECT_EQ(ten.test.size(), 1u);
}

TEST(Split, SeedStable) {
    auto a = split_indices(200, 17), b = split_indices(200, 17), c = split_indices(200, 18);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.val, b.val);
    EXPECT_EQ(a.test, b.test);
    EXPECT_NE(a.test, c.test);
}

TEST(Split, TooSmallThrows) {
    EXPECT_THROW(split_indices(9, 0), Error);
}

TEST(Split, UniformBelowStaysInRange) {
    std::mt19937_64 rng(1);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) ++hits[uniform_below(rng, 7)];
    for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Config, JsonRoundTripAndHash) {
    TrainConfig c;
    c.layers = {32, 16};
    c.mode = gcn::NormMode::row;
    c.optimizer.kind = gcn::OptimizerKind::sgd;
    c.single_precision = true;
    c.seed = 7;
    auto back = TrainConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
    EXPECT_EQ(back.to_json(), c.to_json());
    auto other = c;
    other.seed = 8;
    EXPECT_EQ(other.hash(), c.hash());
    other.layers = {32};
    EXPECT_NE(other.hash(), c.hash());
    EXPECT_TRUE(std::regex_match(run_dir_name(c, 7), std::regex("[0-9a-f]{16}-7")));
    EXPECT_THROW(TrainConfig::from_json(nlohmann::json::parse(R"({"precision":"half"})")), Error);
}

TEST(Stats, PopulationStd) {
    auto [m, s] = mean_std({1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(m, 2.5);
    EXPECT_DOUBLE_EQ(s, std::sqrt(1.25));
    EXPECT_EQ(mean_std({}), std::make_pair(0.0, 0.0));
}

TEST(Sweep, MonotonicDepthCheck) {
    std::vector<SweepRow> rows{{"depth", {64}, 0, 0, 1.0}, {"depth", {64, 64}, 0, 0, 2.0}, {"width", {32}, 0, 0, 0.5}};
    EXPECT_TRUE(time_grows_with_depth(rows));
    rows.push_back({"depth", {64, 64, 64}, 0, 0, 2.0});
    EXPECT_FALSE(time_grows_with_depth(rows));
}

TEST(Train, LearnsSeparableToyTask) {
    std::mt19937_64 rng(5);
    auto progs = toy_programs(30, rng);
    auto m = toy_manifest(progs);
    auto data = label_multiclass(m, progs);
    EXPECT_EQ(data.class_names, (std::vector<std::string>{"toy0", "toy1"}));
    auto run = train_run(data, small_config(), 3);
    EXPECT_GE(run.result.test_accuracy, 0.85);
    EXPECT_EQ(run.result.train_size + run.result.val_size + run.result.test_size, 60u);
    EXPECT_LE(run.result.best_epoch, run.result.epochs);
    ASSERT_TRUE(run.result.baseline);
    EXPECT_GE(run.result.baseline->test_accuracy, 0.85);
    EXPECT_EQ(run.checkpoint.vocab_hash, run.vocab.hash());
}

TEST(Train, EarlyStoppingRestoresBest) {
    std::mt19937_64 rng(6);
    auto progs = toy_programs(15, rng);
    auto data = label_multiclass(toy_manifest(progs), progs);
    auto split = split_indices(data.size(), 0);
    auto train = data.subset(split.train), val = data.subset(split.val);
    auto cfg = small_config();
    cfg.patience = 3;
    auto vocab = build_vocab(train.graphs(), 1);
    auto xtr = make_samples<double>(train, vocab, cfg.mode), xva = make_samples<double>(val, vocab, cfg.mode);
    auto out = train_model<double>(xtr, xva, model_config(cfg, vocab.size(), 2, 1), cfg);
    ASSERT_EQ(out.history.size(), out.epochs);
    double best = 0;
    for (const auto& h : out.history) best = std::max(best, h.val_accuracy);
    std::size_t first_best = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < out.history.size(); ++e) {
        if (out.history[e].val_accuracy != best) continue;
        if (first_best == 0) first_best = e + 1;
        lowest = std::min(lowest, out.history[e].val_loss);
    }
    EXPECT_EQ(out.best_val_accuracy, best);
    EXPECT_EQ(out.history[out.best_epoch - 1].val_accuracy, best);
    EXPECT_EQ(out.history[out.best_epoch - 1].val_loss, lowest);
    if (out.epochs < cfg.max_epochs) EXPECT_EQ(out.epochs - first_best, cfg.patience);
    auto restored = evaluate(out.model, xva, 2);
    EXPECT_EQ(restored.accuracy, best);
    EXPECT_NEAR(restored.loss, lowest, 1e-12);
}

TEST(Train, NonFiniteLossRaises) {
    std::mt19937_64 rng(7);
    auto progs = toy_programs(10, rng);
    auto data = label_multiclass(toy_manifest(progs), progs);
    auto cfg = small_config();
    cfg.optimizer.kind = gcn::OptimizerKind::sgd;
    cfg.optimizer.learning_rate = std::numeric_limits<double>::infinity();
    EXPECT_THROW(train_run(data, cfg, 0), TrainingError);
}

TEST(Train, ExperimentAggregatesSeeds) {
    std::mt19937_64 rng(8);
    auto progs = toy_programs(20, rng);
    auto m = toy_manifest(progs);
    auto cfg = small_config();
    cfg.max_epochs = 15;
    cfg.seed = 10;
    std::vector<std::string> messages;
    auto results = run_experiment(m, progs, cfg, [&](const std::string& s) { messages.push_back(s); });
    ASSERT_EQ(results.size(), 1u);
    const auto& e = results[0];
    ASSERT_EQ(e.runs.size(), 2u);
    EXPECT_EQ(e.runs[0].seed, 10u);
    EXPECT_EQ(e.runs[1].seed, 11u);
    auto [mean, sd] = mean_std({e.runs[0].test_accuracy, e.runs[1].test_accuracy});
    EXPECT_DOUBLE_EQ(e.mean_accuracy, mean);
    EXPECT_DOUBLE_EQ(e.std_accuracy, sd);
    EXPECT_EQ(messages.size(), 2u);
    auto table = experiment_table(results);
    EXPECT_NE(table.find("logistic regression"), std::string::npos);
    auto j = experiment_to_json(e);
    EXPECT_EQ(j["runs"].size(), 2u);
}

TEST(Train, PerGroupBinaryMode) {
    std::mt19937_64 rng(9);
    auto progs = toy_programs(12, rng);
    Manifest m;
    m.mode = TaskMode::per_group_binary;
    for (std::size_t i = 0; i < progs.size(); ++i) {
        m.entries.push_back({progs[i].path, "", i % 2 ? "CWE-1" : "CWE-2", progs[i].path[3] == '1' ? "bad" : "good"});
    }
    auto cfg = small_config();
    cfg.runs = 1;
    cfg.max_epochs = 5;
    auto results = run_experiment(m, progs, cfg);
    ASSERT_EQ(results.size(), 2u);
    EXPECT_EQ(results[0].group, "CWE-1");
    EXPECT_EQ(results[1].group, "CWE-2");
    EXPECT_EQ(results[0].class_names, (std::vector<std::string>{"good", "bad"}));
    auto g = label_group(m, progs, "CWE-1");
    EXPECT_EQ(g.size(), 12u);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.labels[i], g.programs[i]->path[3] == '1' ? 1 : 0);
}

TEST(Sweep, RowsFollowSpec) {
    std::mt19937_64 rng(11);
    auto progs = toy_programs(10, rng);
    auto data = label_multiclass(toy_manifest(progs), progs);
    auto cfg = small_config();
    cfg.max_epochs = 2;
    SweepSpec spec;
    spec.depths = {1, 2};
    spec.depth_width = 4;
    spec.widths = {3, 5};
    spec.width_depth = 2;
    spec.timing_repeats = 2;
    auto rows = sweep(data, cfg, spec);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].axis, "depth");
    EXPECT_EQ(rows[1].layers, (std::vector<std::size_t>{4, 4}));
    EXPECT_EQ(rows[3].axis, "width");
    EXPECT_EQ(rows[3].layers, (std::vector<std::size_t>{5, 5}));
    for (const auto& r : rows) {
        EXPECT_GT(r.seconds_per_100, 0);
        EXPECT_TRUE(std::isfinite(r.seconds_per_100));
        EXPECT_LE(r.epochs, 2u);
    }
    EXPECT_EQ(sweep_to_json(rows).size(), 4u);
}
