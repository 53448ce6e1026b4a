#include "support.hpp"

#include "bin2vec/features.hpp"

#include <gtest/gtest.h>

using namespace bin2vec;

namespace {

ProgramGraph graph_of(std::vector<std::string> labels) {
    ProgramGraph g;
    g.labels = std::move(labels);
    return g;
}

}

TEST(Vocab, ThresholdWithPlaceholders) {
    std::vector<std::string> labels(5, "Add32");
    labels.push_back("0xdeadbeef");
    labels.push_back("foo");
    auto v = build_vocab(std::vector<ProgramGraph>{graph_of(labels)}, 2);
    EXPECT_EQ(v.labels(), (std::vector<std::string>{"Add32", "CONST", "UNK"}));
    EXPECT_EQ(v.labels()[v.column("0xdeadbeef")], "CONST");
    EXPECT_EQ(v.labels()[v.column("foo")], "UNK");
}

TEST(Vocab, MinCountOneKeepsEverything) {
    auto v = build_vocab(std::vector<ProgramGraph>{graph_of({"Add32", "0xdeadbeef", "foo"}), graph_of({"Sink"})}, 1);
    EXPECT_EQ(v.labels(), (std::vector<std::string>{"0xdeadbeef", "Add32", "CONST", "Sink", "UNK", "foo"}));
    EXPECT_EQ(v.labels()[v.column("0xdeadbeef")], "0xdeadbeef");
}

TEST(Vocab, CountsAcrossGraphs) {
    auto v = build_vocab(std::vector<ProgramGraph>{graph_of({"Xor32"}), graph_of({"Xor32"}), graph_of({"Shl8"})}, 2);
    EXPECT_TRUE(v.contains("Xor32"));
    EXPECT_FALSE(v.contains("Shl8"));
}

TEST(Vocab, UnseenHexIsConst) {
    auto v = build_vocab(std::vector<ProgramGraph>{graph_of({"Add32"})}, 1);
    EXPECT_EQ(v.labels()[v.column("0x42")], "CONST");
    EXPECT_EQ(v.labels()[v.column("0X42")], "UNK");
    EXPECT_EQ(v.labels()[v.column("Mul64")], "UNK");
}

TEST(Vocab, EmptyTrainingSetThrows) {
    EXPECT_THROW(build_vocab(std::vector<ProgramGraph>{}, 1), Error);
}

TEST(Vocab, TextRoundTripAndHash) {
    auto v = build_vocab(std::vector<ProgramGraph>{graph_of({"Add32", "Put", "rax", "0x8"})}, 1);
    auto back = Vocabulary::from_text(v.to_text());
    EXPECT_EQ(back.labels(), v.labels());
    EXPECT_EQ(back.hash(), v.hash());
    auto other = build_vocab(std::vector<ProgramGraph>{graph_of({"Add32"})}, 1);
    EXPECT_NE(other.hash(), v.hash());
    EXPECT_THROW(Vocabulary::from_text("Add32\nAdd32\nUNK\nCONST\n"), ParseError);
    EXPECT_THROW(Vocabulary::from_text("Add32\n"), ParseError);
}

TEST(Featurize, OneActiveColumnPerNode) {
    auto progs = fixtures::all_programs();
    std::vector<ProgramGraph> graphs;
    for (const auto& p : progs) graphs.push_back(build_program_graph(p.cfg));
    auto v = build_vocab(graphs, 2);
    for (const auto& g : graphs) {
        auto x = featurize(g, v);
        ASSERT_EQ(x.rows(), g.node_count());
        EXPECT_EQ(x.cols, v.size());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            ASSERT_LT(x.active[i], v.size());
            const auto& label = v.labels()[x.active[i]];
            if (v.contains(g.labels[i])) {
                EXPECT_EQ(label, g.labels[i]);
            } else {
                EXPECT_EQ(label, ir::is_hex_literal(g.labels[i]) ? "CONST" : "UNK");
            }
        }
    }
}
