#include "invariants.hpp"
#include "support.hpp"

#include "bin2vec/graph_builder.hpp"

#include <gtest/gtest.h>

#include <regex>

using namespace bin2vec;

namespace {

ir::RegOperand vreg(const std::string& name, unsigned width, std::uint32_t version) {
    auto r = ir::reg(name, width);
    r.ssa_index = version;
    return r;
}

std::vector<NodeId> with_label(const BlockDag& g, const std::string& label) {
    std::vector<NodeId> out;
    for (auto n : g.live_nodes())
        if (g.node(n).label == label) out.push_back(n);
    return out;
}

NodeId only(const BlockDag& g, const std::string& label) {
    auto ns = with_label(g, label);
    EXPECT_EQ(ns.size(), 1u) << label;
    return ns.empty() ? 0 : ns.front();
}

bool wrapper(const BlockDag& g, NodeId n) {
    auto k = g.node(n).kind;
    return k == NodeKind::const_wrapper || k == NodeKind::write_tmp || k == NodeKind::read_tmp;
}

/// u reaches v along a path whose interior nodes are all wrapper nodes.
bool wrapper_path(const BlockDag& g, NodeId u, NodeId v) {
    std::vector<NodeId> stack{u};
    std::set<NodeId> seen{u};
    while (!stack.empty()) {
        auto n = stack.back();
        stack.pop_back();
        for (auto s : g.successors(n)) {
            if (s == v) return true;
            if (wrapper(g, s) && seen.insert(s).second) stack.push_back(s);
        }
    }
    return false;
}

ir::BasicBlock add_then_put() {
    ir::BasicBlock b;
    b.addr = 0x10;
    b.stmts.push_back(ir::WrTmp{{0, 32}, ir::Expr::op("Add32", {ir::Expr::get(vreg("eax", 32, 0)), ir::Expr::constant(1, 32)})});
    b.stmts.push_back(ir::PutReg{vreg("eax", 32, 1), ir::Expr::rdtmp({0, 32})});
    return b;
}

bool weakly_connected(const BlockDag& g) {
    auto live = g.live_nodes();
    if (live.empty()) return true;
    std::set<NodeId> seen{live.front()};
    std::vector<NodeId> stack{live.front()};
    while (!stack.empty()) {
        auto n = stack.back();
        stack.pop_back();
        for (const auto* nb : {&g.successors(n), &g.predecessors(n)})
            for (auto m : *nb)
                if (seen.insert(m).second) stack.push_back(m);
    }
    return seen.size() == live.size();
}

}

TEST(RegisterVersions, PutsDefineFreshVersions) {
    ir::BasicBlock b;
    b.stmts.push_back(ir::WrTmp{{0, 32}, ir::Expr::get(ir::reg("eax", 32))});
    b.stmts.push_back(ir::PutReg{ir::reg("eax", 32), ir::Expr::rdtmp({0, 32})});
    b.stmts.push_back(ir::WrTmp{{1, 32}, ir::Expr::get(ir::reg("eax", 32))});
    b.stmts.push_back(ir::PutReg{ir::reg("eax", 32), ir::Expr::get(ir::reg("ebx", 32))});
    std::vector<std::string> rendered;
    for (const auto& s : assign_register_versions(b).stmts) rendered.push_back(ir::render(s));
    EXPECT_EQ(rendered, (std::vector<std::string>{"t0 = eax_0", "eax_1 = t0", "t1 = eax_1", "eax_2 = ebx_0"}));
}

TEST(BlockToForest, AddThenPut) {
    auto f = block_to_forest(add_then_put());
    std::multiset<std::string> labels;
    for (auto n : f.live_nodes())
        if (!wrapper(f, n)) labels.insert(f.node(n).label);
    EXPECT_EQ(labels, (std::multiset<std::string>{"eax_0", "0x1", "Add32", "t0", "Put", "eax_1"}));
    auto eax0 = only(f, "eax_0"), one = only(f, "0x1"), add = only(f, "Add32"), t0 = only(f, "t0"), put = only(f, "Put"),
         eax1 = only(f, "eax_1");
    EXPECT_TRUE(f.has_edge(eax0, add));
    EXPECT_TRUE(wrapper_path(f, one, add));
    EXPECT_TRUE(wrapper_path(f, add, t0));
    EXPECT_TRUE(wrapper_path(f, t0, put));
    EXPECT_TRUE(f.has_edge(put, eax1));
    EXPECT_EQ(with_label(f, kConstWrapperLabel).size(), 1u);
    EXPECT_EQ(with_label(f, kWriteTmpLabel).size(), 1u);
    EXPECT_EQ(with_label(f, kReadTmpLabel).size(), 1u);
}

TEST(BlockToForest, SharedRegisterRead) {
    ir::BasicBlock b;
    b.stmts.push_back(ir::WrTmp{{0, 32}, ir::Expr::op("Not32", {ir::Expr::get(vreg("eax", 32, 0))})});
    b.stmts.push_back(ir::WrTmp{{1, 32}, ir::Expr::op("Neg32", {ir::Expr::get(vreg("eax", 32, 0))})});
    auto f = block_to_forest(b);
    auto eax = only(f, "eax_0");
    EXPECT_EQ(f.successors(eax), (std::set<NodeId>{only(f, "Not32"), only(f, "Neg32")}));
}

TEST(BlockToForest, EmptyBlock) {
    EXPECT_EQ(block_to_forest(ir::BasicBlock{}).node_count(), 0u);
    ir::BasicBlock marks;
    marks.stmts.push_back(ir::IMark{0x10, 1});
    EXPECT_EQ(block_to_forest(marks).node_count(), 0u);
}

TEST(SourceSink, TwoDisjointTrees) {
    BlockForest f;
    auto a = f.add_node("a", NodeKind::reg), b = f.add_node("Not64", NodeKind::operation);
    auto c = f.add_node("c", NodeKind::reg), d = f.add_node("Neg64", NodeKind::operation);
    f.add_edge(a, b);
    f.add_edge(c, d);
    auto g = add_source_sink(f);
    ASSERT_TRUE(g.source && g.sink);
    EXPECT_EQ(g.successors(*g.source), (std::set<NodeId>{a, c}));
    EXPECT_EQ(g.predecessors(*g.sink), (std::set<NodeId>{b, d}));
    EXPECT_EQ(with_label(g, "Source").size(), 1u);
    EXPECT_EQ(with_label(g, "Sink").size(), 1u);
    EXPECT_TRUE(weakly_connected(g));
}

TEST(SourceSink, EmptyForest) {
    auto g = add_source_sink(BlockForest{});
    EXPECT_EQ(g.node_count(), 2u);
    EXPECT_EQ(g.edge_count(), 1u);
    EXPECT_TRUE(g.has_edge(*g.source, *g.sink));
}

TEST(SourceSink, SingleNode) {
    BlockForest f;
    auto n = f.add_node("hlt", NodeKind::opaque);
    auto g = add_source_sink(f);
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_TRUE(g.has_edge(*g.source, n));
    EXPECT_TRUE(g.has_edge(n, *g.sink));
}

TEST(Prune, ContractsTempChain) {
    auto g = add_source_sink(block_to_forest(add_then_put()));
    prune(g);
    EXPECT_TRUE(with_label(g, "t0").empty());
    EXPECT_TRUE(g.has_edge(only(g, "Add32"), only(g, "Put")));
    EXPECT_TRUE(g.has_edge(only(g, "0x1"), only(g, "Add32")));
    for (auto n : g.live_nodes()) EXPECT_FALSE(wrapper(g, n)) << g.node(n).label;
}

TEST(Prune, SharedConstant) {
    ir::BasicBlock b;
    b.stmts.push_back(ir::WrTmp{{0, 32}, ir::Expr::op("Add32", {ir::Expr::get(vreg("eax", 32, 0)), ir::Expr::constant(1, 32)})});
    b.stmts.push_back(ir::WrTmp{{1, 32}, ir::Expr::op("Sub32", {ir::Expr::get(vreg("ebx", 32, 0)), ir::Expr::constant(1, 32)})});
    auto g = add_source_sink(block_to_forest(b));
    prune(g);
    auto one = only(g, "0x1");
    EXPECT_EQ(g.successors(one), (std::set<NodeId>{only(g, "Add32"), only(g, "Sub32")}));
}

TEST(Prune, MultiUseTempFansOutEdges) {
    ir::BasicBlock b;
    b.stmts.push_back(ir::WrTmp{{0, 64}, ir::Expr::get(vreg("rdi", 64, 0))});
    b.stmts.push_back(ir::WrTmp{{1, 64}, ir::Expr::op("Mul64", {ir::Expr::rdtmp({0, 64}), ir::Expr::rdtmp({0, 64})})});
    b.stmts.push_back(ir::PutReg{vreg("rax", 64, 1), ir::Expr::rdtmp({0, 64})});
    auto g = add_source_sink(block_to_forest(b));
    prune(g);
    auto rdi = only(g, "rdi_0");
    EXPECT_EQ(g.successors(rdi), (std::set<NodeId>{only(g, "Mul64"), only(g, "Put")}));
    EXPECT_TRUE(with_label(g, "t0").empty());
}

TEST(Prune, FixpointWithoutTempsOrWrappers) {
    BlockForest f;
    auto r = f.add_node("rsp_0", NodeKind::reg, "rsp");
    auto s = f.add_node("Store", NodeKind::operation);
    auto q = f.add_node("rbx_0", NodeKind::reg, "rbx");
    f.add_edge(r, s);
    f.add_edge(q, s);
    auto g = add_source_sink(f);
    auto before = invariants::live_successors(g);
    prune(g);
    EXPECT_EQ(invariants::live_successors(g), before);
}

TEST(StripSsa, RemovesSubscriptsOnly) {
    auto g = add_source_sink(block_to_forest(add_then_put()));
    prune(g);
    auto edges = g.edge_count();
    auto nodes = g.node_count();
    strip_ssa(g);
    EXPECT_EQ(g.edge_count(), edges);
    EXPECT_EQ(g.node_count(), nodes);
    EXPECT_EQ(with_label(g, "eax").size(), 2u);
    for (auto n : g.live_nodes()) EXPECT_FALSE(std::regex_search(g.node(n).label, std::regex("_[0-9]+$")));
}

TEST(ProgramGraph, InvariantsOnEveryFixture) {
    for (const auto& prog : fixtures::all_programs()) {
        auto problems = invariants::check(prog);
        EXPECT_TRUE(problems.empty()) << prog.binary_id << ": " << problems.size() << " problems, first: "
                                      << (problems.empty() ? "" : problems.front());
    }
}

TEST(ProgramGraph, ThreeBlockTopology) {
    auto prog = read_dump_file(fixtures::dump("three_blocks.b2v.jsonl")).at(0);
    auto g = build_program_graph(prog.cfg);
    EXPECT_EQ(std::count(g.labels.begin(), g.labels.end(), "Source"), 3);
    EXPECT_EQ(std::count(g.labels.begin(), g.labels.end(), "Sink"), 3);
    std::set<std::pair<ir::Address, ir::Address>> inter;
    std::map<NodeId, ir::Address> sinks, sources;
    for (const auto& [a, span] : g.block_spans) {
        sinks[span.sink] = a;
        sources[span.source] = a;
    }
    for (auto [u, v] : g.edges)
        if (sinks.count(u) && sources.count(v)) inter.emplace(sinks[u], sources[v]);
    EXPECT_EQ(inter, (std::set<std::pair<ir::Address, ir::Address>>{{0x1000, 0x1010}, {0x1000, 0x1020}, {0x1010, 0x1020}}));
}

TEST(ProgramGraph, NodeOrderIsBlocksThenCreation) {
    auto prog = read_dump_file(fixtures::dump("three_blocks.b2v.jsonl")).at(0);
    auto g = build_program_graph(prog.cfg);
    std::vector<std::string> first(g.labels.begin(), g.labels.begin() + 11);
    EXPECT_EQ(first, (std::vector<std::string>{"Source", "eax", "0x1", "Add32", "Put", "eax", "0x0", "CmpEQ32", "0x1020",
                                               "Exit", "Sink"}));
}

TEST(ProgramGraph, ExternalSuccessorsAreDropped) {
    auto progs = read_dump_file(fixtures::dump("mixed.b2v.jsonl"));
    auto a = build_program_graph(progs.at(0).cfg);
    EXPECT_EQ(a.dropped_cfg_edges, 1u);
    auto b = build_program_graph(progs.at(1).cfg);
    EXPECT_EQ(b.dropped_cfg_edges, 1u);
    // a block that is its own successor gets Sink -> Source inside one span
    auto span = b.block_spans.at(0x20);
    EXPECT_TRUE(std::binary_search(b.edges.begin(), b.edges.end(), std::make_pair(span.sink, span.source)));
}

TEST(ProgramGraph, JsonAndDotOutput) {
    auto g = build_program_graph(fixtures::bin("tiny"));
    auto j = nlohmann::json::parse(graph_to_json(g));
    ASSERT_EQ(j["nodes"].size(), g.node_count());
    EXPECT_EQ(j["nodes"][0]["label"], "Source");
    EXPECT_EQ(j["edges"].size(), g.edges.size());
    auto dot = graph_to_dot(g);
    EXPECT_EQ(std::count(g.labels.begin(), g.labels.end(), "Source"), 1);
    std::size_t sources = 0, pos = 0;
    while ((pos = dot.find("label=\"Source\"", pos)) != std::string::npos) ++sources, ++pos;
    EXPECT_EQ(sources, 1u);
    EXPECT_NE(dot.find("label=\"Sink\""), std::string::npos);
    EXPECT_EQ(dot_escape("a\"b\\c"), "a\\\"b\\\\c");
}

TEST(ProgramGraph, LoadProgramRejectsUnknownFiles) {
    auto dir = fixtures::work_dir("graph_bad_input");
    std::ofstream(dir / "x.txt") << "hello";
    EXPECT_THROW(load_program(dir / "x.txt"), ParseError);
    std::ofstream(dir / "two.b2v.jsonl") << write_dump(read_dump_file(fixtures::dump("mixed.b2v.jsonl")));
    EXPECT_THROW(load_program(dir / "two.b2v.jsonl"), ParseError);
}
