#ifndef BIN2VEC_GRAPH_BUILDER_HPP
#define BIN2VEC_GRAPH_BUILDER_HPP

// Program graphs.
//
// Each basic block becomes a computational forest whose edges run from an
// argument to the instruction consuming it. Constants, registers (per SSA
// version) and temporaries are shared within the block; operations are not.
// The raw forest keeps VEX's plumbing nodes (Iex_Const after every constant,
// Iex_WrtTmp / Iex_RdTmp around every temporary) so that pruning can remove
// them explicitly. Source/Sink nodes close each block into a single-entry,
// single-exit DAG and CFG edges become Sink(A) -> Source(B) edges.

#include "bin2vec/cfg.hpp"
#include "bin2vec/interchange.hpp"
#include "bin2vec/ir.hpp"

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace bin2vec {

using NodeId = std::size_t;

enum class NodeKind {
    source,
    sink,
    constant,
    reg,
    temp,
    operation,    // opcodes plus Put/Store/Exit/Load
    opaque,
    const_wrapper,
    write_tmp,
    read_tmp,
};

inline constexpr const char* kConstWrapperLabel = "Iex_Const";
inline constexpr const char* kWriteTmpLabel = "Iex_WrtTmp";
inline constexpr const char* kReadTmpLabel = "Iex_RdTmp";

struct GraphNode {
    std::string label;
    NodeKind kind = NodeKind::operation;
    std::string stripped;  // label once SSA indices are removed
};

/// Mutable per-block graph. Nodes are never physically erased; pruning marks
/// them dead so creation order survives into the final numbering.
class BlockDag {
public:
    NodeId add_node(std::string label, NodeKind kind, std::string stripped = {}) {
        if (stripped.empty()) stripped = label;
        nodes_.push_back({std::move(label), kind, std::move(stripped)});
        succ_.emplace_back();
        pred_.emplace_back();
        alive_.push_back(true);
        return nodes_.size() - 1;
    }

    void add_edge(NodeId from, NodeId to) {
        if (from == to) return;
        succ_[from].insert(to);
        pred_[to].insert(from);
    }

    void remove_edge(NodeId from, NodeId to) {
        succ_[from].erase(to);
        pred_[to].erase(from);
    }

    void remove_node(NodeId n) {
        for (auto s : std::vector<NodeId>(succ_[n].begin(), succ_[n].end())) remove_edge(n, s);
        for (auto p : std::vector<NodeId>(pred_[n].begin(), pred_[n].end())) remove_edge(p, n);
        alive_[n] = false;
    }

    std::size_t capacity() const { return nodes_.size(); }
    bool alive(NodeId n) const { return alive_[n]; }
    const GraphNode& node(NodeId n) const { return nodes_[n]; }
    GraphNode& node(NodeId n) { return nodes_[n]; }
    const std::set<NodeId>& successors(NodeId n) const { return succ_[n]; }
    const std::set<NodeId>& predecessors(NodeId n) const { return pred_[n]; }

    std::vector<NodeId> live_nodes() const {
        std::vector<NodeId> out;
        for (NodeId i = 0; i < nodes_.size(); ++i) {
            if (alive_[i]) out.push_back(i);
        }
        return out;
    }

    std::size_t node_count() const { return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), true)); }

    std::size_t edge_count() const {
        std::size_t n = 0;
        for (NodeId i = 0; i < nodes_.size(); ++i) {
            if (alive_[i]) n += succ_[i].size();
        }
        return n;
    }

    bool has_edge(NodeId from, NodeId to) const { return succ_[from].count(to) != 0; }

    std::optional<NodeId> source;
    std::optional<NodeId> sink;

private:
    std::vector<GraphNode> nodes_;
    std::vector<std::set<NodeId>> succ_;
    std::vector<std::set<NodeId>> pred_;
    std::vector<bool> alive_;
};

using BlockForest = BlockDag;

// ---------------------------------------------------------------------------
// Register versioning

namespace detail {

inline ir::Expr version_expr(const ir::Expr& e, const std::map<std::string, std::uint32_t>& versions) {
    return std::visit(
        [&](const auto& x) -> ir::Expr {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ir::GetRegExpr>) {
                ir::RegOperand r = x.reg;
                auto it = versions.find(r.name);
                r.ssa_index = it == versions.end() ? 0 : it->second;
                return ir::Expr::get(std::move(r));
            } else if constexpr (std::is_same_v<T, ir::OpExpr>) {
                std::vector<ir::Expr> args;
                for (const auto& a : x.args) args.push_back(version_expr(a, versions));
                return ir::Expr::op(x.opcode, std::move(args));
            } else if constexpr (std::is_same_v<T, ir::LoadExpr>) {
                return ir::Expr::load(x.width, version_expr(*x.addr, versions));
            } else {
                return ir::Expr{x};
            }
        },
        e.node);
}

}

/// Subscripts every register occurrence: reads see the current version of
/// their name (starting at 0), each PutReg defines the next one.
inline ir::BasicBlock assign_register_versions(const ir::BasicBlock& block) {
    ir::BasicBlock out;
    out.addr = block.addr;
    out.successors = block.successors;
    std::map<std::string, std::uint32_t> versions;
    for (const auto& stmt : block.stmts) {
        out.stmts.push_back(std::visit(
            [&](const auto& s) -> ir::Stmt {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, ir::WrTmp>) {
                    return ir::WrTmp{s.dst, detail::version_expr(s.rhs, versions)};
                } else if constexpr (std::is_same_v<T, ir::PutReg>) {
                    auto rhs = detail::version_expr(s.rhs, versions);
                    ir::RegOperand dst = s.dst;
                    dst.ssa_index = ++versions[dst.name];
                    return ir::PutReg{std::move(dst), std::move(rhs)};
                } else if constexpr (std::is_same_v<T, ir::Store>) {
                    return ir::Store{detail::version_expr(s.addr, versions), detail::version_expr(s.data, versions)};
                } else if constexpr (std::is_same_v<T, ir::Exit>) {
                    return ir::Exit{detail::version_expr(s.guard, versions), s.target};
                } else {
                    return s;
                }
            },
            stmt));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-block construction

namespace detail {

class ForestBuilder {
public:
    BlockForest forest;

    NodeId expr(const ir::Expr& e) {
        return std::visit(
            [&](const auto& x) -> NodeId {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, ir::ConstExpr>) {
                    NodeId c = operand(ir::render(x.value), NodeKind::constant, ir::render(x.value));
                    NodeId w = forest.add_node(kConstWrapperLabel, NodeKind::const_wrapper);
                    forest.add_edge(c, w);
                    return w;
                } else if constexpr (std::is_same_v<T, ir::RdTmpExpr>) {
                    NodeId t = operand(ir::render(x.tmp), NodeKind::temp, "t");
                    NodeId r = forest.add_node(kReadTmpLabel, NodeKind::read_tmp);
                    forest.add_edge(t, r);
                    return r;
                } else if constexpr (std::is_same_v<T, ir::GetRegExpr>) {
                    return operand(ir::render(x.reg), NodeKind::reg, x.reg.name);
                } else if constexpr (std::is_same_v<T, ir::OpExpr>) {
                    std::vector<NodeId> args;
                    for (const auto& a : x.args) args.push_back(expr(a));
                    NodeId n = forest.add_node(x.opcode, NodeKind::operation);
                    for (auto a : args) forest.add_edge(a, n);
                    return n;
                } else {
                    NodeId a = expr(*x.addr);
                    NodeId n = forest.add_node("Load", NodeKind::operation);
                    forest.add_edge(a, n);
                    return n;
                }
            },
            e.node);
    }

    void stmt(const ir::Stmt& s) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, ir::WrTmp>) {
                    NodeId rhs = expr(x.rhs);
                    NodeId w = forest.add_node(kWriteTmpLabel, NodeKind::write_tmp);
                    forest.add_edge(rhs, w);
                    forest.add_edge(w, operand(ir::render(x.dst), NodeKind::temp, "t"));
                } else if constexpr (std::is_same_v<T, ir::PutReg>) {
                    NodeId rhs = expr(x.rhs);
                    NodeId put = forest.add_node("Put", NodeKind::operation);
                    forest.add_edge(rhs, put);
                    forest.add_edge(put, operand(ir::render(x.dst), NodeKind::reg, x.dst.name));
                } else if constexpr (std::is_same_v<T, ir::Store>) {
                    NodeId addr = expr(x.addr);
                    NodeId data = expr(x.data);
                    NodeId n = forest.add_node("Store", NodeKind::operation);
                    forest.add_edge(addr, n);
                    forest.add_edge(data, n);
                } else if constexpr (std::is_same_v<T, ir::Exit>) {
                    NodeId guard = expr(x.guard);
                    NodeId target = operand(ir::to_hex(x.target), NodeKind::constant, ir::to_hex(x.target));
                    NodeId n = forest.add_node("Exit", NodeKind::operation);
                    forest.add_edge(guard, n);
                    forest.add_edge(target, n);
                } else if constexpr (std::is_same_v<T, ir::Opaque>) {
                    forest.add_node(x.mnemonic, NodeKind::opaque);
                }
            },
            s);
    }

private:
    std::map<std::pair<NodeKind, std::string>, NodeId> operands_;

    NodeId operand(const std::string& label, NodeKind kind, const std::string& stripped) {
        auto key = std::make_pair(kind, label);
        auto it = operands_.find(key);
        if (it != operands_.end()) return it->second;
        NodeId n = forest.add_node(label, kind, stripped);
        operands_.emplace(key, n);
        return n;
    }
};

}

/// Raw computational forest of a versioned block (IMarks contribute nothing).
inline BlockForest block_to_forest(const ir::BasicBlock& block) {
    detail::ForestBuilder b;
    for (const auto& s : block.stmts) b.stmt(s);
    return std::move(b.forest);
}

/// Adds Source -> (every in-degree-0 node) and (every out-degree-0 node) -> Sink.
inline BlockDag add_source_sink(BlockForest forest) {
    auto live = forest.live_nodes();
    std::vector<NodeId> roots, leaves;
    for (auto n : live) {
        if (forest.predecessors(n).empty()) roots.push_back(n);
        if (forest.successors(n).empty()) leaves.push_back(n);
    }
    NodeId source = forest.add_node("Source", NodeKind::source);
    NodeId sink = forest.add_node("Sink", NodeKind::sink);
    for (auto r : roots) forest.add_edge(source, r);
    for (auto l : leaves) forest.add_edge(l, sink);
    if (live.empty()) forest.add_edge(source, sink);
    forest.source = source;
    forest.sink = sink;
    return forest;
}

/// Removes Iex_Const wrappers and contracts producer -> Iex_WrtTmp -> t ->
/// Iex_RdTmp -> consumer chains into producer -> consumer edges. A temporary
/// is deleted when it has both a producer and at least one consumer; otherwise
/// only its wrappers go and the temp node itself stays.
inline void prune(BlockDag& g) {
    for (auto n : g.live_nodes()) {
        if (g.node(n).kind != NodeKind::const_wrapper) continue;
        std::vector<NodeId> preds(g.predecessors(n).begin(), g.predecessors(n).end());
        std::vector<NodeId> succs(g.successors(n).begin(), g.successors(n).end());
        g.remove_node(n);
        for (auto p : preds)
            for (auto s : succs) g.add_edge(p, s);
    }
    for (auto t : g.live_nodes()) {
        if (g.node(t).kind != NodeKind::temp) continue;
        std::vector<NodeId> writers, readers, producers, consumers;
        for (auto w : g.predecessors(t)) {
            if (g.node(w).kind == NodeKind::write_tmp) {
                writers.push_back(w);
                producers.insert(producers.end(), g.predecessors(w).begin(), g.predecessors(w).end());
            } else {
                producers.push_back(w);
            }
        }
        for (auto r : g.successors(t)) {
            if (g.node(r).kind == NodeKind::read_tmp) {
                readers.push_back(r);
                consumers.insert(consumers.end(), g.successors(r).begin(), g.successors(r).end());
            } else {
                consumers.push_back(r);
            }
        }
        for (auto w : writers) g.remove_node(w);
        for (auto r : readers) g.remove_node(r);
        bool contract = !producers.empty() && !consumers.empty();
        if (contract) {
            g.remove_node(t);
            for (auto p : producers)
                for (auto c : consumers) g.add_edge(p, c);
        } else {
            for (auto p : producers) g.add_edge(p, t);
            for (auto c : consumers) g.add_edge(t, c);
        }
    }
}

/// Relabels registers and temporaries to their unsubscripted names. Topology
/// is untouched and nodes are never merged.
inline void strip_ssa(BlockDag& g) {
    for (auto n : g.live_nodes()) {
        auto& node = g.node(n);
        if (node.kind == NodeKind::reg || node.kind == NodeKind::temp) {
            node.label = node.stripped;
        }
    }
}

// ---------------------------------------------------------------------------
// Whole-program graph

struct BlockSpan {
    NodeId source = 0;  // first node of the block
    NodeId sink = 0;    // last node of the block
};

struct ProgramGraph {
    std::vector<std::string> labels;
    std::vector<std::pair<NodeId, NodeId>> edges;  // sorted, unique
    std::map<ir::Address, BlockSpan> block_spans;
    std::size_t dropped_cfg_edges = 0;

    std::size_t node_count() const { return labels.size(); }
};

inline BlockDag finalize_block(const ir::BasicBlock& block) {
    auto versioned = assign_register_versions(block);
    auto dag = add_source_sink(block_to_forest(versioned));
    prune(dag);
    strip_ssa(dag);
    return dag;
}

/// Renumbers every block DAG (blocks by address; Source, surviving forest
/// nodes in creation order, Sink) and adds Sink(A) -> Source(B) per CFG edge.
inline ProgramGraph connect_blocks(const Cfg& cfg, const std::map<ir::Address, BlockDag>& dags) {
    ProgramGraph g;
    std::set<std::pair<NodeId, NodeId>> edges;
    for (const auto& [addr, dag] : dags) {
        std::map<NodeId, NodeId> remap;
        auto assign = [&](NodeId local) {
            remap[local] = g.labels.size();
            g.labels.push_back(dag.node(local).label);
        };
        assign(*dag.source);
        for (auto n : dag.live_nodes()) {
            if (n != *dag.source && n != *dag.sink) assign(n);
        }
        assign(*dag.sink);
        for (auto n : dag.live_nodes()) {
            for (auto s : dag.successors(n)) edges.emplace(remap.at(n), remap.at(s));
        }
        g.block_spans[addr] = {remap.at(*dag.source), remap.at(*dag.sink)};
    }
    for (const auto& [addr, block] : cfg.blocks) {
        auto from = g.block_spans.find(addr);
        if (from == g.block_spans.end()) continue;
        for (const auto& s : block.successors) {
            auto to = g.block_spans.find(s.target);
            if (to == g.block_spans.end()) {
                ++g.dropped_cfg_edges;
                continue;
            }
            edges.emplace(from->second.sink, to->second.source);
        }
    }
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

inline ProgramGraph build_program_graph(const Cfg& cfg) {
    std::map<ir::Address, BlockDag> dags;
    for (const auto& [addr, block] : cfg.blocks) {
        dags.emplace(addr, finalize_block(block));
    }
    return connect_blocks(cfg, dags);
}

inline bool is_dump_path(const std::filesystem::path& path) {
    const std::string name = path.filename().string();
    const std::string ext = dump_extension;
    return name.size() >= ext.size() && name.compare(name.size() - ext.size(), ext.size(), ext) == 0;
}

/// Lifted program from an ELF file or a single-program dump.
inline ProgramDump load_program(const std::filesystem::path& path) {
    if (is_dump_path(path)) {
        auto programs = read_dump_file(path);
        if (programs.size() != 1) {
            throw ParseError(path.string() + ": expected one program, found " + std::to_string(programs.size()));
        }
        return std::move(programs.front());
    }
    ProgramDump d;
    d.binary_id = path.filename().string();
    d.cfg = build_cfg(load_elf_file(path));
    return d;
}

inline ProgramGraph build_program_graph(const std::filesystem::path& path) {
    return build_program_graph(load_program(path).cfg);
}

// ---------------------------------------------------------------------------
// Output formats

inline std::string graph_to_json(const ProgramGraph& g) {
    nlohmann::ordered_json j;
    j["nodes"] = nlohmann::ordered_json::array();
    for (NodeId i = 0; i < g.labels.size(); ++i) {
        nlohmann::ordered_json n;
        n["id"] = i;
        n["label"] = g.labels[i];
        j["nodes"].push_back(std::move(n));
    }
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& [a, b] : g.edges) j["edges"].push_back({a, b});
    return j.dump() + "\n";
}

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

inline std::string graph_to_dot(const ProgramGraph& g, const std::string& name = "program") {
    std::ostringstream out;
    out << "digraph \"" << dot_escape(name) << "\" {\n";
    for (const auto& [addr, span] : g.block_spans) {
        out << "  subgraph \"cluster_" << ir::to_hex(addr) << "\" {\n";
        out << "    label=\"" << ir::to_hex(addr) << "\";\n";
        for (NodeId i = span.source; i <= span.sink; ++i) {
            out << "    n" << i << " [label=\"" << dot_escape(g.labels[i]) << "\"];\n";
        }
        out << "  }\n";
    }
    for (const auto& [a, b] : g.edges) out << "  n" << a << " -> n" << b << ";\n";
    out << "}\n";
    return out.str();
}

}

#endif
