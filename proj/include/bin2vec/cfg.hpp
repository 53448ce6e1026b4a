#ifndef BIN2VEC_CFG_HPP
#define BIN2VEC_CFG_HPP

// Static inter-procedural CFG recovery by recursive descent.
//
// Discovery decodes every reachable instruction once and records block
// leaders (entries, branch targets, fall-through sites after conditional
// branches and calls). Blocks are then cut at leaders, so a jump into the
// middle of an earlier linear run splits it with a fall-through edge.
// Calls end blocks with a call edge plus a fall-through to the return site.

#include "bin2vec/elf.hpp"
#include "bin2vec/ir.hpp"
#include "bin2vec/lifter.hpp"
#include "bin2vec/x86_decoder.hpp"

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bin2vec {

struct Cfg {
    std::map<ir::Address, ir::BasicBlock> blocks;
    std::set<ir::Address> entries;
    /// Addresses of indirect jumps/calls whose targets were not resolved.
    std::set<ir::Address> unresolved;
    /// Call/jump targets outside the analyzed code (PLT stubs, unmapped).
    std::set<ir::Address> external;

    bool has_block(ir::Address a) const { return blocks.count(a) != 0; }
    bool is_external(const ir::Successor& s) const { return !has_block(s.target); }

    std::vector<std::pair<ir::Address, ir::Address>> edges() const {
        std::vector<std::pair<ir::Address, ir::Address>> out;
        for (const auto& [addr, block] : blocks) {
            for (const auto& s : block.successors) {
                out.emplace_back(addr, s.target);
            }
        }
        return out;
    }
};

namespace detail {

inline std::optional<x86::Instruction> decode_at(const LoadedBinary& bin, ir::Address addr) {
    const Section* s = bin.section_at(addr);
    if (s == nullptr || !s->executable) {
        return std::nullopt;
    }
    std::span<const std::uint8_t> code(s->bytes);
    return x86::decode(code.subspan(addr - s->vaddr), addr);
}

inline bool ends_block(const x86::Instruction& ins) { return ins.flow != x86::Flow::none; }

/// Recursive-descent state shared by discovery and block formation.
class Explorer {
public:
    explicit Explorer(const LoadedBinary& bin) : bin_(bin) {}

    void run() {
        std::set<ir::Address> seeds;
        if (bin_.entry != 0 && internal(bin_.entry)) {
            seeds.insert(bin_.entry);
        }
        for (const auto& sym : bin_.symbols) {
            if (sym.is_function && internal(sym.address)) {
                seeds.insert(sym.address);
            }
        }
        for (auto a : seeds) {
            add_function(a);
        }
        while (!work_.empty()) {
            ir::Address a = work_.front();
            work_.pop_front();
            explore(a);
        }
    }

    bool internal(ir::Address a) const { return bin_.is_executable(a) && !bin_.is_plt(a); }

    const LoadedBinary& bin_;
    std::map<ir::Address, x86::Instruction> insns;
    std::set<ir::Address> bad;        // leaders or run ends where decoding failed
    std::set<ir::Address> leaders;
    std::set<ir::Address> functions;
    std::set<ir::Address> external;
    std::set<ir::Address> unresolved;
    std::set<ir::Address> dropped;    // targets landing inside an existing instruction

private:
    std::deque<ir::Address> work_;
    std::set<ir::Address> explored_;

    void add_function(ir::Address a) {
        functions.insert(a);
        add_leader(a);
    }

    void add_leader(ir::Address a) {
        leaders.insert(a);
        if (!explored_.count(a)) {
            work_.push_back(a);
        }
    }

    /// True when `a` lies strictly inside an already decoded instruction.
    bool inside_instruction(ir::Address a) const {
        auto it = insns.upper_bound(a);
        if (it == insns.begin()) return false;
        --it;
        return it->first < a && a < it->first + it->second.length;
    }

    void target(ir::Address a, bool is_call) {
        if (!internal(a)) {
            external.insert(a);
            return;
        }
        if (inside_instruction(a)) {
            dropped.insert(a);
            return;
        }
        if (is_call) {
            add_function(a);
        } else {
            add_leader(a);
        }
    }

    void explore(ir::Address start) {
        if (!explored_.insert(start).second) {
            return;
        }
        ir::Address a = start;
        while (true) {
            if (insns.count(a)) {
                return;
            }
            if (inside_instruction(a)) {
                bad.insert(a);
                return;
            }
            auto ins = decode_at(bin_, a);
            if (!ins) {
                bad.insert(a);
                return;
            }
            // A decoded run must not overlap instructions discovered earlier.
            auto next_known = insns.upper_bound(a);
            if (next_known != insns.end() && next_known->first < a + ins->length) {
                bad.insert(a);
                return;
            }
            insns.emplace(a, *ins);
            ir::Address next = a + ins->length;
            switch (ins->flow) {
            case x86::Flow::none:
                if (leaders.count(next)) return;
                a = next;
                continue;
            case x86::Flow::jump:
                target(*ins->target, false);
                return;
            case x86::Flow::cond_jump:
                target(*ins->target, false);
                add_leader(next);
                return;
            case x86::Flow::call:
                target(*ins->target, true);
                add_leader(next);
                return;
            case x86::Flow::indirect_call:
                unresolved.insert(a);
                add_leader(next);
                return;
            case x86::Flow::indirect_jump:
                unresolved.insert(a);
                return;
            case x86::Flow::ret:
            case x86::Flow::halt:
                return;
            }
        }
    }
};

inline void add_successor(ir::BasicBlock& block, ir::Address target, ir::EdgeKind kind) {
    ir::Successor s{target, kind};
    for (const auto& existing : block.successors) {
        if (existing == s) return;
    }
    block.successors.push_back(s);
}

}

/// Decodes and lifts the straight-line run starting at `addr`, stopping at a
/// control-flow instruction or at the next address in `leaders`.
inline ir::BasicBlock disassemble_block(const LoadedBinary& bin, ir::Address addr,
                                        const std::set<ir::Address>& leaders = {}) {
    ir::BasicBlock block;
    block.addr = addr;
    BlockLifter lifter;
    ir::Address a = addr;
    auto internal = [&](ir::Address t) { return bin.is_executable(t) && !bin.is_plt(t); };
    while (true) {
        auto ins = detail::decode_at(bin, a);
        if (!ins) {
            block.stmts.push_back(ir::IMark{a, 0});
            block.stmts.push_back(ir::Opaque{"(bad)"});
            return block;
        }
        auto stmts = lifter.lift(*ins);
        block.stmts.insert(block.stmts.end(), stmts.begin(), stmts.end());
        ir::Address next = a + ins->length;
        switch (ins->flow) {
        case x86::Flow::none:
            if (leaders.count(next)) {
                detail::add_successor(block, next, ir::EdgeKind::fallthrough);
                return block;
            }
            a = next;
            continue;
        case x86::Flow::jump:
            if (internal(*ins->target)) detail::add_successor(block, *ins->target, ir::EdgeKind::jump);
            return block;
        case x86::Flow::cond_jump:
            if (internal(*ins->target)) detail::add_successor(block, *ins->target, ir::EdgeKind::branch_taken);
            detail::add_successor(block, next, ir::EdgeKind::fallthrough);
            return block;
        case x86::Flow::call:
            if (internal(*ins->target)) detail::add_successor(block, *ins->target, ir::EdgeKind::call);
            detail::add_successor(block, next, ir::EdgeKind::fallthrough);
            return block;
        case x86::Flow::indirect_call:
            detail::add_successor(block, next, ir::EdgeKind::fallthrough);
            return block;
        case x86::Flow::indirect_jump:
        case x86::Flow::ret:
        case x86::Flow::halt:
            return block;
        }
    }
}

/// Entry point, function symbols and every direct call target reached by
/// recursive descent, in ascending address order.
inline std::set<ir::Address> discover_functions(const LoadedBinary& bin) {
    detail::Explorer ex(bin);
    ex.run();
    return ex.functions;
}

inline Cfg build_cfg(const LoadedBinary& bin) {
    detail::Explorer ex(bin);
    ex.run();
    Cfg cfg;
    cfg.entries = ex.functions;
    cfg.external = ex.external;
    cfg.unresolved = ex.unresolved;

    std::set<ir::Address> leaders;
    for (auto a : ex.leaders) {
        if (ex.insns.count(a) || ex.bad.count(a)) {
            leaders.insert(a);
        }
    }
    for (auto a : leaders) {
        ir::BasicBlock block;
        block.addr = a;
        BlockLifter lifter;
        ir::Address cur = a;
        while (true) {
            auto it = ex.insns.find(cur);
            if (it == ex.insns.end()) {
                block.stmts.push_back(ir::IMark{cur, 0});
                block.stmts.push_back(ir::Opaque{"(bad)"});
                break;
            }
            const auto& ins = it->second;
            auto stmts = lifter.lift(ins);
            block.stmts.insert(block.stmts.end(), stmts.begin(), stmts.end());
            ir::Address next = cur + ins.length;
            bool stop = true;
            switch (ins.flow) {
            case x86::Flow::none:
                if (leaders.count(next)) {
                    detail::add_successor(block, next, ir::EdgeKind::fallthrough);
                } else if (!ex.insns.count(next)) {
                    // run ended on an undecodable or overlapping instruction
                    block.stmts.push_back(ir::IMark{next, 0});
                    block.stmts.push_back(ir::Opaque{"(bad)"});
                } else {
                    stop = false;
                }
                break;
            case x86::Flow::jump:
                if (ex.internal(*ins.target) && leaders.count(*ins.target)) {
                    detail::add_successor(block, *ins.target, ir::EdgeKind::jump);
                } else if (ex.internal(*ins.target)) {
                    cfg.unresolved.insert(cur);
                }
                break;
            case x86::Flow::cond_jump:
                if (ex.internal(*ins.target) && leaders.count(*ins.target)) {
                    detail::add_successor(block, *ins.target, ir::EdgeKind::branch_taken);
                } else if (ex.internal(*ins.target)) {
                    cfg.unresolved.insert(cur);
                }
                detail::add_successor(block, next, ir::EdgeKind::fallthrough);
                break;
            case x86::Flow::call:
                if (ex.internal(*ins.target) && leaders.count(*ins.target)) {
                    detail::add_successor(block, *ins.target, ir::EdgeKind::call);
                } else if (ex.internal(*ins.target)) {
                    cfg.unresolved.insert(cur);
                }
                detail::add_successor(block, next, ir::EdgeKind::fallthrough);
                break;
            case x86::Flow::indirect_call:
                detail::add_successor(block, next, ir::EdgeKind::fallthrough);
                break;
            case x86::Flow::indirect_jump:
            case x86::Flow::ret:
            case x86::Flow::halt:
                break;
            }
            if (stop) break;
            cur = next;
        }
        cfg.blocks.emplace(a, std::move(block));
    }
    return cfg;
}

/// One lowercase hex address per line.
inline std::string unresolved_report(const Cfg& cfg) {
    std::string out;
    for (auto a : cfg.unresolved) {
        out += ir::to_hex(a);
        out += '\n';
    }
    return out;
}

}

#endif
