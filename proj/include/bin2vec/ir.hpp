#ifndef BIN2VEC_IR_HPP
#define BIN2VEC_IR_HPP

// Micro-IR shared by the built-in lifter and the interchange reader.
//
// The statement/expression split follows VEX: statements have side effects
// (WrTmp, PutReg, Store, Exit), expressions are pure trees over constants,
// block-local temporaries, registers and operations. Rendering is the single
// source of node labels and bag-of-words tokens.

#include "bin2vec/error.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace bin2vec::ir {

using Address = std::uint64_t;

inline std::string to_hex(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    if (value == 0) {
        return "0x0";
    }
    std::string out;
    while (value != 0) {
        out.push_back(digits[value & 0xf]);
        value >>= 4;
    }
    out += "x0";
    return {out.rbegin(), out.rend()};
}

/// Parses the canonical `0x[0-9a-f]+` form. Uppercase digits are rejected.
inline std::optional<std::uint64_t> parse_hex(std::string_view text) {
    if (text.size() < 3 || text.size() > 18 || text[0] != '0' || text[1] != 'x') {
        return std::nullopt;
    }
    if (text.size() > 3 && text[2] == '0') {
        return std::nullopt;
    }
    std::uint64_t value = 0;
    for (char c : text.substr(2)) {
        value <<= 4;
        if (c >= '0' && c <= '9') {
            value |= static_cast<std::uint64_t>(c - '0');
        } else if (c >= 'a' && c <= 'f') {
            value |= static_cast<std::uint64_t>(c - 'a' + 10);
        } else {
            return std::nullopt;
        }
    }
    return value;
}

inline bool is_hex_literal(std::string_view text) {
    if (text.size() < 3 || text[0] != '0' || text[1] != 'x') {
        return false;
    }
    for (char c : text.substr(2)) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
            return false;
        }
    }
    return true;
}

inline bool valid_width(unsigned width) {
    return width == 8 || width == 16 || width == 32 || width == 64;
}

inline std::uint64_t width_mask(unsigned width) {
    return width >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << width) - 1);
}

/// Architectural register. `ssa_index` is empty before versioning and after
/// stripping; when present the register renders as `<name>_<index>`.
struct RegOperand {
    std::string name;
    unsigned width = 64;
    std::optional<std::uint32_t> ssa_index;

    bool operator==(const RegOperand&) const = default;
};

struct TempOperand {
    std::uint32_t id = 0;
    unsigned width = 64;

    bool operator==(const TempOperand&) const = default;
};

struct ConstOperand {
    std::uint64_t value = 0;
    unsigned width = 64;

    bool operator==(const ConstOperand&) const = default;
};

/// Copyable owning pointer, used to make the expression tree a value type.
template <typename T>
class Box {
public:
    Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
    Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
    Box(Box&&) noexcept = default;
    Box& operator=(const Box& other) {
        if (this != &other) {
            ptr_ = std::make_unique<T>(*other.ptr_);
        }
        return *this;
    }
    Box& operator=(Box&&) noexcept = default;

    const T& operator*() const { return *ptr_; }
    const T* operator->() const { return ptr_.get(); }

    bool operator==(const Box& other) const { return *ptr_ == *other.ptr_; }

private:
    std::unique_ptr<T> ptr_;
};

struct Expr;

struct ConstExpr {
    ConstOperand value;
    bool operator==(const ConstExpr&) const = default;
};

struct RdTmpExpr {
    TempOperand tmp;
    bool operator==(const RdTmpExpr&) const = default;
};

struct GetRegExpr {
    RegOperand reg;
    bool operator==(const GetRegExpr&) const = default;
};

struct OpExpr {
    std::string opcode;
    std::vector<Expr> args;
    bool operator==(const OpExpr& other) const;
};

struct LoadExpr {
    unsigned width = 64;
    Box<Expr> addr;
    bool operator==(const LoadExpr& other) const;
};

struct Expr {
    using Node = std::variant<ConstExpr, RdTmpExpr, GetRegExpr, OpExpr, LoadExpr>;
    Node node;

    static Expr constant(std::uint64_t value, unsigned width) { return {ConstExpr{{value & width_mask(width), width}}}; }
    static Expr rdtmp(TempOperand tmp) { return {RdTmpExpr{tmp}}; }
    static Expr get(RegOperand reg) { return {GetRegExpr{std::move(reg)}}; }
    static Expr op(std::string opcode, std::vector<Expr> args) { return {OpExpr{std::move(opcode), std::move(args)}}; }
    static Expr load(unsigned width, Expr addr) { return {LoadExpr{width, Box<Expr>(std::move(addr))}}; }

    bool operator==(const Expr&) const = default;
};

inline bool OpExpr::operator==(const OpExpr& other) const {
    return opcode == other.opcode && args == other.args;
}

inline bool LoadExpr::operator==(const LoadExpr& other) const {
    return width == other.width && addr == other.addr;
}

struct WrTmp {
    TempOperand dst;
    Expr rhs;
    bool operator==(const WrTmp&) const = default;
};

struct PutReg {
    RegOperand dst;
    Expr rhs;
    bool operator==(const PutReg&) const = default;
};

struct Store {
    Expr addr;
    Expr data;
    bool operator==(const Store&) const = default;
};

struct Exit {
    Expr guard;
    Address target = 0;
    bool operator==(const Exit&) const = default;
};

struct IMark {
    Address addr = 0;
    unsigned len = 0;
    bool operator==(const IMark&) const = default;
};

/// Instruction the lifter does not model, kept as a single labeled node.
struct Opaque {
    std::string mnemonic;
    bool operator==(const Opaque&) const = default;
};

using Stmt = std::variant<WrTmp, PutReg, Store, Exit, IMark, Opaque>;

enum class EdgeKind { fallthrough, jump, branch_taken, call, ret };

inline std::string_view edge_kind_name(EdgeKind kind) {
    switch (kind) {
    case EdgeKind::fallthrough: return "fallthrough";
    case EdgeKind::jump: return "jump";
    case EdgeKind::branch_taken: return "branch_taken";
    case EdgeKind::call: return "call";
    case EdgeKind::ret: return "return";
    }
    return "fallthrough";
}

inline std::optional<EdgeKind> parse_edge_kind(std::string_view name) {
    for (EdgeKind kind : {EdgeKind::fallthrough, EdgeKind::jump, EdgeKind::branch_taken, EdgeKind::call, EdgeKind::ret}) {
        if (edge_kind_name(kind) == name) {
            return kind;
        }
    }
    return std::nullopt;
}

struct Successor {
    Address target = 0;
    EdgeKind kind = EdgeKind::fallthrough;
    bool operator==(const Successor&) const = default;
};

struct BasicBlock {
    Address addr = 0;
    std::vector<Stmt> stmts;
    std::vector<Successor> successors;

    bool operator==(const BasicBlock&) const = default;
};

// ---------------------------------------------------------------------------
// Registers

/// Width of a known x86-64 general purpose register (or the `rip`/`rflags`
/// pseudo registers), empty otherwise.
inline std::optional<unsigned> register_width(std::string_view name) {
    static const std::map<std::string, unsigned, std::less<>> table = [] {
        std::map<std::string, unsigned, std::less<>> t;
        const char* r64[] = {"rax", "rcx", "rdx", "rbx", "rsp", "rbp", "rsi", "rdi"};
        const char* r32[] = {"eax", "ecx", "edx", "ebx", "esp", "ebp", "esi", "edi"};
        const char* r16[] = {"ax", "cx", "dx", "bx", "sp", "bp", "si", "di"};
        const char* r8[] = {"al", "cl", "dl", "bl", "spl", "bpl", "sil", "dil", "ah", "ch", "dh", "bh"};
        for (auto* n : r64) t[n] = 64;
        for (auto* n : r32) t[n] = 32;
        for (auto* n : r16) t[n] = 16;
        for (auto* n : r8) t[n] = 8;
        for (int i = 8; i < 16; ++i) {
            std::string base = "r" + std::to_string(i);
            t[base] = 64;
            t[base + "d"] = 32;
            t[base + "w"] = 16;
            t[base + "b"] = 8;
        }
        t["rip"] = 64;
        t["rflags"] = 64;
        return t;
    }();
    auto it = table.find(name);
    if (it == table.end()) {
        return std::nullopt;
    }
    return it->second;
}

inline RegOperand reg(std::string name, unsigned width) {
    return RegOperand{std::move(name), width, std::nullopt};
}

// ---------------------------------------------------------------------------
// Opcodes

struct Signature {
    unsigned arity = 0;
    std::vector<unsigned> arg_widths;
    unsigned result_width = 0;

    bool operator==(const Signature&) const = default;
};

namespace detail {

inline const std::map<std::string, Signature, std::less<>>& opcode_table() {
    static const std::map<std::string, Signature, std::less<>> table = [] {
        std::map<std::string, Signature, std::less<>> t;
        constexpr std::array<unsigned, 4> widths{8, 16, 32, 64};
        for (unsigned w : widths) {
            auto ws = std::to_string(w);
            for (const char* name : {"Add", "Sub", "And", "Or", "Xor", "Mul"}) {
                t[name + ws] = {2, {w, w}, w};
            }
            for (const char* name : {"Shl", "Shr", "Sar"}) {
                t[name + ws] = {2, {w, 8}, w};
            }
            t["CmpEQ" + ws] = {2, {w, w}, 1};
            t["CmpNE" + ws] = {2, {w, w}, 1};
            for (const char* name : {"CmpLT", "CmpLE"}) {
                t[name + ws + "S"] = {2, {w, w}, 1};
                t[name + ws + "U"] = {2, {w, w}, 1};
            }
            t["Not" + ws] = {1, {w}, w};
            t["Neg" + ws] = {1, {w}, w};
            t["1Uto" + ws] = {1, {1}, w};
        }
        for (unsigned from : widths) {
            for (unsigned to : widths) {
                auto f = std::to_string(from);
                auto s = std::to_string(to);
                if (from < to) {
                    t[f + "Uto" + s] = {1, {from}, to};
                    t[f + "Sto" + s] = {1, {from}, to};
                } else if (from > to) {
                    t[f + "to" + s] = {1, {from}, to};
                }
            }
        }
        return t;
    }();
    return table;
}

}

/// Fixed signature of a supported opcode. Throws SignatureError otherwise.
inline const Signature& opcode_signature(std::string_view opcode) {
    const auto& table = detail::opcode_table();
    auto it = table.find(opcode);
    if (it == table.end()) {
        throw SignatureError(std::string(opcode));
    }
    return it->second;
}

inline bool is_known_opcode(std::string_view opcode) {
    return detail::opcode_table().count(opcode) != 0;
}

inline std::vector<std::string> known_opcodes() {
    std::vector<std::string> out;
    for (const auto& [name, sig] : detail::opcode_table()) {
        out.push_back(name);
    }
    return out;
}

/// Bit width of the value an expression produces.
inline unsigned width_of(const Expr& expr) {
    return std::visit(
        [](const auto& e) -> unsigned {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ConstExpr>) {
                return e.value.width;
            } else if constexpr (std::is_same_v<T, RdTmpExpr>) {
                return e.tmp.width;
            } else if constexpr (std::is_same_v<T, GetRegExpr>) {
                return e.reg.width;
            } else if constexpr (std::is_same_v<T, OpExpr>) {
                return opcode_signature(e.opcode).result_width;
            } else {
                return e.width;
            }
        },
        expr.node);
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string render(const RegOperand& r) {
    if (r.ssa_index) {
        return r.name + "_" + std::to_string(*r.ssa_index);
    }
    return r.name;
}

inline std::string render(const TempOperand& t) { return "t" + std::to_string(t.id); }

inline std::string render(const ConstOperand& c) { return to_hex(c.value); }

inline std::string render(const Expr& expr) {
    return std::visit(
        [](const auto& e) -> std::string {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ConstExpr>) {
                return render(e.value);
            } else if constexpr (std::is_same_v<T, RdTmpExpr>) {
                return render(e.tmp);
            } else if constexpr (std::is_same_v<T, GetRegExpr>) {
                return render(e.reg);
            } else if constexpr (std::is_same_v<T, OpExpr>) {
                std::string out = e.opcode + "(";
                for (std::size_t i = 0; i < e.args.size(); ++i) {
                    if (i) out += ",";
                    out += render(e.args[i]);
                }
                return out + ")";
            } else {
                return "Load" + std::to_string(e.width) + "(" + render(*e.addr) + ")";
            }
        },
        expr.node);
}

inline std::string render(const Stmt& stmt) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, WrTmp>) {
                return render(s.dst) + " = " + render(s.rhs);
            } else if constexpr (std::is_same_v<T, PutReg>) {
                return render(s.dst) + " = " + render(s.rhs);
            } else if constexpr (std::is_same_v<T, Store>) {
                return "Store" + std::to_string(width_of(s.data)) + "(" + render(s.addr) + ") = " + render(s.data);
            } else if constexpr (std::is_same_v<T, Exit>) {
                return "if (" + render(s.guard) + ") goto " + to_hex(s.target);
            } else if constexpr (std::is_same_v<T, IMark>) {
                return "IMark(" + to_hex(s.addr) + ", " + std::to_string(s.len) + ")";
            } else {
                return "Opaque(" + s.mnemonic + ")";
            }
        },
        stmt);
}

}

#endif
