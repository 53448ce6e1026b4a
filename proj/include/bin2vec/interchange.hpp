#ifndef BIN2VEC_INTERCHANGE_HPP
#define BIN2VEC_INTERCHANGE_HPP

// `.b2v.jsonl` program dumps: one lifted program per line.
//
//   {"v":1,"binary_id":..,"arch":..,"label":..|null,"blocks":[
//      {"addr":"0x..","stmts":[..],"successors":["0x..",..],"kinds":[..]}]}
//
// Statements are structured objects. Register SSA subscripts are never
// stored. `kinds` is optional and parallel to `successors`; successors that
// name no block in the same line are external edges.

#include "bin2vec/cfg.hpp"
#include "bin2vec/error.hpp"
#include "bin2vec/ir.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace bin2vec {

struct ProgramDump {
    std::string binary_id;
    std::string arch = "x86_64";
    std::optional<std::string> label;
    Cfg cfg;
};

inline constexpr int dump_schema_version = 1;
inline constexpr const char* dump_extension = ".b2v.jsonl";

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson expr_to_json(const ir::Expr& expr) {
    return std::visit(
        [](const auto& e) -> ojson {
            using T = std::decay_t<decltype(e)>;
            ojson j;
            if constexpr (std::is_same_v<T, ir::ConstExpr>) {
                j["kind"] = "Const";
                j["value"] = ir::to_hex(e.value.value);
                j["width"] = e.value.width;
            } else if constexpr (std::is_same_v<T, ir::RdTmpExpr>) {
                j["kind"] = "RdTmp";
                j["tmp"] = ir::render(e.tmp);
            } else if constexpr (std::is_same_v<T, ir::GetRegExpr>) {
                j["kind"] = "GetReg";
                j["reg"] = e.reg.name;
                j["width"] = e.reg.width;
            } else if constexpr (std::is_same_v<T, ir::OpExpr>) {
                j["kind"] = "Op";
                j["op"] = e.opcode;
                j["args"] = ojson::array();
                for (const auto& a : e.args) j["args"].push_back(expr_to_json(a));
            } else {
                j["kind"] = "Load";
                j["width"] = e.width;
                j["addr"] = expr_to_json(*e.addr);
            }
            return j;
        },
        expr.node);
}

inline ojson stmt_to_json(const ir::Stmt& stmt) {
    return std::visit(
        [](const auto& s) -> ojson {
            using T = std::decay_t<decltype(s)>;
            ojson j;
            if constexpr (std::is_same_v<T, ir::WrTmp>) {
                j["kind"] = "WrTmp";
                j["tmp"] = ir::render(s.dst);
                j["expr"] = expr_to_json(s.rhs);
            } else if constexpr (std::is_same_v<T, ir::PutReg>) {
                j["kind"] = "PutReg";
                j["reg"] = s.dst.name;
                j["width"] = s.dst.width;
                j["expr"] = expr_to_json(s.rhs);
            } else if constexpr (std::is_same_v<T, ir::Store>) {
                j["kind"] = "Store";
                j["addr"] = expr_to_json(s.addr);
                j["data"] = expr_to_json(s.data);
            } else if constexpr (std::is_same_v<T, ir::Exit>) {
                j["kind"] = "Exit";
                j["guard"] = expr_to_json(s.guard);
                j["target"] = ir::to_hex(s.target);
            } else if constexpr (std::is_same_v<T, ir::IMark>) {
                j["kind"] = "IMark";
                j["addr"] = ir::to_hex(s.addr);
                j["len"] = s.len;
            } else {
                j["kind"] = "Opaque";
                j["mnemonic"] = s.mnemonic;
            }
            return j;
        },
        stmt);
}

/// Per-line decoding context: tracks block-local temporaries for SSA checks.
class LineReader {
public:
    explicit LineReader(std::size_t line) : line_(line) {}

    [[noreturn]] void fail(const std::string& key, const std::string& what) const { throw SchemaError(line_, key, what); }

    void expect_keys(const ojson& j, std::initializer_list<const char*> keys, const std::string& where) const {
        if (!j.is_object()) fail(where, "expected an object");
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& [k, v] : j.items()) {
            if (!allowed.count(k)) fail(k, "unknown key in " + where);
        }
        for (const char* k : keys) {
            if (!j.contains(k)) fail(k, "missing key in " + where);
        }
    }

    std::string str(const ojson& j, const char* key) const {
        const auto& v = j.at(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }

    std::uint64_t uint(const ojson& j, const char* key) const {
        const auto& v = j.at(key);
        if (!v.is_number_integer() || v.is_number_float()) fail(key, "expected a non-negative integer");
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        auto s = v.get<std::int64_t>();
        if (s < 0) fail(key, "expected a non-negative integer");
        return static_cast<std::uint64_t>(s);
    }

    ir::Address hex(const ojson& v, const char* key) const {
        if (!v.is_string()) fail(key, "expected a hex string");
        auto parsed = ir::parse_hex(v.get<std::string>());
        if (!parsed) fail(key, "expected lowercase 0x-prefixed hex, got '" + v.get<std::string>() + "'");
        return *parsed;
    }

    unsigned width(const ojson& j, const char* key, bool allow_bit = false) const {
        auto w = uint(j, key);
        if (!(ir::valid_width(static_cast<unsigned>(w)) || (allow_bit && w == 1)) || w > 64) {
            fail(key, "invalid width " + std::to_string(w));
        }
        return static_cast<unsigned>(w);
    }

    std::uint32_t temp_id(const ojson& j, const char* key) const {
        auto name = str(j, key);
        if (name.size() < 2 || name.size() > 11 || name[0] != 't' ||
            name.find_first_not_of("0123456789", 1) != std::string::npos || (name.size() > 2 && name[1] == '0')) {
            fail(key, "malformed temporary '" + name + "'");
        }
        auto id = std::stoull(name.substr(1));
        if (id > 0xffffffffull) fail(key, "temporary id out of range");
        return static_cast<std::uint32_t>(id);
    }

    std::string register_name(const ojson& j, const char* key) const {
        auto name = str(j, key);
        if (name.empty() || name.find_first_of(" \t\r\n(),=") != std::string::npos) {
            fail(key, "malformed register name '" + name + "'");
        }
        if (name.size() >= 2 && name[0] == 't' && name.find_first_not_of("0123456789", 1) == std::string::npos) {
            fail(key, "register name collides with temporary syntax");
        }
        if (ir::is_hex_literal(name)) {
            fail(key, "register name collides with constant syntax");
        }
        auto last = name.find_last_not_of("0123456789");
        if (last != std::string::npos && last + 1 < name.size() && name[last] == '_') {
            fail(key, "register name carries an SSA subscript");
        }
        return name;
    }

    ir::Expr expr(const ojson& j) {
        if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) fail("kind", "expression without kind");
        auto kind = j["kind"].get<std::string>();
        if (kind == "Const") {
            expect_keys(j, {"kind", "value", "width"}, "Const");
            unsigned w = width(j, "width", true);
            auto value = hex(j["value"], "value");
            if ((value & ~ir::width_mask(w)) != 0) fail("value", "constant does not fit in " + std::to_string(w) + " bits");
            return ir::Expr{ir::ConstExpr{{value, w}}};
        }
        if (kind == "RdTmp") {
            expect_keys(j, {"kind", "tmp"}, "RdTmp");
            auto id = temp_id(j, "tmp");
            auto it = temps_.find(id);
            if (it == temps_.end()) fail("tmp", "t" + std::to_string(id) + " read before it is written");
            return ir::Expr::rdtmp({id, it->second});
        }
        if (kind == "GetReg") {
            expect_keys(j, {"kind", "reg", "width"}, "GetReg");
            return ir::Expr::get(ir::reg(register_name(j, "reg"), width(j, "width")));
        }
        if (kind == "Op") {
            expect_keys(j, {"kind", "op", "args"}, "Op");
            auto name = str(j, "op");
            if (!ir::is_known_opcode(name)) fail("op", "unknown opcode '" + name + "'");
            const auto& sig = ir::opcode_signature(name);
            if (!j["args"].is_array()) fail("args", "expected an array");
            if (j["args"].size() != sig.arity) {
                fail("args", name + " expects " + std::to_string(sig.arity) + " arguments, got " + std::to_string(j["args"].size()));
            }
            std::vector<ir::Expr> args;
            for (std::size_t i = 0; i < sig.arity; ++i) {
                args.push_back(expr(j["args"][i]));
                if (ir::width_of(args.back()) != sig.arg_widths[i]) {
                    fail("args", name + " argument " + std::to_string(i) + " has width " +
                                     std::to_string(ir::width_of(args.back())) + ", expected " + std::to_string(sig.arg_widths[i]));
                }
            }
            return ir::Expr::op(name, std::move(args));
        }
        if (kind == "Load") {
            expect_keys(j, {"kind", "width", "addr"}, "Load");
            unsigned w = width(j, "width");
            auto addr = expr(j["addr"]);
            if (ir::width_of(addr) != 64) fail("addr", "load address must be 64-bit");
            return ir::Expr::load(w, std::move(addr));
        }
        fail("kind", "unknown expression kind '" + kind + "'");
    }

    ir::Stmt stmt(const ojson& j) {
        if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) fail("kind", "statement without kind");
        auto kind = j["kind"].get<std::string>();
        if (kind == "WrTmp") {
            expect_keys(j, {"kind", "tmp", "expr"}, "WrTmp");
            auto id = temp_id(j, "tmp");
            auto rhs = expr(j["expr"]);
            if (temps_.count(id)) fail("tmp", "t" + std::to_string(id) + " written twice in one block");
            unsigned w = ir::width_of(rhs);
            temps_[id] = w;
            return ir::WrTmp{{id, w}, std::move(rhs)};
        }
        if (kind == "PutReg") {
            expect_keys(j, {"kind", "reg", "width", "expr"}, "PutReg");
            auto r = ir::reg(register_name(j, "reg"), width(j, "width"));
            auto rhs = expr(j["expr"]);
            if (ir::width_of(rhs) != r.width) fail("expr", "value width does not match register width");
            return ir::PutReg{std::move(r), std::move(rhs)};
        }
        if (kind == "Store") {
            expect_keys(j, {"kind", "addr", "data"}, "Store");
            auto addr = expr(j["addr"]);
            if (ir::width_of(addr) != 64) fail("addr", "store address must be 64-bit");
            auto data = expr(j["data"]);
            if (!ir::valid_width(ir::width_of(data))) fail("data", "store data must be 8/16/32/64 bits");
            return ir::Store{std::move(addr), std::move(data)};
        }
        if (kind == "Exit") {
            expect_keys(j, {"kind", "guard", "target"}, "Exit");
            auto guard = expr(j["guard"]);
            if (ir::width_of(guard) != 1) fail("guard", "exit guard must be 1-bit");
            return ir::Exit{std::move(guard), hex(j["target"], "target")};
        }
        if (kind == "IMark") {
            expect_keys(j, {"kind", "addr", "len"}, "IMark");
            auto len = uint(j, "len");
            if (len > 15) fail("len", "instruction length out of range");
            return ir::IMark{hex(j["addr"], "addr"), static_cast<unsigned>(len)};
        }
        if (kind == "Opaque") {
            expect_keys(j, {"kind", "mnemonic"}, "Opaque");
            auto m = str(j, "mnemonic");
            if (m.empty() || m.find_first_of(" \t\r\n") != std::string::npos) fail("mnemonic", "malformed mnemonic");
            return ir::Opaque{m};
        }
        fail("kind", "unknown statement kind '" + kind + "'");
    }

    ProgramDump program(const ojson& j) {
        if (!j.is_object()) fail("", "line is not a JSON object");
        if (j.empty() || j.begin().key() != "v") fail("v", "schema version must be the first key");
        expect_keys(j, {"v", "binary_id", "arch", "label", "blocks"}, "program");
        if (uint(j, "v") != static_cast<std::uint64_t>(dump_schema_version)) fail("v", "unsupported schema version");
        ProgramDump out;
        out.binary_id = str(j, "binary_id");
        out.arch = str(j, "arch");
        if (!j["label"].is_null()) out.label = str(j, "label");
        if (!j["blocks"].is_array()) fail("blocks", "expected an array");
        for (const auto& b : j["blocks"]) {
            if (!b.is_object()) fail("blocks", "expected block objects");
            if (b.contains("kinds")) {
                expect_keys(b, {"addr", "stmts", "successors", "kinds"}, "block");
            } else {
                expect_keys(b, {"addr", "stmts", "successors"}, "block");
            }
            ir::BasicBlock block;
            block.addr = hex(b["addr"], "addr");
            if (out.cfg.blocks.count(block.addr)) fail("addr", "duplicate block " + ir::to_hex(block.addr));
            if (!out.cfg.blocks.empty() && block.addr < out.cfg.blocks.rbegin()->first) fail("addr", "blocks not sorted by address");
            temps_.clear();
            if (!b["stmts"].is_array()) fail("stmts", "expected an array");
            std::optional<ir::Address> last_mark;
            for (const auto& s : b["stmts"]) {
                block.stmts.push_back(stmt(s));
                if (auto* mark = std::get_if<ir::IMark>(&block.stmts.back())) {
                    if (last_mark && mark->addr <= *last_mark) fail("addr", "IMark addresses must increase within a block");
                    last_mark = mark->addr;
                }
            }
            if (!b["successors"].is_array()) fail("successors", "expected an array");
            const ojson* kinds = b.contains("kinds") ? &b["kinds"] : nullptr;
            if (kinds && (!kinds->is_array() || kinds->size() != b["successors"].size())) {
                fail("kinds", "must be an array parallel to successors");
            }
            for (std::size_t i = 0; i < b["successors"].size(); ++i) {
                ir::Successor s;
                s.target = hex(b["successors"][i], "successors");
                s.kind = ir::EdgeKind::jump;
                if (kinds) {
                    const auto& k = (*kinds)[i];
                    auto parsed = k.is_string() ? ir::parse_edge_kind(k.get<std::string>()) : std::nullopt;
                    if (!parsed) fail("kinds", "unknown edge kind");
                    s.kind = *parsed;
                }
                block.successors.push_back(s);
            }
            out.cfg.blocks.emplace(block.addr, std::move(block));
        }
        for (const auto& [addr, block] : out.cfg.blocks) {
            for (const auto& s : block.successors) {
                if (!out.cfg.has_block(s.target)) out.cfg.external.insert(s.target);
            }
        }
        return out;
    }

private:
    std::size_t line_;
    std::map<std::uint32_t, unsigned> temps_;
};

}

/// Canonical single-line encoding of one program (no trailing newline).
inline std::string dump_line(const ProgramDump& prog) {
    detail::ojson j;
    j["v"] = dump_schema_version;
    j["binary_id"] = prog.binary_id;
    j["arch"] = prog.arch;
    j["label"] = prog.label ? detail::ojson(*prog.label) : detail::ojson(nullptr);
    j["blocks"] = detail::ojson::array();
    for (const auto& [addr, block] : prog.cfg.blocks) {
        detail::ojson b;
        b["addr"] = ir::to_hex(addr);
        b["stmts"] = detail::ojson::array();
        for (const auto& s : block.stmts) b["stmts"].push_back(detail::stmt_to_json(s));
        b["successors"] = detail::ojson::array();
        b["kinds"] = detail::ojson::array();
        for (const auto& s : block.successors) {
            b["successors"].push_back(ir::to_hex(s.target));
            b["kinds"].push_back(std::string(ir::edge_kind_name(s.kind)));
        }
        j["blocks"].push_back(std::move(b));
    }
    return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::strict);
}

inline void write_dump(std::ostream& out, const std::vector<ProgramDump>& programs) {
    for (const auto& p : programs) {
        out << dump_line(p) << '\n';
    }
}

inline std::string write_dump(const std::vector<ProgramDump>& programs) {
    std::ostringstream out;
    write_dump(out, programs);
    return out.str();
}

inline ProgramDump parse_dump_line(const std::string& text, std::size_t line_number) {
    detail::ojson j;
    try {
        j = detail::ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(line_number, "", std::string("invalid JSON: ") + e.what());
    }
    detail::LineReader reader(line_number);
    return reader.program(j);
}

/// Reads every program in a JSONL stream. Empty lines are ignored.
inline std::vector<ProgramDump> read_dump(std::istream& in) {
    std::vector<ProgramDump> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        out.push_back(parse_dump_line(line, number));
    }
    return out;
}

inline std::vector<ProgramDump> read_dump(const std::string& text) {
    std::istringstream in(text);
    return read_dump(in);
}

inline std::vector<ProgramDump> read_dump_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return read_dump(in);
}

/// Every schema violation found, one message per offending line. Never throws.
inline std::vector<std::string> validate_dump(std::istream& in) {
    std::vector<std::string> violations;
    std::string line;
    std::size_t number = 0;
    std::size_t programs = 0;
    try {
        while (std::getline(in, line)) {
            ++number;
            if (line.empty()) continue;
            ++programs;
            try {
                parse_dump_line(line, number);
            } catch (const std::exception& e) {
                violations.emplace_back(e.what());
            }
        }
    } catch (const std::exception& e) {
        violations.emplace_back(std::string("stream error: ") + e.what());
    }
    if (programs == 0 && violations.empty()) {
        violations.emplace_back("dump contains no programs");
    }
    return violations;
}

inline std::vector<std::string> validate_dump(const std::string& text) {
    std::istringstream in(text);
    return validate_dump(in);
}

/// Structural equality over everything a dump carries.
inline bool same_structure(const ProgramDump& a, const ProgramDump& b) {
    return a.binary_id == b.binary_id && a.arch == b.arch && a.label == b.label && a.cfg.blocks == b.cfg.blocks;
}

}

#endif
