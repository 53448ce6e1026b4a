#ifndef BIN2VEC_LIFTER_HPP
#define BIN2VEC_LIFTER_HPP

// Lifts decoded x86-64 instructions into micro-IR statements.
//
// Output is flat in the VEX sense: operation arguments are temporaries or
// constants, register/memory reads land in fresh temporaries first. Condition
// flags are not modeled as a register; the most recent flag-setting operation
// in the block is remembered and a conditional branch turns it into an
// explicit 1-bit Cmp temporary.

#include "bin2vec/ir.hpp"
#include "bin2vec/x86_decoder.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bin2vec {

class BlockLifter {
public:
    /// Statements for one instruction, starting with its IMark.
    std::vector<ir::Stmt> lift(const x86::Instruction& ins) {
        out_.clear();
        addr_cache_.clear();
        out_.push_back(ir::IMark{ins.addr, ins.length});
        if (!lift_supported(ins)) {
            out_.resize(1);
            out_.push_back(ir::Opaque{ins.mnemonic});
            flags_.reset();
        }
        return std::move(out_);
    }

    /// Single-instruction entry point with a fresh block context.
    static std::vector<ir::Stmt> lift_instruction(const x86::Instruction& ins) {
        BlockLifter lifter;
        return lifter.lift(ins);
    }

private:
    struct FlagSource {
        ir::Expr lhs;
        ir::Expr rhs;
        unsigned width;
    };

    std::vector<ir::Stmt> out_;
    std::uint32_t next_temp_ = 0;
    std::optional<FlagSource> flags_;
    std::map<int, ir::Expr> addr_cache_;

    ir::Expr temp(ir::Expr rhs) {
        ir::TempOperand t{next_temp_++, ir::width_of(rhs)};
        out_.push_back(ir::WrTmp{t, std::move(rhs)});
        return ir::Expr::rdtmp(t);
    }

    ir::Expr op(const std::string& name, unsigned width, std::vector<ir::Expr> args) {
        return temp(ir::Expr::op(name + std::to_string(width), std::move(args)));
    }

    static ir::Expr constant(std::int64_t value, unsigned width) {
        return ir::Expr::constant(static_cast<std::uint64_t>(value), width);
    }

    static ir::RegOperand reg(const std::string& name) {
        return ir::reg(name, ir::register_width(name).value_or(64));
    }

    ir::Expr get(const std::string& name) { return temp(ir::Expr::get(reg(name))); }

    void put(const std::string& name, ir::Expr value) { out_.push_back(ir::PutReg{reg(name), std::move(value)}); }

    ir::Expr address(const x86::Memory& mem, int slot = 0) {
        if (auto it = addr_cache_.find(slot); it != addr_cache_.end()) {
            return it->second;
        }
        ir::Expr result = ir::Expr::constant(0, 64);
        if (mem.rip_relative) {
            result = ir::Expr::constant(mem.absolute, 64);
        } else {
            std::optional<ir::Expr> acc;
            if (!mem.base.empty()) {
                acc = get64(mem.base);
            }
            if (!mem.index.empty()) {
                ir::Expr idx = get64(mem.index);
                if (mem.scale > 1) {
                    unsigned shift = mem.scale == 2 ? 1 : mem.scale == 4 ? 2 : 3;
                    idx = op("Shl", 64, {idx, constant(shift, 8)});
                }
                acc = acc ? op("Add", 64, {*acc, idx}) : idx;
            }
            if (!acc) {
                result = constant(mem.disp, 64);
            } else if (mem.disp != 0) {
                result = op("Add", 64, {*acc, constant(mem.disp, 64)});
            } else {
                result = *acc;
            }
        }
        addr_cache_.emplace(slot, result);
        return result;
    }

    // 32-bit address registers (0x67 prefix) are widened so addresses stay 64-bit.
    ir::Expr get64(const std::string& name) {
        ir::Expr value = get(name);
        unsigned w = ir::register_width(name).value_or(64);
        if (w != 64) {
            value = temp(ir::Expr::op(std::to_string(w) + "Uto64", {value}));
        }
        return value;
    }

    ir::Expr read(const x86::Operand& o) {
        switch (o.kind) {
        case x86::Operand::Kind::reg: return get(o.reg);
        case x86::Operand::Kind::imm: return constant(o.imm, o.width);
        case x86::Operand::Kind::mem: return temp(ir::Expr::load(o.width, address(o.mem)));
        }
        return constant(0, o.width);
    }

    void write(const x86::Operand& o, ir::Expr value) {
        if (o.kind == x86::Operand::Kind::reg) {
            put(o.reg, std::move(value));
        } else if (o.kind == x86::Operand::Kind::mem) {
            out_.push_back(ir::Store{address(o.mem), std::move(value)});
        }
    }

    ir::Expr resize(ir::Expr value, unsigned from, unsigned to, bool sign) {
        if (from == to) return value;
        std::string name = from < to ? std::to_string(from) + (sign ? "Sto" : "Uto") + std::to_string(to)
                                     : std::to_string(from) + "to" + std::to_string(to);
        return temp(ir::Expr::op(name, {std::move(value)}));
    }

    ir::Expr cmp(const char* name, unsigned w, const char* sign, ir::Expr a, ir::Expr b) {
        return temp(ir::Expr::op(std::string(name) + std::to_string(w) + sign, {std::move(a), std::move(b)}));
    }

    /// 1-bit guard for condition code `cc` from the tracked flag source.
    ir::Expr condition(int cc) {
        if (!flags_ || cc == 0 || cc == 1 || cc == 10 || cc == 11) {
            ir::Expr f = get("rflags");
            ir::Expr g = cmp("CmpNE", 64, "", f, ir::Expr::constant(0, 64));
            return g;
        }
        FlagSource fs = *flags_;
        unsigned w = fs.width;
        auto l = fs.lhs;
        auto r = fs.rhs;
        switch (cc) {
        case 2: return cmp("CmpLT", w, "U", l, r);
        case 3: return cmp("CmpLE", w, "U", r, l);
        case 4: return cmp("CmpEQ", w, "", l, r);
        case 5: return cmp("CmpNE", w, "", l, r);
        case 6: return cmp("CmpLE", w, "U", l, r);
        case 7: return cmp("CmpLT", w, "U", r, l);
        case 8:
        case 9: {
            ir::Expr zero = ir::Expr::constant(0, w);
            ir::Expr diff = (r == zero) ? l : op("Sub", w, {l, r});
            return cc == 8 ? cmp("CmpLT", w, "S", diff, zero) : cmp("CmpLE", w, "S", zero, diff);
        }
        case 12: return cmp("CmpLT", w, "S", l, r);
        case 13: return cmp("CmpLE", w, "S", r, l);
        case 14: return cmp("CmpLE", w, "S", l, r);
        case 15: return cmp("CmpLT", w, "S", r, l);
        default: break;
        }
        return cmp("CmpNE", 64, "", get("rflags"), ir::Expr::constant(0, 64));
    }

    void set_result_flags(const ir::Expr& result, unsigned w) { flags_ = FlagSource{result, ir::Expr::constant(0, w), w}; }

    void push_value(ir::Expr data) {
        ir::Expr sp = get("rsp");
        ir::Expr nsp = op("Sub", 64, {sp, constant(8, 64)});
        put("rsp", nsp);
        out_.push_back(ir::Store{nsp, std::move(data)});
    }

    ir::Expr pop_value(std::int64_t extra = 0) {
        ir::Expr sp = get("rsp");
        ir::Expr value = temp(ir::Expr::load(64, sp));
        ir::Expr nsp = op("Add", 64, {sp, constant(8 + extra, 64)});
        put("rsp", nsp);
        return value;
    }

    bool lift_supported(const x86::Instruction& ins) {
        const auto& m = ins.mnemonic;
        const auto& ops = ins.operands;
        unsigned w = ins.opsize;

        if (m == "nop" || m == "endbr64" || m == "endbr32" || m == "pause") {
            return true;
        }
        if (m == "mov" && ops.size() == 2) {
            ir::Expr value = read(ops[1]);
            write(ops[0], value);
            return true;
        }
        if (m == "lea" && ops.size() == 2 && ops[1].kind == x86::Operand::Kind::mem) {
            ir::Expr a = address(ops[1].mem);
            write(ops[0], resize(a, 64, ops[0].width, false));
            return true;
        }
        if ((m == "add" || m == "sub" || m == "and" || m == "or" || m == "xor" || m == "cmp" || m == "test") &&
            ops.size() == 2) {
            ir::Expr a = read(ops[0]);
            ir::Expr b = read(ops[1]);
            if (m == "cmp") {
                flags_ = FlagSource{a, b, w};
                return true;
            }
            static const std::map<std::string, std::string> names = {
                {"add", "Add"}, {"sub", "Sub"}, {"and", "And"}, {"or", "Or"}, {"xor", "Xor"}, {"test", "And"}};
            ir::Expr r = op(names.at(m), w, {a, b});
            if (m == "sub") {
                flags_ = FlagSource{a, b, w};
            } else {
                set_result_flags(r, w);
            }
            if (m != "test") {
                write(ops[0], r);
            }
            return true;
        }
        if ((m == "shl" || m == "shr" || m == "sar") && ops.size() == 2) {
            ir::Expr a = read(ops[0]);
            ir::Expr count = read(ops[1]);
            static const std::map<std::string, std::string> names = {{"shl", "Shl"}, {"shr", "Shr"}, {"sar", "Sar"}};
            ir::Expr r = op(names.at(m), w, {a, count});
            write(ops[0], r);
            set_result_flags(r, w);
            return true;
        }
        if (m == "imul" && (ops.size() == 2 || ops.size() == 3)) {
            ir::Expr a = read(ops[1]);
            ir::Expr b = ops.size() == 3 ? read(ops[2]) : read(ops[0]);
            ir::Expr r = ops.size() == 3 ? op("Mul", w, {a, b}) : op("Mul", w, {b, a});
            write(ops[0], r);
            set_result_flags(r, w);
            return true;
        }
        if ((m == "inc" || m == "dec") && ops.size() == 1) {
            ir::Expr a = read(ops[0]);
            ir::Expr r = op(m == "inc" ? "Add" : "Sub", w, {a, constant(1, w)});
            write(ops[0], r);
            set_result_flags(r, w);
            return true;
        }
        if ((m == "neg" || m == "not") && ops.size() == 1) {
            ir::Expr a = read(ops[0]);
            ir::Expr r = op(m == "neg" ? "Neg" : "Not", w, {a});
            write(ops[0], r);
            if (m == "neg") set_result_flags(r, w);
            return true;
        }
        if (m == "push" && ops.size() == 1) {
            if (ops[0].kind == x86::Operand::Kind::reg) {
                ir::Expr sp = get("rsp");
                ir::Expr nsp = op("Sub", 64, {sp, constant(8, 64)});
                put("rsp", nsp);
                out_.push_back(ir::Store{nsp, ir::Expr::get(reg(ops[0].reg))});
            } else {
                push_value(read(ops[0]));
            }
            return true;
        }
        if (m == "pop" && ops.size() == 1) {
            ir::Expr value = pop_value();
            write(ops[0], value);
            return true;
        }
        if (m == "leave") {
            ir::Expr bp = get("rbp");
            ir::Expr value = temp(ir::Expr::load(64, bp));
            put("rsp", op("Add", 64, {bp, constant(8, 64)}));
            put("rbp", value);
            return true;
        }
        if (ins.flow == x86::Flow::cond_jump && ins.cond >= 0 && ins.target) {
            ir::Expr guard = condition(ins.cond);
            out_.push_back(ir::Exit{guard, *ins.target});
            return true;
        }
        if (ins.flow == x86::Flow::jump) {
            return true;
        }
        if (ins.flow == x86::Flow::indirect_jump && ops.size() == 1) {
            put("rip", read(ops[0]));
            return true;
        }
        if (ins.flow == x86::Flow::call && ins.target) {
            push_value(constant(static_cast<std::int64_t>(ins.addr + ins.length), 64));
            flags_.reset();
            return true;
        }
        if (ins.flow == x86::Flow::indirect_call && ops.size() == 1) {
            ir::Expr target = read(ops[0]);
            push_value(constant(static_cast<std::int64_t>(ins.addr + ins.length), 64));
            put("rip", target);
            flags_.reset();
            return true;
        }
        if (m == "ret") {
            ir::Expr target = pop_value(ins.operands.empty() ? 0 : ins.operands[0].imm);
            put("rip", target);
            return true;
        }
        if ((m == "movzx" || m == "movsx" || m == "movsxd") && ops.size() == 2) {
            ir::Expr value = read(ops[1]);
            write(ops[0], resize(value, ops[1].width, ops[0].width, m != "movzx"));
            return true;
        }
        if (m == "cdqe" || m == "cwde") {
            bool q = m == "cdqe";
            ir::Expr value = get(q ? "eax" : "ax");
            put(q ? "rax" : "eax", resize(value, q ? 32 : 16, q ? 64 : 32, true));
            return true;
        }
        if (m == "cdq" || m == "cqo") {
            bool q = m == "cqo";
            unsigned width = q ? 64 : 32;
            ir::Expr value = get(q ? "rax" : "eax");
            put(q ? "rdx" : "edx", op("Sar", width, {value, constant(width - 1, 8)}));
            return true;
        }
        if (m.rfind("set", 0) == 0 && ins.cond >= 0 && ops.size() == 1) {
            ir::Expr guard = condition(ins.cond);
            write(ops[0], temp(ir::Expr::op("1Uto8", {guard})));
            return true;
        }
        if (m == "xchg" && ops.size() == 2) {
            ir::Expr a = read(ops[0]);
            ir::Expr b = read(ops[1]);
            write(ops[0], b);
            write(ops[1], a);
            return true;
        }
        return false;
    }
};

/// Lifts one instruction in isolation (temporaries numbered from t0).
inline std::vector<ir::Stmt> lift_instruction(const x86::Instruction& ins) {
    return BlockLifter::lift_instruction(ins);
}

}

#endif
