#ifndef BIN2VEC_X86_DECODER_HPP
#define BIN2VEC_X86_DECODER_HPP

// Table-driven x86-64 instruction decoder.
//
// Lengths are decoded for the legacy one-byte, 0F, 0F38, 0F3A and VEX maps so
// that disassembly stays in sync across instructions we do not lift. Operands
// are materialized for every ModRM/immediate form; mnemonics are precise for
// the integer subset and approximate (map + opcode) for the rest.

#include "bin2vec/ir.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bin2vec::x86 {

struct Memory {
    std::string base;   // empty when absent
    std::string index;  // empty when absent
    unsigned scale = 1;
    std::int64_t disp = 0;
    bool rip_relative = false;
    std::uint64_t absolute = 0;  // resolved target for rip-relative operands
};

struct Operand {
    enum class Kind { reg, mem, imm };
    Kind kind = Kind::reg;
    unsigned width = 64;
    std::string reg;
    Memory mem;
    std::int64_t imm = 0;
};

enum class Flow { none, jump, cond_jump, call, ret, halt, indirect_jump, indirect_call };

struct Instruction {
    ir::Address addr = 0;
    unsigned length = 0;
    std::string mnemonic;
    std::vector<Operand> operands;
    Flow flow = Flow::none;
    std::optional<ir::Address> target;
    int cond = -1;          // condition code 0..15 for jcc/setcc/cmovcc
    unsigned opsize = 32;   // effective operand size of the main operation
    std::uint8_t opcode = 0;
    int map = 1;            // 1 = one-byte, 2 = 0F, 3 = 0F38, 4 = 0F3A, 5 = VEX
    int group_reg = -1;     // ModRM.reg when it selects the operation
};

inline constexpr std::array<const char*, 16> condition_names = {
    "o", "no", "b", "ae", "e", "ne", "be", "a", "s", "ns", "p", "np", "l", "ge", "le", "g"};

inline std::string register_name(unsigned num, unsigned width, bool rex) {
    static constexpr std::array<const char*, 16> r64 = {"rax", "rcx", "rdx", "rbx", "rsp", "rbp", "rsi", "rdi",
                                                        "r8",  "r9",  "r10", "r11", "r12", "r13", "r14", "r15"};
    static constexpr std::array<const char*, 8> r32 = {"eax", "ecx", "edx", "ebx", "esp", "ebp", "esi", "edi"};
    static constexpr std::array<const char*, 8> r16 = {"ax", "cx", "dx", "bx", "sp", "bp", "si", "di"};
    static constexpr std::array<const char*, 8> r8rex = {"al", "cl", "dl", "bl", "spl", "bpl", "sil", "dil"};
    static constexpr std::array<const char*, 8> r8legacy = {"al", "cl", "dl", "bl", "ah", "ch", "dh", "bh"};
    num &= 15;
    switch (width) {
    case 64: return r64[num];
    case 32: return num < 8 ? r32[num] : std::string(r64[num]) + "d";
    case 16: return num < 8 ? r16[num] : std::string(r64[num]) + "w";
    default:
        if (num >= 8) return std::string(r64[num]) + "b";
        return rex ? r8rex[num] : r8legacy[num];
    }
}

namespace detail {

enum : std::uint8_t {
    kModrm = 1,
    kImm8 = 2,
    kImmZ = 4,     // 16 or 32 bits depending on operand size
    kImm16 = 8,
    kRel8 = 16,
    kRel32 = 32,
    kInvalid = 64,
    kMoffs = 128,
};

inline const std::array<std::uint8_t, 256>& one_byte_table() {
    static const std::array<std::uint8_t, 256> table = [] {
        std::array<std::uint8_t, 256> t{};
        for (int base = 0; base < 0x40; base += 8) {
            t[base + 0] = t[base + 1] = t[base + 2] = t[base + 3] = kModrm;
            t[base + 4] = kImm8;
            t[base + 5] = kImmZ;
        }
        for (int op : {0x06, 0x07, 0x0e, 0x16, 0x17, 0x1e, 0x1f, 0x27, 0x2f, 0x37, 0x3f, 0x60, 0x61, 0x62, 0x82, 0x9a,
                       0xce, 0xd4, 0xd5, 0xd6, 0xea}) {
            t[op] = kInvalid;
        }
        t[0x63] = kModrm;
        t[0x68] = kImmZ;
        t[0x69] = kModrm | kImmZ;
        t[0x6a] = kImm8;
        t[0x6b] = kModrm | kImm8;
        for (int op = 0x70; op <= 0x7f; ++op) t[op] = kRel8;
        t[0x80] = kModrm | kImm8;
        t[0x81] = kModrm | kImmZ;
        t[0x83] = kModrm | kImm8;
        for (int op = 0x84; op <= 0x8f; ++op) t[op] = kModrm;
        for (int op = 0xa0; op <= 0xa3; ++op) t[op] = kMoffs;
        t[0xa8] = kImm8;
        t[0xa9] = kImmZ;
        for (int op = 0xb0; op <= 0xb7; ++op) t[op] = kImm8;
        for (int op = 0xb8; op <= 0xbf; ++op) t[op] = kImmZ;  // imm64 under REX.W, handled specially
        t[0xc0] = t[0xc1] = kModrm | kImm8;
        t[0xc2] = kImm16;
        t[0xc6] = kModrm | kImm8;
        t[0xc7] = kModrm | kImmZ;
        t[0xc8] = kImm16 | kImm8;
        t[0xca] = kImm16;
        t[0xcd] = kImm8;
        for (int op = 0xd0; op <= 0xd3; ++op) t[op] = kModrm;
        for (int op = 0xd8; op <= 0xdf; ++op) t[op] = kModrm;
        for (int op = 0xe0; op <= 0xe3; ++op) t[op] = kRel8;
        for (int op = 0xe4; op <= 0xe7; ++op) t[op] = kImm8;
        t[0xe8] = t[0xe9] = kRel32;
        t[0xeb] = kRel8;
        t[0xf6] = t[0xf7] = kModrm;  // immediate depends on ModRM.reg
        t[0xfe] = t[0xff] = kModrm;
        return t;
    }();
    return table;
}

inline bool map2_has_modrm(std::uint8_t op) {
    switch (op) {
    case 0x05: case 0x06: case 0x07: case 0x08: case 0x09: case 0x0b: case 0x0e:
    case 0x30: case 0x31: case 0x32: case 0x33: case 0x34: case 0x35: case 0x37:
    case 0x77: case 0xa0: case 0xa1: case 0xa2: case 0xa8: case 0xa9: case 0xaa:
        return false;
    default:
        break;
    }
    if (op >= 0x80 && op <= 0x8f) return false;
    if (op >= 0xc8 && op <= 0xcf) return false;
    return true;
}

inline bool map2_has_imm8(std::uint8_t op) {
    return (op >= 0x70 && op <= 0x73) || op == 0xa4 || op == 0xac || op == 0xba || op == 0xc2 || op == 0xc4 ||
           op == 0xc5 || op == 0xc6;
}

inline bool map2_invalid(std::uint8_t op) {
    return op == 0x04 || op == 0x0a || op == 0x0c || op == 0x0f || (op >= 0x24 && op <= 0x27) || op == 0x36 ||
           op == 0x39 || (op >= 0x3b && op <= 0x3f) || op == 0x7a || op == 0x7b || op == 0xa6 || op == 0xa7;
}

inline std::string hex2(std::uint8_t b) {
    static constexpr char digits[] = "0123456789abcdef";
    return {digits[b >> 4], digits[b & 15]};
}

inline std::string sse_name(std::uint8_t op, char prefix) {
    // prefix: 0 = none, 'p' = 66, 's' = F3, 'd' = F2
    auto suffix = [&](const char* base) {
        std::string s = base;
        switch (prefix) {
        case 'p': return s + "pd";
        case 's': return s + "ss";
        case 'd': return s + "sd";
        default: return s + "ps";
        }
    };
    switch (op) {
    case 0x10: case 0x11: return prefix == 'p' ? "movupd" : prefix == 's' ? "movss" : prefix == 'd' ? "movsd" : "movups";
    case 0x28: case 0x29: return prefix == 'p' ? "movapd" : "movaps";
    case 0x2a: return prefix == 'd' ? "cvtsi2sd" : prefix == 's' ? "cvtsi2ss" : "cvtpi2ps";
    case 0x2c: return prefix == 'd' ? "cvttsd2si" : prefix == 's' ? "cvttss2si" : "cvttps2pi";
    case 0x2d: return prefix == 'd' ? "cvtsd2si" : prefix == 's' ? "cvtss2si" : "cvtps2pi";
    case 0x2e: return prefix == 'p' ? "ucomisd" : "ucomiss";
    case 0x2f: return prefix == 'p' ? "comisd" : "comiss";
    case 0x51: return suffix("sqrt");
    case 0x54: return prefix == 'p' ? "andpd" : "andps";
    case 0x57: return prefix == 'p' ? "xorpd" : "xorps";
    case 0x58: return suffix("add");
    case 0x59: return suffix("mul");
    case 0x5a: return prefix == 'd' ? "cvtsd2ss" : prefix == 's' ? "cvtss2sd" : "cvtps2pd";
    case 0x5c: return suffix("sub");
    case 0x5d: return suffix("min");
    case 0x5e: return suffix("div");
    case 0x5f: return suffix("max");
    case 0x6e: return "movd";
    case 0x6f: return prefix == 's' ? "movdqu" : prefix == 'p' ? "movdqa" : "movq";
    case 0x7e: return prefix == 's' ? "movq" : "movd";
    case 0x7f: return prefix == 's' ? "movdqu" : prefix == 'p' ? "movdqa" : "movq";
    case 0xd6: return "movq";
    case 0xef: return "pxor";
    default: return "";
    }
}

}

/// Decodes one instruction at `addr` from `code` (bytes starting at `addr`).
/// Returns nothing for invalid or truncated encodings.
inline std::string x87_name(std::uint8_t opcode, int mod, int reg, int rm) {
    static const char* arith[8] = {"fadd", "fmul", "fcom", "fcomp", "fsub", "fsubr", "fdiv", "fdivr"};
    static const char* d9_e0[32] = {"fchs",   "fabs",    "x87",    "x87",     "ftst",   "fxam",    "x87",   "x87",
                                    "fld1",   "fldl2t",  "fldl2e", "fldpi",   "fldlg2", "fldln2",  "fldz",  "x87",
                                    "f2xm1",  "fyl2x",   "fptan",  "fpatan",  "fxtract", "fprem1", "fdecstp", "fincstp",
                                    "fprem",  "fyl2xp1", "fsqrt",  "fsincos", "frndint", "fscale", "fsin",  "fcos"};
    static const char* d9_mem[8] = {"fld", "x87", "fst", "fstp", "fldenv", "fldcw", "fnstenv", "fnstcw"};
    static const char* dd_mem[8] = {"fld", "fisttp", "fst", "fstp", "frstor", "x87", "fnsave", "fnstsw"};
    static const char* db_mem[8] = {"fild", "fisttp", "fist", "fistp", "x87", "fld", "x87", "fstp"};
    static const char* df_mem[8] = {"fild", "fisttp", "fist", "fistp", "fbld", "fild", "fbstp", "fistp"};
    switch (opcode) {
    case 0xd8: return arith[reg];
    case 0xdc: return arith[reg];
    case 0xda: return mod == 3 ? "fcmov" : std::string("fi") + (arith[reg] + 1);
    case 0xde: return mod == 3 ? std::string(arith[reg]) + "p" : std::string("fi") + (arith[reg] + 1);
    case 0xd9:
        if (mod != 3) return d9_mem[reg];
        if (reg == 0) return "fld";
        if (reg == 1) return "fxch";
        if (reg == 2) return "fnop";
        if (reg >= 4) return d9_e0[(reg - 4) * 8 + rm];
        return "x87";
    case 0xdb:
        if (mod != 3) return db_mem[reg];
        return reg == 5 ? "fucomi" : reg == 6 ? "fcomi" : "fcmov";
    case 0xdd:
        if (mod != 3) return dd_mem[reg];
        return reg == 0 ? "ffree" : reg == 2 ? "fst" : reg == 3 ? "fstp" : reg == 4 ? "fucom" : reg == 5 ? "fucomp" : "x87";
    case 0xdf:
        if (mod != 3) return df_mem[reg];
        return reg == 4 ? "fnstsw" : reg == 5 ? "fucomip" : reg == 6 ? "fcomip" : "x87";
    }
    return "x87";
}

inline std::optional<Instruction> decode(std::span<const std::uint8_t> code, ir::Address addr) {
    using namespace detail;
    std::size_t pos = 0;
    auto peek = [&](std::size_t i) -> std::optional<std::uint8_t> {
        if (pos + i >= code.size()) return std::nullopt;
        return code[pos + i];
    };

    bool opsize16 = false;
    bool addrsize32 = false;
    bool rep = false;     // F3
    bool repne = false;   // F2
    bool lock = false;
    std::uint8_t rex = 0;
    int last_mandatory = 0;  // last of 66/F2/F3 seen, for SSE selection

    for (int count = 0;; ++count) {
        auto b = peek(0);
        if (!b || count > 14) return std::nullopt;
        std::uint8_t v = *b;
        if (v == 0x66) { opsize16 = true; last_mandatory = 0x66; }
        else if (v == 0x67) addrsize32 = true;
        else if (v == 0xf3) { rep = true; last_mandatory = 0xf3; }
        else if (v == 0xf2) { repne = true; last_mandatory = 0xf2; }
        else if (v == 0xf0) lock = true;
        else if (v == 0x2e || v == 0x36 || v == 0x3e || v == 0x26 || v == 0x64 || v == 0x65) {}
        else break;
        rex = 0;
        ++pos;
    }
    if (auto b = peek(0); b && (*b & 0xf0) == 0x40) {
        rex = *b;
        ++pos;
    }
    bool rex_w = rex & 8, rex_r = rex & 4, rex_x = rex & 2, rex_b = rex & 1;

    Instruction ins;
    ins.addr = addr;

    auto op_b = peek(0);
    if (!op_b) return std::nullopt;
    std::uint8_t opcode = *op_b;
    ++pos;

    int map = 1;
    bool has_modrm = false;
    unsigned imm_bytes = 0;
    unsigned imm2_bytes = 0;
    unsigned rel_bytes = 0;
    bool moffs = false;
    bool vex = false;

    if (opcode == 0x0f) {
        auto b = peek(0);
        if (!b) return std::nullopt;
        opcode = *b;
        ++pos;
        if (opcode == 0x38 || opcode == 0x3a) {
            map = opcode == 0x38 ? 3 : 4;
            auto b3 = peek(0);
            if (!b3) return std::nullopt;
            opcode = *b3;
            ++pos;
            has_modrm = true;
            imm_bytes = map == 4 ? 1 : 0;
        } else {
            map = 2;
            if (map2_invalid(opcode)) return std::nullopt;
            has_modrm = map2_has_modrm(opcode);
            if (map2_has_imm8(opcode)) imm_bytes = 1;
            if (opcode >= 0x80 && opcode <= 0x8f) rel_bytes = 4;
        }
    } else if (opcode == 0xc4 || opcode == 0xc5) {
        vex = true;
        map = 5;
        int vex_map = 1;
        if (opcode == 0xc5) {
            auto b1 = peek(0);
            if (!b1) return std::nullopt;
            rex_r = !(*b1 & 0x80);
            pos += 1;
        } else {
            auto b1 = peek(0);
            auto b2 = peek(1);
            if (!b1 || !b2) return std::nullopt;
            rex_r = !(*b1 & 0x80);
            rex_x = !(*b1 & 0x40);
            rex_b = !(*b1 & 0x20);
            vex_map = *b1 & 0x1f;
            rex_w = *b2 & 0x80;
            pos += 2;
        }
        auto b = peek(0);
        if (!b) return std::nullopt;
        opcode = *b;
        ++pos;
        has_modrm = !(vex_map == 1 && opcode == 0x77);
        imm_bytes = vex_map == 3 ? 1 : 0;
        if (vex_map == 1 && map2_has_imm8(opcode)) imm_bytes = 1;
    } else {
        std::uint8_t flags = one_byte_table()[opcode];
        if (flags & kInvalid) return std::nullopt;
        has_modrm = flags & kModrm;
        if (flags & kImm8) imm_bytes = 1;
        if (flags & kImmZ) imm_bytes = opsize16 ? 2 : 4;
        if (flags & kImm16) {
            if (imm_bytes) imm2_bytes = imm_bytes;
            imm_bytes = 2;
        }
        if (flags & kRel8) rel_bytes = 1;
        if (flags & kRel32) rel_bytes = 4;
        if (flags & kMoffs) moffs = true;
        if (opcode >= 0xb8 && opcode <= 0xbf && rex_w) imm_bytes = 8;
    }

    unsigned opsize = rex_w ? 64 : (opsize16 ? 16 : 32);
    ins.map = map;
    ins.opcode = opcode;
    ins.opsize = opsize;

    // ModRM / SIB / displacement
    int mod = 0, reg = 0, rm = 0;
    Operand rm_operand;
    if (has_modrm) {
        auto m = peek(0);
        if (!m) return std::nullopt;
        ++pos;
        mod = *m >> 6;
        reg = (*m >> 3) & 7;
        rm = *m & 7;
        if (mod == 3) {
            rm_operand.kind = Operand::Kind::reg;
            rm_operand.reg = std::to_string(rm + (rex_b ? 8 : 0));  // resolved to a name once width is known
        } else {
            rm_operand.kind = Operand::Kind::mem;
            unsigned aw = addrsize32 ? 32 : 64;
            Memory mem;
            unsigned disp_bytes = mod == 1 ? 1 : (mod == 2 ? 4 : 0);
            if (rm == 4) {
                auto s = peek(0);
                if (!s) return std::nullopt;
                ++pos;
                unsigned ss = *s >> 6;
                unsigned idx = ((*s >> 3) & 7) + (rex_x ? 8 : 0);
                unsigned base = (*s & 7) + (rex_b ? 8 : 0);
                if (idx != 4) {
                    mem.index = register_name(idx, aw, true);
                    mem.scale = 1u << ss;
                }
                if ((base & 7) == 5 && mod == 0) {
                    disp_bytes = 4;
                } else {
                    mem.base = register_name(base, aw, true);
                }
            } else if (rm == 5 && mod == 0) {
                mem.rip_relative = true;
                disp_bytes = 4;
            } else {
                mem.base = register_name(rm + (rex_b ? 8 : 0), aw, true);
            }
            if (pos + disp_bytes > code.size()) return std::nullopt;
            std::int64_t disp = 0;
            if (disp_bytes == 1) {
                disp = static_cast<std::int8_t>(code[pos]);
            } else if (disp_bytes == 4) {
                std::int32_t d32;
                std::memcpy(&d32, code.data() + pos, 4);
                disp = d32;
            }
            pos += disp_bytes;
            mem.disp = disp;
            rm_operand.mem = mem;
        }
    }

    // F6/F7 test has an immediate
    if (map == 1 && (opcode == 0xf6 || opcode == 0xf7) && (reg == 0 || reg == 1)) {
        imm_bytes = opcode == 0xf6 ? 1 : (opsize16 ? 2 : 4);
    }
    if (moffs) {
        imm_bytes = addrsize32 ? 4 : 8;
    }

    auto read_le = [&](unsigned n, bool sign) -> std::optional<std::int64_t> {
        if (pos + n > code.size()) return std::nullopt;
        std::uint64_t v = 0;
        for (unsigned i = 0; i < n; ++i) v |= std::uint64_t{code[pos + i]} << (8 * i);
        pos += n;
        if (sign && n < 8) {
            std::uint64_t sign_bit = std::uint64_t{1} << (8 * n - 1);
            if (v & sign_bit) v |= ~((sign_bit << 1) - 1);
        }
        return static_cast<std::int64_t>(v);
    };

    std::int64_t imm = 0, imm2 = 0, rel = 0;
    if (imm_bytes) {
        auto v = read_le(imm_bytes, !(moffs));
        if (!v) return std::nullopt;
        imm = *v;
    }
    if (imm2_bytes) {
        auto v = read_le(imm2_bytes, false);
        if (!v) return std::nullopt;
        imm2 = *v;
    }
    if (rel_bytes) {
        auto v = read_le(rel_bytes, true);
        if (!v) return std::nullopt;
        rel = *v;
    }
    (void)imm2;
    (void)lock;
    ins.length = static_cast<unsigned>(pos);
    ir::Address next = addr + pos;
    if (rm_operand.kind == Operand::Kind::mem && rm_operand.mem.rip_relative) {
        rm_operand.mem.absolute = next + static_cast<std::uint64_t>(rm_operand.mem.disp);
    }

    auto gpr = [&](unsigned num, unsigned width) {
        Operand o;
        o.kind = Operand::Kind::reg;
        o.width = width;
        o.reg = register_name(num, width, rex != 0);
        return o;
    };
    auto rm_op = [&](unsigned width) {
        Operand o = rm_operand;
        o.width = width;
        if (o.kind == Operand::Kind::reg) {
            o.reg = register_name(static_cast<unsigned>(rm + (rex_b ? 8 : 0)), width, rex != 0);
        }
        return o;
    };
    auto reg_op = [&](unsigned width) { return gpr(static_cast<unsigned>(reg + (rex_r ? 8 : 0)), width); };
    auto imm_op = [&](std::int64_t value, unsigned width) {
        Operand o;
        o.kind = Operand::Kind::imm;
        o.width = width;
        o.imm = value;
        return o;
    };

    auto set = [&](std::string name) { ins.mnemonic = std::move(name); };

    if (vex) {
        set("vex." + hex2(opcode));
        return ins;
    }

    if (map == 1) {
        static constexpr std::array<const char*, 8> alu = {"add", "or", "adc", "sbb", "and", "sub", "xor", "cmp"};
        static constexpr std::array<const char*, 8> shifts = {"rol", "ror", "rcl", "rcr", "shl", "shr", "shl", "sar"};
        static constexpr std::array<const char*, 8> grp3 = {"test", "test", "not", "neg", "mul", "imul", "div", "idiv"};
        if (opcode < 0x40 && (opcode & 7) < 6) {
            set(alu[opcode >> 3]);
            unsigned w = (opcode & 1) ? opsize : 8;
            switch (opcode & 7) {
            case 0: case 1: ins.operands = {rm_op(w), reg_op(w)}; break;
            case 2: case 3: ins.operands = {reg_op(w), rm_op(w)}; break;
            case 4: ins.operands = {gpr(0, 8), imm_op(imm, 8)}; break;
            case 5: ins.operands = {gpr(0, opsize), imm_op(imm, opsize)}; break;
            }
            ins.opsize = w;
            return ins;
        }
        if (opcode >= 0x50 && opcode <= 0x57) {
            set("push");
            ins.operands = {gpr((opcode & 7) + (rex_b ? 8 : 0), opsize16 ? 16 : 64)};
            ins.opsize = opsize16 ? 16 : 64;
            return ins;
        }
        if (opcode >= 0x58 && opcode <= 0x5f) {
            set("pop");
            ins.operands = {gpr((opcode & 7) + (rex_b ? 8 : 0), opsize16 ? 16 : 64)};
            ins.opsize = opsize16 ? 16 : 64;
            return ins;
        }
        if (opcode >= 0x70 && opcode <= 0x7f) {
            ins.cond = opcode & 15;
            set(std::string("j") + condition_names[opcode & 15]);
            ins.flow = Flow::cond_jump;
            ins.target = next + static_cast<std::uint64_t>(rel);
            return ins;
        }
        if (opcode >= 0x91 && opcode <= 0x97) {
            set("xchg");
            ins.operands = {gpr((opcode & 7) + (rex_b ? 8 : 0), opsize), gpr(0, opsize)};
            return ins;
        }
        if (opcode >= 0xb0 && opcode <= 0xb7) {
            set("mov");
            ins.operands = {gpr((opcode & 7) + (rex_b ? 8 : 0), 8), imm_op(imm, 8)};
            ins.opsize = 8;
            return ins;
        }
        if (opcode >= 0xb8 && opcode <= 0xbf) {
            set("mov");
            ins.operands = {gpr((opcode & 7) + (rex_b ? 8 : 0), opsize), imm_op(imm, opsize)};
            return ins;
        }
        if (opcode >= 0xd8 && opcode <= 0xdf) {
            set(x87_name(opcode, mod, reg, rm));
            return ins;
        }
        switch (opcode) {
        case 0x63:
            set("movsxd");
            ins.operands = {reg_op(opsize), rm_op(32)};
            return ins;
        case 0x68:
            set("push");
            ins.operands = {imm_op(imm, 64)};
            ins.opsize = 64;
            return ins;
        case 0x6a:
            set("push");
            ins.operands = {imm_op(imm, 64)};
            ins.opsize = 64;
            return ins;
        case 0x69: case 0x6b:
            set("imul");
            ins.operands = {reg_op(opsize), rm_op(opsize), imm_op(imm, opsize)};
            return ins;
        case 0x80: case 0x81: case 0x83: {
            unsigned w = opcode == 0x80 ? 8 : opsize;
            set(alu[reg]);
            ins.group_reg = reg;
            ins.operands = {rm_op(w), imm_op(imm, w)};
            ins.opsize = w;
            return ins;
        }
        case 0x84: case 0x85: {
            unsigned w = opcode == 0x84 ? 8 : opsize;
            set("test");
            ins.operands = {rm_op(w), reg_op(w)};
            ins.opsize = w;
            return ins;
        }
        case 0x86: case 0x87: {
            unsigned w = opcode == 0x86 ? 8 : opsize;
            set("xchg");
            ins.operands = {rm_op(w), reg_op(w)};
            ins.opsize = w;
            return ins;
        }
        case 0x88: case 0x89: {
            unsigned w = opcode == 0x88 ? 8 : opsize;
            set("mov");
            ins.operands = {rm_op(w), reg_op(w)};
            ins.opsize = w;
            return ins;
        }
        case 0x8a: case 0x8b: {
            unsigned w = opcode == 0x8a ? 8 : opsize;
            set("mov");
            ins.operands = {reg_op(w), rm_op(w)};
            ins.opsize = w;
            return ins;
        }
        case 0x8c: case 0x8e:
            set("movseg");
            return ins;
        case 0x8d:
            set("lea");
            ins.operands = {reg_op(opsize), rm_op(opsize)};
            return ins;
        case 0x8f:
            set("pop");
            ins.operands = {rm_op(64)};
            ins.opsize = 64;
            return ins;
        case 0x90:
            set(rep ? "pause" : "nop");
            return ins;
        case 0x98:
            set(rex_w ? "cdqe" : (opsize16 ? "cbw" : "cwde"));
            return ins;
        case 0x99:
            set(rex_w ? "cqo" : (opsize16 ? "cwd" : "cdq"));
            return ins;
        case 0x9c: set("pushf"); return ins;
        case 0x9d: set("popf"); return ins;
        case 0x9e: set("sahf"); return ins;
        case 0x9f: set("lahf"); return ins;
        case 0xa0: case 0xa1: case 0xa2: case 0xa3: set("movabs"); return ins;
        case 0xa4: case 0xa5: set(rep ? "rep.movs" : "movs"); return ins;
        case 0xa6: case 0xa7: set(rep || repne ? "rep.cmps" : "cmps"); return ins;
        case 0xa8: case 0xa9: {
            unsigned w = opcode == 0xa8 ? 8 : opsize;
            set("test");
            ins.operands = {gpr(0, w), imm_op(imm, w)};
            ins.opsize = w;
            return ins;
        }
        case 0xaa: case 0xab: set(rep ? "rep.stos" : "stos"); return ins;
        case 0xac: case 0xad: set(rep ? "rep.lods" : "lods"); return ins;
        case 0xae: case 0xaf: set(rep || repne ? "rep.scas" : "scas"); return ins;
        case 0xc0: case 0xc1: case 0xd0: case 0xd1: case 0xd2: case 0xd3: {
            unsigned w = (opcode & 1) ? opsize : 8;
            set(shifts[reg]);
            ins.group_reg = reg;
            Operand count;
            if (opcode <= 0xc1) count = imm_op(imm & 0xff, 8);
            else if (opcode <= 0xd1) count = imm_op(1, 8);
            else count = gpr(1, 8);
            ins.operands = {rm_op(w), count};
            ins.opsize = w;
            return ins;
        }
        case 0xc2: case 0xc3:
            set("ret");
            ins.flow = Flow::ret;
            ins.opsize = 64;
            return ins;
        case 0xc6: case 0xc7: {
            unsigned w = opcode == 0xc6 ? 8 : opsize;
            set(reg == 0 ? "mov" : "xabort");
            ins.operands = {rm_op(w), imm_op(imm, w)};
            ins.opsize = w;
            return ins;
        }
        case 0xc8: set("enter"); return ins;
        case 0xc9: set("leave"); ins.opsize = 64; return ins;
        case 0xcc: set("int3"); return ins;
        case 0xcd: set("int"); return ins;
        case 0xe8:
            set("call");
            ins.flow = Flow::call;
            ins.target = next + static_cast<std::uint64_t>(rel);
            ins.opsize = 64;
            return ins;
        case 0xe9: case 0xeb:
            set("jmp");
            ins.flow = Flow::jump;
            ins.target = next + static_cast<std::uint64_t>(rel);
            return ins;
        case 0xe0: case 0xe1: case 0xe2: case 0xe3:
            set(opcode == 0xe3 ? "jrcxz" : "loop");
            ins.flow = Flow::cond_jump;
            ins.target = next + static_cast<std::uint64_t>(rel);
            return ins;
        case 0xf4:
            set("hlt");
            ins.flow = Flow::halt;
            return ins;
        case 0xf5: set("cmc"); return ins;
        case 0xf6: case 0xf7: {
            unsigned w = opcode == 0xf6 ? 8 : opsize;
            set(grp3[reg]);
            ins.group_reg = reg;
            ins.operands = {rm_op(w)};
            if (reg <= 1) ins.operands.push_back(imm_op(imm, w));
            ins.opsize = w;
            return ins;
        }
        case 0xf8: set("clc"); return ins;
        case 0xf9: set("stc"); return ins;
        case 0xfc: set("cld"); return ins;
        case 0xfd: set("std"); return ins;
        case 0xfe: case 0xff: {
            unsigned w = opcode == 0xfe ? 8 : opsize;
            ins.group_reg = reg;
            switch (reg) {
            case 0: set("inc"); ins.operands = {rm_op(w)}; ins.opsize = w; return ins;
            case 1: set("dec"); ins.operands = {rm_op(w)}; ins.opsize = w; return ins;
            case 2:
                if (opcode == 0xfe) return std::nullopt;
                set("call");
                ins.flow = Flow::indirect_call;
                ins.operands = {rm_op(64)};
                ins.opsize = 64;
                return ins;
            case 4:
                if (opcode == 0xfe) return std::nullopt;
                set("jmp");
                ins.flow = Flow::indirect_jump;
                ins.operands = {rm_op(64)};
                ins.opsize = 64;
                return ins;
            case 6:
                if (opcode == 0xfe) return std::nullopt;
                set("push");
                ins.operands = {rm_op(64)};
                ins.opsize = 64;
                return ins;
            case 3: set("callf"); ins.flow = Flow::indirect_call; return ins;
            case 5: set("jmpf"); ins.flow = Flow::indirect_jump; return ins;
            default: return std::nullopt;
            }
        }
        default:
            set("x86." + hex2(opcode));
            return ins;
        }
    }

    if (map == 2) {
        if (opcode >= 0x80 && opcode <= 0x8f) {
            ins.cond = opcode & 15;
            set(std::string("j") + condition_names[opcode & 15]);
            ins.flow = Flow::cond_jump;
            ins.target = next + static_cast<std::uint64_t>(rel);
            return ins;
        }
        if (opcode >= 0x90 && opcode <= 0x9f) {
            ins.cond = opcode & 15;
            set(std::string("set") + condition_names[opcode & 15]);
            ins.operands = {rm_op(8)};
            ins.opsize = 8;
            return ins;
        }
        if (opcode >= 0x40 && opcode <= 0x4f) {
            ins.cond = opcode & 15;
            set(std::string("cmov") + condition_names[opcode & 15]);
            ins.operands = {reg_op(opsize), rm_op(opsize)};
            return ins;
        }
        if (opcode >= 0xc8 && opcode <= 0xcf) {
            set("bswap");
            return ins;
        }
        switch (opcode) {
        case 0x05: set("syscall"); return ins;
        case 0x0b: set("ud2"); ins.flow = Flow::halt; return ins;
        case 0x1e:
            if (rep && mod == 3 && reg == 7 && (rm == 2 || rm == 3)) {
                set(rm == 2 ? "endbr64" : "endbr32");
                return ins;
            }
            set("nop");
            return ins;
        case 0x18: case 0x19: case 0x1a: case 0x1b: case 0x1c: case 0x1d: case 0x1f:
            set("nop");
            return ins;
        case 0x31: set("rdtsc"); return ins;
        case 0xa2: set("cpuid"); return ins;
        case 0xa3: case 0xab: case 0xb3: case 0xbb: case 0xba: set("bt"); return ins;
        case 0xaf:
            set("imul");
            ins.operands = {reg_op(opsize), rm_op(opsize)};
            return ins;
        case 0xb0: case 0xb1: set("cmpxchg"); return ins;
        case 0xb6: case 0xb7:
            set("movzx");
            ins.operands = {reg_op(opsize), rm_op(opcode == 0xb6 ? 8 : 16)};
            return ins;
        case 0xbe: case 0xbf:
            set("movsx");
            ins.operands = {reg_op(opsize), rm_op(opcode == 0xbe ? 8 : 16)};
            return ins;
        case 0xbc: set(rep ? "tzcnt" : "bsf"); return ins;
        case 0xbd: set(rep ? "lzcnt" : "bsr"); return ins;
        case 0xb8: set("popcnt"); return ins;
        case 0xc0: case 0xc1: set("xadd"); return ins;
        default: break;
        }
        char prefix = last_mandatory == 0x66 ? 'p' : last_mandatory == 0xf3 ? 's' : last_mandatory == 0xf2 ? 'd' : 0;
        std::string name = sse_name(opcode, prefix);
        set(name.empty() ? "x86.0f" + hex2(opcode) : name);
        return ins;
    }

    set(std::string(map == 3 ? "x86.0f38" : "x86.0f3a") + hex2(opcode));
    return ins;
}

}

#endif
