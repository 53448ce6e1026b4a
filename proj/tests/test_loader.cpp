#include "support.hpp"

#include "bin2vec/cfg.hpp"
#include "bin2vec/elf.hpp"
#include "bin2vec/lifter.hpp"
#include "bin2vec/x86_decoder.hpp"

#include <gtest/gtest.h>

#include <cstring>

using namespace bin2vec;

namespace {

std::vector<std::string> lift_bytes(std::vector<std::uint8_t> code) {
    auto ins = x86::decode(code, 0x1000);
    EXPECT_TRUE(ins.has_value());
    std::vector<std::string> out;
    for (const auto& s : lift_instruction(*ins)) out.push_back(ir::render(s));
    return out;
}

std::uint64_t header_entry(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t e = 0;
    std::memcpy(&e, bytes.data() + 24, 8);
    return e;
}

}

TEST(LoadElf, EntryMatchesHeaderField) {
    for (const auto& path : fixtures::binaries()) {
        auto bytes = read_file_bytes(path);
        auto bin = load_elf(bytes);
        EXPECT_EQ(bin.entry, header_entry(bytes)) << path;
        EXPECT_TRUE(bin.is_executable(bin.entry)) << path;
    }
}

TEST(LoadElf, RejectsMissingMagic) {
    std::vector<std::uint8_t> junk{'\x7f', 'E', 'L', 'G', 2, 1, 1, 0};
    junk.resize(128, 0);
    EXPECT_THROW(load_elf(junk), ParseError);
    EXPECT_THROW(load_elf(std::vector<std::uint8_t>{}), ParseError);
}

TEST(LoadElf, ThirtyTwoBitIsUnsupported) {
    try {
        load_elf_file(fixtures::bin("plain32.o"));
        FAIL();
    } catch (const UnsupportedArchError& e) {
        EXPECT_NE(std::string(e.what()).find("32-bit"), std::string::npos);
    }
}

TEST(LoadElf, TruncatedInputNeverCrashes) {
    auto bytes = read_file_bytes(fixtures::bin("loops"));
    for (std::size_t len : {std::size_t{16}, std::size_t{63}, std::size_t{64}, std::size_t{200}, bytes.size() / 2,
                            bytes.size() - 1}) {
        std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(len));
        try {
            load_elf(cut);
        } catch (const Error&) {
        }
    }
}

TEST(LoadElf, MissingFileIsAnError) {
    EXPECT_THROW(load_elf_file("/nonexistent/binary"), Error);
}

TEST(Lift, AddImmediate) {
    EXPECT_EQ(lift_bytes({0x83, 0xc0, 0x01}),
              (std::vector<std::string>{"IMark(0x1000, 3)", "t0 = eax", "t1 = Add32(t0,0x1)", "eax = t1"}));
}

TEST(Lift, PushRegister) {
    EXPECT_EQ(lift_bytes({0x53}), (std::vector<std::string>{"IMark(0x1000, 1)", "t0 = rsp", "t1 = Sub64(t0,0x8)",
                                                            "rsp = t1", "Store64(t1) = rbx"}));
}

TEST(Lift, UnsupportedFallsBackToOpaque) {
    EXPECT_EQ(lift_bytes({0xd9, 0xff}), (std::vector<std::string>{"IMark(0x1000, 2)", "Opaque(fcos)"}));
    EXPECT_EQ(lift_bytes({0x0f, 0xa2}), (std::vector<std::string>{"IMark(0x1000, 2)", "Opaque(cpuid)"}));
}

TEST(Lift, LoadThroughFramePointer) {
    EXPECT_EQ(lift_bytes({0x8b, 0x45, 0xfc}),
              (std::vector<std::string>{"IMark(0x1000, 3)", "t0 = rbp", "t1 = Add64(t0,0xfffffffffffffffc)",
                                        "t2 = Load32(t1)", "eax = t2"}));
}

TEST(Lift, StatementWidthsAreConsistent) {
    auto cfg = build_cfg(load_elf_file(fixtures::bin("loops")));
    for (const auto& [addr, block] : cfg.blocks) {
        for (const auto& s : block.stmts) {
            if (auto* p = std::get_if<ir::PutReg>(&s)) {
                EXPECT_EQ(ir::width_of(p->rhs), p->dst.width) << ir::render(s);
                EXPECT_EQ(ir::register_width(p->dst.name), p->dst.width) << ir::render(s);
            }
            if (auto* w = std::get_if<ir::WrTmp>(&s)) EXPECT_EQ(ir::width_of(w->rhs), w->dst.width) << ir::render(s);
            if (auto* e = std::get_if<ir::Exit>(&s)) EXPECT_EQ(ir::width_of(e->guard), 1u) << ir::render(s);
        }
    }
}

TEST(Cfg, OneBlockStartup) {
    auto cfg = build_cfg(load_elf_file(fixtures::bin("tiny")));
    ASSERT_EQ(cfg.blocks.size(), 1u);
    EXPECT_TRUE(cfg.blocks.begin()->second.successors.empty());
}

TEST(Cfg, Deterministic) {
    for (const auto& path : fixtures::binaries()) {
        auto a = build_cfg(load_elf_file(path));
        auto b = build_cfg(load_elf_file(path));
        EXPECT_EQ(a.blocks, b.blocks) << path;
        EXPECT_EQ(a.unresolved, b.unresolved) << path;
    }
}

TEST(Cfg, StructuralInvariants) {
    for (const auto& path : fixtures::binaries()) {
        auto cfg = build_cfg(load_elf_file(path));
        ASSERT_FALSE(cfg.blocks.empty()) << path;
        std::vector<std::pair<ir::Address, ir::Address>> ranges;
        for (const auto& [addr, block] : cfg.blocks) {
            EXPECT_EQ(block.addr, addr);
            std::optional<ir::Address> last;
            ir::Address end = addr;
            for (const auto& s : block.stmts) {
                if (auto* m = std::get_if<ir::IMark>(&s)) {
                    if (last) EXPECT_LT(*last, m->addr) << path;
                    if (!last) EXPECT_EQ(m->addr, addr) << path;
                    last = m->addr;
                    end = m->addr + m->len;
                }
            }
            ranges.emplace_back(addr, end);
            for (const auto& succ : block.successors) {
                EXPECT_TRUE(cfg.has_block(succ.target)) << path << " successor " << ir::to_hex(succ.target);
            }
        }
        for (std::size_t i = 0; i + 1 < ranges.size(); ++i) {
            EXPECT_LE(ranges[i].second, ranges[i + 1].first) << path << " block " << ir::to_hex(ranges[i].first);
        }
    }
}

TEST(Cfg, CallsHaveFallthrough) {
    auto cfg = build_cfg(load_elf_file(fixtures::bin("loops")));
    std::size_t calls = 0;
    for (const auto& [addr, block] : cfg.blocks) {
        bool call = false, fall = false;
        for (const auto& s : block.successors) {
            call |= s.kind == ir::EdgeKind::call;
            fall |= s.kind == ir::EdgeKind::fallthrough;
        }
        if (call) {
            ++calls;
            EXPECT_TRUE(fall) << ir::to_hex(addr);
        }
    }
    EXPECT_GT(calls, 0u);
}

TEST(Cfg, IndirectTargetsAreReported) {
    auto cfg = build_cfg(load_elf_file(fixtures::bin("dispatch")));
    EXPECT_FALSE(cfg.unresolved.empty());
    EXPECT_NE(unresolved_report(cfg).find(ir::to_hex(*cfg.unresolved.begin())), std::string::npos);
}

TEST(Cfg, FloatingPointBecomesOpaqueOrLifted) {
    auto cfg = build_cfg(load_elf_file(fixtures::bin("floats")));
    std::size_t opaque = 0;
    for (const auto& [addr, block] : cfg.blocks) {
        for (const auto& s : block.stmts) opaque += std::holds_alternative<ir::Opaque>(s);
    }
    EXPECT_GT(opaque, 0u);
}
