#include "support.hpp"

#include "bin2vec/interchange.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bin2vec;

namespace {

std::string wrap_block(const std::string& stmts, const std::string& successors = "[]") {
    return R"({"v":1,"binary_id":"x","arch":"x86_64","label":null,"blocks":[{"addr":"0x10","stmts":[)" + stmts +
           R"(],"successors":)" + successors + "}]}";
}

SchemaError schema_error(const std::string& text) {
    try {
        read_dump(text);
    } catch (const SchemaError& e) {
        return e;
    }
    ADD_FAILURE() << "no schema error for " << text;
    return SchemaError(0, "", "");
}

}

TEST(Interchange, RoundTripOnFixtures) {
    for (const auto& prog : fixtures::all_programs()) {
        auto once = write_dump({prog});
        auto back = read_dump(once);
        ASSERT_EQ(back.size(), 1u);
        EXPECT_TRUE(same_structure(prog, back[0])) << prog.binary_id;
        EXPECT_EQ(write_dump(back), once) << prog.binary_id;
    }
}

TEST(Interchange, FixtureFilesAreCanonical) {
    for (const auto& path : fixtures::dumps()) {
        auto text = read_file_bytes(path);
        std::string original(text.begin(), text.end());
        EXPECT_EQ(write_dump(read_dump(original)), original) << path;
    }
}

TEST(Interchange, WrTmpConstExample) {
    auto progs = read_dump(wrap_block(R"({"kind":"WrTmp","tmp":"t0","expr":{"kind":"Const","value":"0x1","width":32}})"));
    const auto& stmts = progs.at(0).cfg.blocks.at(0x10).stmts;
    ASSERT_EQ(stmts.size(), 1u);
    ir::Stmt expected = ir::WrTmp{{0, 32}, ir::Expr::constant(1, 32)};
    EXPECT_EQ(stmts[0], expected);
}

TEST(Interchange, AbsentSuccessorIsExternal) {
    auto progs = read_dump(wrap_block("", R"(["0x9000"])"));
    const auto& cfg = progs.at(0).cfg;
    EXPECT_EQ(cfg.external, (std::set<ir::Address>{0x9000}));
    EXPECT_TRUE(cfg.is_external(cfg.blocks.at(0x10).successors.at(0)));
}

TEST(Interchange, KeysInFixedOrder) {
    ProgramDump d;
    d.binary_id = "a";
    d.label = "sort";
    ir::BasicBlock b;
    b.addr = 0x20;
    d.cfg.blocks.emplace(0x20, b);
    auto line = dump_line(d);
    auto pos = [&](const char* k) { return line.find(std::string("\"") + k + "\""); };
    EXPECT_EQ(pos("v"), 1u);
    EXPECT_LT(pos("v"), pos("binary_id"));
    EXPECT_LT(pos("binary_id"), pos("arch"));
    EXPECT_LT(pos("arch"), pos("label"));
    EXPECT_LT(pos("label"), pos("blocks"));
    EXPECT_EQ(line.find('.'), std::string::npos);
}

TEST(Interchange, UnknownStatementKindIsNamed) {
    auto e = schema_error(wrap_block(R"({"kind":"Dirty","helper":"x"})"));
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("Dirty"), std::string::npos);
}

TEST(Interchange, ErrorsCarryLineAndKey) {
    auto ok = wrap_block("");
    auto e = schema_error(ok + "\n" + ok + "\n" + R"({"v":1,"binary_id":"x","arch":"x86_64","label":null,"blocks":[],"extra":1})");
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(schema_error(R"({"binary_id":"x","v":1,"arch":"x86_64","label":null,"blocks":[]})").key(), "v");
    EXPECT_EQ(schema_error(wrap_block(R"({"kind":"IMark","addr":"0x1A","len":1})")).key(), "addr");
    EXPECT_EQ(schema_error(wrap_block(R"({"kind":"WrTmp","tmp":"t0","expr":{"kind":"RdTmp","tmp":"t1"}})")).key(), "tmp");
    EXPECT_EQ(schema_error(wrap_block(R"({"kind":"WrTmp","tmp":"t0","expr":{"kind":"Op","op":"Add33","args":[]}})")).key(), "op");
    EXPECT_EQ(schema_error(wrap_block(R"({"kind":"PutReg","reg":"eax_1","width":32,"expr":{"kind":"Const","value":"0x1","width":32}})"))
                  .key(),
              "reg");
    EXPECT_EQ(schema_error(wrap_block(R"({"kind":"PutReg","reg":"eax","width":64,"expr":{"kind":"Const","value":"0x1","width":32}})"))
                  .key(),
              "expr");
}

TEST(Interchange, WidthMismatchInOpArguments) {
    auto e = schema_error(wrap_block(
        R"({"kind":"WrTmp","tmp":"t0","expr":{"kind":"Op","op":"Add32","args":[{"kind":"Const","value":"0x1","width":64},{"kind":"Const","value":"0x1","width":32}]}})"));
    EXPECT_EQ(e.key(), "args");
}

TEST(Validate, CollectsEveryViolation) {
    auto ok = wrap_block("");
    auto report = validate_dump(ok + "\nnot json\n" + ok + "\n{}\n");
    ASSERT_EQ(report.size(), 2u);
    EXPECT_NE(report[0].find("line 2"), std::string::npos);
    EXPECT_NE(report[1].find("line 4"), std::string::npos);
    EXPECT_TRUE(validate_dump(ok).empty());
    EXPECT_FALSE(validate_dump("").empty());
}

TEST(Validate, NeverThrowsOnGarbage) {
    std::mt19937_64 rng(3);
    auto base = write_dump(read_dump_file(fixtures::dump("mixed.b2v.jsonl")));
    for (int i = 0; i < 300; ++i) {
        std::string text = base;
        for (int k = 0; k < 1 + i % 5; ++k) text[rng() % text.size()] = static_cast<char>(rng() % 256);
        EXPECT_NO_THROW(validate_dump(text));
    }
    EXPECT_NO_THROW(validate_dump(std::string("\x00\xff\xfe", 3)));
}

TEST(Interchange, FileExtension) {
    EXPECT_STREQ(dump_extension, ".b2v.jsonl");
    EXPECT_TRUE(is_dump_path("a/b.b2v.jsonl"));
    EXPECT_FALSE(is_dump_path("a/b.jsonl"));
}
