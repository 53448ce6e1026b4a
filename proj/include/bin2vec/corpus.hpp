#ifndef BIN2VEC_CORPUS_HPP
#define BIN2VEC_CORPUS_HPP

// Desk-scale corpus: every `<family>.c` template in the template directory is
// one class; all of them share prelude.h, noise.h and the driver.h main().
// Variants differ in implementation strategy, loop idiom, integer type,
// problem size, declaration order, frame padding, identifier names, helper
// noise functions, and pie / stack-protector flags; all compile at -O0.
//
// Template markers:
//   // @rename: a b c     identifiers to rename on a word boundary
//   <line> // @shuffle     consecutive marked lines are permuted
//   // @pad               0-2 unused local char arrays of random size
//   $T, $N                 integer type and problem size
//   STRATEGY               0..3, selects one of the template's implementations

#include "bin2vec/dataset.hpp"
#include "bin2vec/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

namespace bin2vec::corpus {

struct Options {
    std::size_t variants = 40;
    std::uint64_t seed = 1;
    std::string cc = "cc";
    std::size_t jobs = 1;
};

struct Variant {
    std::string family;
    std::size_t index = 0;
    int strategy = 0;
    int loop_style = 0;
    std::string int_type;
    int size = 0;
    int noise_mask = 0;
    bool pie = true;
    bool stack_protector = false;
    std::uint64_t lcg_seed = 0;
    std::vector<std::string> flags() const {
        std::vector<std::string> f{"-O0", "-w"};
        if (pie) {
            f.insert(f.end(), {"-fpie", "-pie"});
        } else {
            f.insert(f.end(), {"-fno-pie", "-no-pie"});
        }
        f.push_back(stack_protector ? "-fstack-protector-strong" : "-fno-stack-protector");
        return f;
    }
};

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

/// Class templates in the template directory, sorted by name.
inline std::vector<std::filesystem::path> families(const std::filesystem::path& spec_dir) {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(spec_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".c") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) throw Error("no .c templates in " + spec_dir.string());
    return out;
}

inline std::uint64_t uniform(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

inline constexpr int kStrategies = 4;

inline Variant draw_variant(const std::string& family, std::size_t index, std::uint64_t seed) {
    std::mt19937_64 rng(fnv1a(family, seed * 0x100000001b3ULL + index));
    static const char* types[] = {"int", "long", "unsigned"};
    Variant v;
    v.family = family;
    v.index = index;
    v.strategy = static_cast<int>(uniform(rng, kStrategies));
    v.loop_style = static_cast<int>(uniform(rng, 3));
    v.int_type = types[uniform(rng, 3)];
    v.size = 8 + static_cast<int>(uniform(rng, 33));
    v.noise_mask = static_cast<int>(uniform(rng, 16));
    v.pie = uniform(rng, 2) == 0;
    v.stack_protector = uniform(rng, 2) == 0;
    v.lcg_seed = 1 + uniform(rng, 1u << 30);
    return v;
}

inline std::string random_identifier(std::mt19937_64& rng) {
    static const char* stems[] = {"v", "val", "x", "tmp", "buf", "arr", "num", "acc", "p", "q", "w", "item", "cur", "fn"};
    std::string s = stems[uniform(rng, std::size(stems))];
    s += "_";
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>('a' + uniform(rng, 26)));
    return s;
}

/// Replaces whole identifiers outside string and character literals.
inline std::string rename_identifiers(const std::string& text, const std::map<std::string, std::string>& mapping) {
    std::string out;
    auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    for (std::size_t i = 0; i < text.size();) {
        char c = text[i];
        if (c == '"' || c == '\'') {
            std::size_t j = i + 1;
            while (j < text.size() && text[j] != c) j += text[j] == '\\' ? 2 : 1;
            j = std::min(j + 1, text.size());
            out.append(text, i, j - i);
            i = j;
        } else if (ident_char(c)) {
            std::size_t j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            std::string word = text.substr(i, j - i);
            auto it = mapping.find(word);
            out += it == mapping.end() ? word : it->second;
            i = j;
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

/// Applies renaming, declaration shuffles, padding and $T/$N substitution.
inline std::string instantiate(const std::string& body, const Variant& v) {
    std::mt19937_64 rng(v.lcg_seed ^ 0x5bd1e995ULL);
    std::vector<std::string> lines;
    {
        std::istringstream in(body);
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
    }
    std::vector<std::string> renames;
    const std::string rename_tag = "// @rename:";
    const std::string shuffle_tag = "// @shuffle";
    const std::string pad_tag = "// @pad";
    std::vector<std::string> out;
    for (std::size_t i = 0; i < lines.size();) {
        if (lines[i].rfind(rename_tag, 0) == 0) {
            std::istringstream names(lines[i].substr(rename_tag.size()));
            std::string n;
            while (names >> n) renames.push_back(n);
            ++i;
            continue;
        }
        if (lines[i].find(shuffle_tag) != std::string::npos) {
            std::vector<std::string> run;
            while (i < lines.size() && lines[i].find(shuffle_tag) != std::string::npos) {
                auto l = lines[i++];
                run.push_back(l.substr(0, l.find(shuffle_tag)));
            }
            for (std::size_t k = run.size() - 1; k > 0; --k) std::swap(run[k], run[uniform(rng, k + 1)]);
            out.insert(out.end(), run.begin(), run.end());
            continue;
        }
        if (lines[i].find(pad_tag) != std::string::npos) {
            auto indent = lines[i].substr(0, lines[i].find(pad_tag));
            for (auto k = uniform(rng, 3); k > 0; --k) {
                out.push_back(indent + "char " + random_identifier(rng) + "[" + std::to_string(1 + uniform(rng, 48)) + "];");
            }
            ++i;
            continue;
        }
        out.push_back(lines[i++]);
    }
    std::string text;
    for (const auto& l : out) text += l + "\n";
    std::map<std::string, std::string> mapping;
    for (const auto& name : renames) mapping.emplace(name, random_identifier(rng));
    text = rename_identifiers(text, mapping);
    text = std::regex_replace(text, std::regex("\\$T"), v.int_type);
    text = std::regex_replace(text, std::regex("\\$N"), std::to_string(v.size));
    return text;
}

inline std::string variant_source(const std::filesystem::path& spec_dir, const std::string& body, const Variant& v) {
    std::ostringstream s;
    s << "/* " << v.family << " variant " << v.index << " */\n";
    s << "#define STRATEGY " << v.strategy << "\n";
    s << "#define LOOP_STYLE " << v.loop_style << "\n";
    s << "#define NOISE_MASK " << v.noise_mask << "\n";
    s << "#define SEED " << v.lcg_seed << "UL\n";
    s << read_text(spec_dir / "prelude.h") << "\n";
    s << read_text(spec_dir / "noise.h") << "\n";
    s << instantiate(body + "\n" + read_text(spec_dir / "driver.h"), v);
    return s.str();
}

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out.push_back(c);
        }
    }
    return out + "'";
}

/// Writes sources, binaries and `manifest.csv` under `out_dir`.
inline Manifest make_corpus(const std::filesystem::path& spec_dir, const std::filesystem::path& out_dir,
                            const Options& opt) {
    std::filesystem::create_directories(out_dir);
    struct Job {
        Variant variant;
        std::filesystem::path source, binary;
        std::string text;
    };
    std::vector<Job> jobs;
    for (const auto& tpl : families(spec_dir)) {
        const std::string family = tpl.stem().string();
        const std::string body = read_text(tpl);
        std::filesystem::create_directories(out_dir / family);
        for (std::size_t i = 0; i < opt.variants; ++i) {
            Job j;
            j.variant = draw_variant(family, i, opt.seed);
            const std::string stem = family + "_" + std::to_string(i);
            j.source = out_dir / family / (stem + ".c");
            j.binary = out_dir / family / stem;
            j.text = variant_source(spec_dir, body, j.variant);
            jobs.push_back(std::move(j));
        }
    }
    parallel_for(jobs.size(), opt.jobs, [&](std::size_t k) {
        const auto& j = jobs[k];
        write_text(j.source, j.text);
        std::string cmd = shell_quote(opt.cc);
        for (const auto& f : j.variant.flags()) cmd += " " + f;
        cmd += " -o " + shell_quote(j.binary.string()) + " " + shell_quote(j.source.string());
        if (std::system(cmd.c_str()) != 0) throw Error("compile failed: " + cmd);
    });
    Manifest m;
    for (const auto& j : jobs) m.entries.push_back({j.binary.string(), j.variant.family, "", ""});
    write_text(out_dir / "manifest.csv", manifest_to_csv(m, out_dir));
    return m;
}

}

#endif
