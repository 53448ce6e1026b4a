#ifndef BIN2VEC_ELF_HPP
#define BIN2VEC_ELF_HPP

#include "bin2vec/error.hpp"
#include "bin2vec/ir.hpp"

#include <elf.h>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace bin2vec {

struct Section {
    std::string name;
    ir::Address vaddr = 0;
    std::vector<std::uint8_t> bytes;
    bool executable = false;

    ir::Address end() const { return vaddr + bytes.size(); }
    bool contains(ir::Address a) const { return a >= vaddr && a < end(); }
};

struct Symbol {
    std::string name;
    ir::Address address = 0;
    bool is_function = false;
};

struct LoadedBinary {
    ir::Address entry = 0;
    std::vector<Section> sections;
    std::vector<Symbol> symbols;

    const Section* section_at(ir::Address a) const {
        for (const auto& s : sections) {
            if (s.contains(a)) {
                return &s;
            }
        }
        return nullptr;
    }

    bool is_executable(ir::Address a) const {
        const Section* s = section_at(a);
        return s != nullptr && s->executable;
    }

    /// PLT stubs are treated as the boundary to external code.
    bool is_plt(ir::Address a) const {
        const Section* s = section_at(a);
        return s != nullptr && s->name.rfind(".plt", 0) == 0;
    }
};

namespace detail {

template <typename T>
T read_struct(std::span<const std::uint8_t> bytes, std::uint64_t offset, const char* what) {
    if (offset > bytes.size() || bytes.size() - offset < sizeof(T)) {
        throw ParseError(std::string("truncated ELF: ") + what + " out of range");
    }
    T out;
    std::memcpy(&out, bytes.data() + offset, sizeof(T));
    return out;
}

inline std::string read_cstr(std::span<const std::uint8_t> table, std::uint64_t offset) {
    if (offset >= table.size()) {
        return {};
    }
    auto begin = table.begin() + static_cast<std::ptrdiff_t>(offset);
    auto end = std::find(begin, table.end(), std::uint8_t{0});
    return std::string(begin, end);
}

inline std::string machine_name(std::uint16_t machine) {
    switch (machine) {
    case EM_386: return "x86 (EM_386)";
    case EM_ARM: return "arm (EM_ARM)";
    case EM_AARCH64: return "aarch64 (EM_AARCH64)";
    case EM_RISCV: return "riscv (EM_RISCV)";
    case EM_PPC64: return "ppc64 (EM_PPC64)";
    case EM_MIPS: return "mips (EM_MIPS)";
    default: return "e_machine=" + std::to_string(machine);
    }
}

}

/// Parses a 64-bit little-endian x86-64 ELF image.
inline LoadedBinary load_elf(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < EI_NIDENT || std::memcmp(bytes.data(), ELFMAG, SELFMAG) != 0) {
        throw ParseError("not an ELF file (bad magic)");
    }
    if (bytes[EI_CLASS] == ELFCLASS32) {
        std::string arch = "32-bit ELF (ELFCLASS32)";
        if (bytes.size() >= sizeof(Elf32_Ehdr)) {
            auto hdr = detail::read_struct<Elf32_Ehdr>(bytes, 0, "header");
            arch = "32-bit ELF, " + detail::machine_name(hdr.e_machine);
        }
        throw UnsupportedArchError(arch);
    }
    if (bytes[EI_CLASS] != ELFCLASS64) {
        throw ParseError("invalid ELF class byte");
    }
    if (bytes[EI_DATA] != ELFDATA2LSB) {
        throw UnsupportedArchError("big-endian ELF");
    }
    auto hdr = detail::read_struct<Elf64_Ehdr>(bytes, 0, "header");
    if (hdr.e_machine != EM_X86_64) {
        throw UnsupportedArchError(detail::machine_name(hdr.e_machine));
    }
    if (hdr.e_type != ET_EXEC && hdr.e_type != ET_DYN) {
        throw ParseError("ELF type " + std::to_string(hdr.e_type) + " is not an executable or shared object");
    }
    if (hdr.e_shnum == 0 || hdr.e_shentsize != sizeof(Elf64_Shdr)) {
        throw ParseError("ELF has no usable section header table");
    }

    std::vector<Elf64_Shdr> shdrs;
    shdrs.reserve(hdr.e_shnum);
    for (std::uint16_t i = 0; i < hdr.e_shnum; ++i) {
        shdrs.push_back(detail::read_struct<Elf64_Shdr>(bytes, hdr.e_shoff + std::uint64_t{i} * sizeof(Elf64_Shdr), "section header"));
    }
    if (hdr.e_shstrndx >= shdrs.size()) {
        throw ParseError("section name table index out of range");
    }

    auto section_bytes = [&](const Elf64_Shdr& sh) -> std::span<const std::uint8_t> {
        if (sh.sh_type == SHT_NOBITS) {
            return {};
        }
        if (sh.sh_offset > bytes.size() || bytes.size() - sh.sh_offset < sh.sh_size) {
            throw ParseError("section contents out of range");
        }
        return bytes.subspan(sh.sh_offset, sh.sh_size);
    };

    auto shstr = section_bytes(shdrs[hdr.e_shstrndx]);
    LoadedBinary out;
    out.entry = hdr.e_entry;

    for (const auto& sh : shdrs) {
        if (sh.sh_type == SHT_NOBITS || !(sh.sh_flags & SHF_ALLOC) || sh.sh_size == 0) {
            continue;
        }
        bool exec = (sh.sh_flags & SHF_EXECINSTR) != 0;
        if (!exec) {
            continue;
        }
        Section s;
        s.name = detail::read_cstr(shstr, sh.sh_name);
        s.vaddr = sh.sh_addr;
        auto data = section_bytes(sh);
        s.bytes.assign(data.begin(), data.end());
        s.executable = true;
        out.sections.push_back(std::move(s));
    }
    std::sort(out.sections.begin(), out.sections.end(), [](const Section& a, const Section& b) { return a.vaddr < b.vaddr; });
    for (std::size_t i = 1; i < out.sections.size(); ++i) {
        if (out.sections[i].vaddr < out.sections[i - 1].end()) {
            throw ParseError("overlapping executable sections");
        }
    }

    for (const auto& sh : shdrs) {
        if (sh.sh_type != SHT_SYMTAB && sh.sh_type != SHT_DYNSYM) {
            continue;
        }
        if (sh.sh_link >= shdrs.size() || sh.sh_entsize != sizeof(Elf64_Sym)) {
            throw ParseError("malformed symbol table");
        }
        auto symdata = section_bytes(sh);
        auto strtab = section_bytes(shdrs[sh.sh_link]);
        for (std::uint64_t off = 0; off + sizeof(Elf64_Sym) <= symdata.size(); off += sizeof(Elf64_Sym)) {
            auto sym = detail::read_struct<Elf64_Sym>(symdata, off, "symbol");
            if (sym.st_shndx == SHN_UNDEF || sym.st_value == 0) {
                continue;
            }
            Symbol s;
            s.name = detail::read_cstr(strtab, sym.st_name);
            s.address = sym.st_value;
            s.is_function = ELF64_ST_TYPE(sym.st_info) == STT_FUNC;
            out.symbols.push_back(std::move(s));
        }
    }
    std::sort(out.symbols.begin(), out.symbols.end(), [](const Symbol& a, const Symbol& b) {
        return std::tie(a.address, a.name) < std::tie(b.address, b.name);
    });
    out.symbols.erase(std::unique(out.symbols.begin(), out.symbols.end(),
                                  [](const Symbol& a, const Symbol& b) { return a.address == b.address && a.name == b.name; }),
                      out.symbols.end());

    if (out.entry != 0 && !out.is_executable(out.entry)) {
        throw ParseError("entry point " + ir::to_hex(out.entry) + " is not in an executable section");
    }
    return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline LoadedBinary load_elf_file(const std::filesystem::path& path) {
    auto bytes = read_file_bytes(path);
    return load_elf(bytes);
}

}

#endif
