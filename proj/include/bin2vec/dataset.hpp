#ifndef BIN2VEC_DATASET_HPP
#define BIN2VEC_DATASET_HPP

#include "bin2vec/baseline.hpp"
#include "bin2vec/error.hpp"
#include "bin2vec/features.hpp"
#include "bin2vec/graph_builder.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace bin2vec {

enum class TaskMode { multiclass, per_group_binary };

inline TaskMode parse_task_mode(const std::string& s) {
    if (s == "multiclass") return TaskMode::multiclass;
    if (s == "per_group_binary") return TaskMode::per_group_binary;
    throw Error("unknown task mode: " + s);
}

inline const char* task_mode_name(TaskMode m) { return m == TaskMode::multiclass ? "multiclass" : "per_group_binary"; }

struct ManifestEntry {
    std::string path;
    std::string label;
    std::string group;
    std::string flag;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    TaskMode mode = TaskMode::multiclass;

    /// Distinct labels in lexicographic order; position = class id.
    std::vector<std::string> class_names() const {
        std::set<std::string> s;
        for (const auto& e : entries) s.insert(e.label);
        return {s.begin(), s.end()};
    }

    std::vector<std::string> groups() const {
        std::set<std::string> s;
        for (const auto& e : entries) s.insert(e.group);
        return {s.begin(), s.end()};
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_number) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back().push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back().push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back().push_back(c);
        }
    }
    if (quoted) throw ParseError("manifest line " + std::to_string(line_number) + ": unterminated quote");
    return fields;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + "\"";
}

}

/// Relative paths are resolved against `base` (usually the manifest's directory).
inline Manifest parse_manifest(std::istream& in, const std::filesystem::path& base = {}) {
    Manifest m;
    std::string line;
    std::size_t n = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line, n);
        if (!header) {
            if (fields != std::vector<std::string>{"path", "label", "group", "flag"}) {
                throw ParseError("manifest line " + std::to_string(n) + ": header must be path,label,group,flag");
            }
            header = true;
            continue;
        }
        if (fields.size() != 4) {
            throw ParseError("manifest line " + std::to_string(n) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        }
        if (fields[0].empty()) throw ParseError("manifest line " + std::to_string(n) + ": empty path");
        std::filesystem::path p(fields[0]);
        if (p.is_relative() && !base.empty()) p = base / p;
        m.entries.push_back({p.string(), fields[1], fields[2], fields[3]});
    }
    if (!header) throw ParseError("manifest is empty");
    bool any_flag = std::any_of(m.entries.begin(), m.entries.end(), [](const auto& e) { return !e.flag.empty(); });
    if (any_flag) {
        m.mode = TaskMode::per_group_binary;
        for (const auto& e : m.entries) {
            if (e.flag != "good" && e.flag != "bad") {
                throw ParseError("manifest entry " + e.path + ": flag must be good or bad, got '" + e.flag + "'");
            }
        }
    }
    return m;
}

inline Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    return parse_manifest(in, path.parent_path());
}

inline std::string manifest_to_csv(const Manifest& m, const std::filesystem::path& base = {}) {
    std::string out = "path,label,group,flag\n";
    for (const auto& e : m.entries) {
        std::string p = e.path;
        if (!base.empty()) p = std::filesystem::path(e.path).lexically_relative(base).string();
        out += detail::csv_field(p) + "," + detail::csv_field(e.label) + "," + detail::csv_field(e.group) + "," +
               detail::csv_field(e.flag) + "\n";
    }
    return out;
}

/// A program converted once and shared by the GCN and the baseline.
struct LoadedProgram {
    std::string path;
    ProgramGraph graph;
    std::vector<std::string> bow_tokens;
};

/// Runs `work(i)` for i in [0, count) on up to `jobs` threads. The first
/// exception is rethrown after all workers finish.
template <typename F>
void parallel_for(std::size_t count, std::size_t jobs, F&& work) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        while (true) {
            std::size_t i = next++;
            if (i >= count) return;
            try {
                work(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    if (jobs == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

/// With a cache directory, ELF inputs are lifted once and stored as dumps
/// keyed by a hash of the file contents.
inline ProgramDump load_program_cached(const std::filesystem::path& path, const std::filesystem::path& cache_dir) {
    if (cache_dir.empty() || is_dump_path(path)) return load_program(path);
    auto bytes = read_file_bytes(path);
    std::string key(bytes.begin(), bytes.end());
    std::ostringstream name;
    name << std::hex << fnv1a(key) << "-" << std::dec << bytes.size() << dump_extension;
    auto cached = cache_dir / name.str();
    if (std::filesystem::exists(cached)) {
        auto prog = read_dump_file(cached);
        if (prog.size() == 1) return std::move(prog.front());
    }
    ProgramDump d;
    d.binary_id = path.filename().string();
    d.cfg = build_cfg(load_elf(bytes));
    std::filesystem::create_directories(cache_dir);
    auto tmp = cached;
    tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary);
        write_dump(out, {d});
    }
    std::filesystem::rename(tmp, cached);
    return d;
}

inline LoadedProgram load_for_training(const std::filesystem::path& path, const std::filesystem::path& cache_dir = {}) {
    auto prog = load_program_cached(path, cache_dir);
    return {path.string(), build_program_graph(prog.cfg), bow::tokens(prog.cfg)};
}

inline std::vector<LoadedProgram> load_programs(const Manifest& m, std::size_t jobs = 1,
                                                const std::filesystem::path& cache_dir = {}) {
    std::vector<LoadedProgram> out(m.entries.size());
    parallel_for(m.entries.size(), jobs, [&](std::size_t i) {
        try {
            out[i] = load_for_training(m.entries[i].path, cache_dir);
        } catch (const Error& e) {
            throw Error(m.entries[i].path + ": " + e.what());
        }
    });
    return out;
}

}

#endif
