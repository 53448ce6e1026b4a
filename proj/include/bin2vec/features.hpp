#ifndef BIN2VEC_FEATURES_HPP
#define BIN2VEC_FEATURES_HPP

#include "bin2vec/error.hpp"
#include "bin2vec/graph_builder.hpp"
#include "bin2vec/ir.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace bin2vec {

inline constexpr const char* kUnkLabel = "UNK";
inline constexpr const char* kConstLabel = "CONST";

inline std::uint64_t fnv1a(const std::string& data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Vocabulary {
public:
    Vocabulary() { set_labels({}); }

    /// `labels` may omit the placeholders; they are always added.
    explicit Vocabulary(std::vector<std::string> labels, std::size_t min_count = 1) : min_count_(min_count) {
        set_labels(std::move(labels));
    }

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t min_count() const { return min_count_; }

    bool contains(const std::string& label) const { return index_.count(label) != 0; }

    /// Column of `label`, substituting CONST/UNK for out-of-vocabulary labels.
    std::size_t column(const std::string& label) const {
        auto it = index_.find(label);
        if (it != index_.end()) return it->second;
        return index_.at(ir::is_hex_literal(label) ? kConstLabel : kUnkLabel);
    }

    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const auto& l : labels_) {
            h = fnv1a(l, h);
            h = fnv1a("\n", h);
        }
        return h;
    }

    std::string to_text() const {
        std::string out;
        for (const auto& l : labels_) {
            out += l;
            out += '\n';
        }
        return out;
    }

    static Vocabulary from_text(const std::string& text) {
        std::vector<std::string> labels;
        std::size_t start = 0;
        while (start < text.size()) {
            auto end = text.find('\n', start);
            if (end == std::string::npos) end = text.size();
            labels.push_back(text.substr(start, end - start));
            start = end + 1;
        }
        Vocabulary v;
        v.labels_ = labels;
        v.index_.clear();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (!v.index_.emplace(labels[i], i).second) throw ParseError("duplicate vocabulary label: " + labels[i]);
        }
        if (!v.contains(kUnkLabel) || !v.contains(kConstLabel)) {
            throw ParseError("vocabulary lacks UNK/CONST placeholders");
        }
        return v;
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        out << to_text();
    }

    static Vocabulary load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot read " + path.string());
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return from_text(text);
    }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t min_count_ = 1;

    void set_labels(std::vector<std::string> labels) {
        labels.emplace_back(kUnkLabel);
        labels.emplace_back(kConstLabel);
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        labels_ = std::move(labels);
        index_.clear();
        for (std::size_t i = 0; i < labels_.size(); ++i) index_.emplace(labels_[i], i);
    }
};

inline std::map<std::string, std::size_t> label_histogram(const std::vector<const ProgramGraph*>& graphs) {
    std::map<std::string, std::size_t> counts;
    for (const auto* g : graphs) {
        for (const auto& l : g->labels) ++counts[l];
    }
    return counts;
}

/// Keeps labels seen at least `min_count` times across the training graphs.
inline Vocabulary build_vocab(const std::vector<const ProgramGraph*>& graphs, std::size_t min_count) {
    if (graphs.empty()) throw Error("cannot build a vocabulary from an empty training set");
    std::vector<std::string> kept;
    for (const auto& [label, n] : label_histogram(graphs)) {
        if (n >= min_count) kept.push_back(label);
    }
    return Vocabulary(std::move(kept), min_count);
}

inline Vocabulary build_vocab(const std::vector<ProgramGraph>& graphs, std::size_t min_count) {
    std::vector<const ProgramGraph*> ptrs;
    for (const auto& g : graphs) ptrs.push_back(&g);
    return build_vocab(ptrs, min_count);
}

/// One-hot matrix stored as the active column of each row.
struct FeatureMatrix {
    std::size_t cols = 0;
    std::vector<std::uint32_t> active;

    std::size_t rows() const { return active.size(); }
};

inline FeatureMatrix featurize(const ProgramGraph& graph, const Vocabulary& vocab) {
    FeatureMatrix x;
    x.cols = vocab.size();
    x.active.reserve(graph.labels.size());
    for (const auto& l : graph.labels) x.active.push_back(static_cast<std::uint32_t>(vocab.column(l)));
    return x;
}

}

#endif
