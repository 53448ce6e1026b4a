#ifndef BIN2VEC_GCN_BATCH_HPP
#define BIN2VEC_GCN_BATCH_HPP

#include "bin2vec/error.hpp"
#include "bin2vec/features.hpp"
#include "bin2vec/gcn/adjacency.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bin2vec::gcn {

/// One featurized graph with its normalized adjacency.
template <typename S>
struct GraphSample {
    std::vector<std::uint32_t> active;
    SparseMatrix<S> adjacency;
    std::size_t input_dim = 0;
    int label = 0;
};

template <typename S>
GraphSample<S> make_sample(const FeatureMatrix& x, const EdgeList& edges, NormMode mode, int label) {
    GraphSample<S> s;
    s.active = x.active;
    s.adjacency = normalize_adjacency<S>(edges, x.rows(), mode).matrix;
    s.input_dim = x.cols;
    s.label = label;
    return s;
}

template <typename S>
struct GraphBatch {
    std::vector<std::uint32_t> active;
    SparseMatrix<S> adjacency;
    std::vector<std::size_t> membership;  // graph index of every stacked row
    std::vector<int> labels;
    std::size_t input_dim = 0;

    std::size_t graphs() const { return labels.size(); }
};

template <typename S>
GraphBatch<S> batch_graphs(const std::vector<const GraphSample<S>*>& samples) {
    if (samples.empty()) throw ShapeError("cannot batch zero graphs");
    GraphBatch<S> b;
    b.input_dim = samples.front()->input_dim;
    std::vector<const SparseMatrix<S>*> blocks;
    for (std::size_t g = 0; g < samples.size(); ++g) {
        const auto& s = *samples[g];
        if (s.input_dim != b.input_dim) {
            throw ShapeError("graphs featurized with different vocabularies (" + std::to_string(s.input_dim) +
                             " vs " + std::to_string(b.input_dim) + " columns)");
        }
        if (s.active.empty()) throw ShapeError("graph " + std::to_string(g) + " has no nodes");
        b.active.insert(b.active.end(), s.active.begin(), s.active.end());
        b.membership.insert(b.membership.end(), s.active.size(), g);
        b.labels.push_back(s.label);
        blocks.push_back(&s.adjacency);
    }
    b.adjacency = block_diagonal<S>(blocks);
    return b;
}

template <typename S>
GraphBatch<S> batch_graphs(const std::vector<GraphSample<S>>& samples) {
    std::vector<const GraphSample<S>*> ptrs;
    for (const auto& s : samples) ptrs.push_back(&s);
    return batch_graphs(ptrs);
}

}

#endif
