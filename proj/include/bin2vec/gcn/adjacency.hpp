#ifndef BIN2VEC_GCN_ADJACENCY_HPP
#define BIN2VEC_GCN_ADJACENCY_HPP

#include "bin2vec/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace bin2vec::gcn {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;
template <typename S>
using SparseMatrix = Eigen::SparseMatrix<S, Eigen::RowMajor, int>;

enum class NormMode { symmetric, row };

inline const char* norm_mode_name(NormMode m) { return m == NormMode::symmetric ? "symmetric" : "row"; }

inline NormMode parse_norm_mode(const std::string& s) {
    if (s == "symmetric") return NormMode::symmetric;
    if (s == "row") return NormMode::row;
    throw Error("unknown normalization mode: " + s);
}

using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

template <typename S>
struct NormalizedAdjacency {
    SparseMatrix<S> matrix;
    NormMode mode = NormMode::symmetric;

    Eigen::Index size() const { return matrix.rows(); }
};

/// Symmetric: D^-1/2 (A + A^T + I) D^-1/2 over the 0/1 union of both
/// directions. Row: D_out^-1 (A + I). Self-loops in `edges` are ignored since
/// the identity already supplies one per node.
template <typename S>
NormalizedAdjacency<S> normalize_adjacency(const EdgeList& edges, std::size_t n, NormMode mode) {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n) {
            throw ShapeError("edge (" + std::to_string(u) + "," + std::to_string(v) + ") outside " +
                             std::to_string(n) + " nodes");
        }
        if (u == v) continue;
        adj[u].push_back(static_cast<int>(v));
        if (mode == NormMode::symmetric) adj[v].push_back(static_cast<int>(u));
    }
    std::vector<S> degree(n);
    for (std::size_t i = 0; i < n; ++i) {
        adj[i].push_back(static_cast<int>(i));
        std::sort(adj[i].begin(), adj[i].end());
        adj[i].erase(std::unique(adj[i].begin(), adj[i].end()), adj[i].end());
        degree[i] = static_cast<S>(adj[i].size());
    }
    NormalizedAdjacency<S> out;
    out.mode = mode;
    out.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::size_t nnz = 0;
    for (const auto& row : adj) nnz += row.size();
    out.matrix.reserve(static_cast<Eigen::Index>(nnz));
    for (std::size_t i = 0; i < n; ++i) {
        out.matrix.startVec(static_cast<Eigen::Index>(i));
        for (int j : adj[i]) {
            S value = mode == NormMode::symmetric ? S(1) / std::sqrt(degree[i] * degree[static_cast<std::size_t>(j)])
                                                  : S(1) / degree[i];
            out.matrix.insertBack(static_cast<Eigen::Index>(i), j) = value;
        }
    }
    out.matrix.finalize();
    return out;
}

/// Block-diagonal stacking; block k is shifted by the sizes of blocks 0..k-1.
template <typename S>
SparseMatrix<S> block_diagonal(const std::vector<const SparseMatrix<S>*>& blocks) {
    Eigen::Index n = 0, nnz = 0;
    for (const auto* b : blocks) {
        n += b->rows();
        nnz += b->nonZeros();
    }
    SparseMatrix<S> out(n, n);
    out.reserve(nnz);
    Eigen::Index offset = 0;
    for (const auto* b : blocks) {
        for (Eigen::Index r = 0; r < b->rows(); ++r) {
            out.startVec(offset + r);
            for (typename SparseMatrix<S>::InnerIterator it(*b, r); it; ++it) {
                out.insertBack(offset + r, offset + it.col()) = it.value();
            }
        }
        offset += b->rows();
    }
    out.finalize();
    return out;
}

}

#endif
