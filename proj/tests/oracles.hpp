#ifndef BIN2VEC_TESTS_ORACLES_HPP
#define BIN2VEC_TESTS_ORACLES_HPP

// Plain-loop reference implementations. Nothing here touches Eigen or the
// library's own numeric helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense matmul(const Dense& a, const Dense& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    Dense out = zeros(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][p] * b[p][j];
    return out;
}

inline Dense relu(Dense m) {
    for (auto& row : m)
        for (auto& x : row) x = x > 0 ? x : 0;
    return m;
}

/// symmetric: D^-1/2 (B + I) D^-1/2 with B the 0/1 union of A and A^T;
/// otherwise D^-1 (A + I) with D the row sums of A + I.
inline Dense normalized_adjacency(const std::vector<std::pair<std::size_t, std::size_t>>& edges, std::size_t n,
                                  bool symmetric) {
    Dense a = zeros(n, n);
    for (auto [u, v] : edges) {
        a[u][v] = 1;
        if (symmetric) a[v][u] = 1;
    }
    for (std::size_t i = 0; i < n; ++i) a[i][i] = 1;
    std::vector<double> deg(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) deg[i] += a[i][j];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a[i][j] = symmetric ? a[i][j] / std::sqrt(deg[i] * deg[j]) : a[i][j] / deg[i];
    return a;
}

inline Dense one_hot(const std::vector<std::uint32_t>& active, std::size_t d) {
    Dense x = zeros(active.size(), d);
    for (std::size_t i = 0; i < active.size(); ++i) x[i][active[i]] = 1;
    return x;
}

struct Weights {
    std::vector<Dense> conv;
    Dense w1;
    std::vector<double> b1;
    Dense w2;
    std::vector<double> b2;
};

inline std::vector<double> forward_probs(const Dense& a, const Dense& x, const Weights& w) {
    Dense h = x;
    for (const auto& wl : w.conv) h = relu(matmul(matmul(a, h), wl));
    std::vector<double> pooled(h.empty() ? 0 : h[0].size(), 0.0);
    for (const auto& row : h)
        for (std::size_t j = 0; j < row.size(); ++j) pooled[j] += row[j];
    std::vector<double> hidden(w.b1);
    for (std::size_t j = 0; j < hidden.size(); ++j) {
        for (std::size_t i = 0; i < pooled.size(); ++i) hidden[j] += pooled[i] * w.w1[i][j];
        hidden[j] = std::max(hidden[j], 0.0);
    }
    std::vector<double> logits(w.b2);
    for (std::size_t j = 0; j < logits.size(); ++j)
        for (std::size_t i = 0; i < hidden.size(); ++i) logits[j] += hidden[i] * w.w2[i][j];
    double top = *std::max_element(logits.begin(), logits.end());
    double z = 0;
    for (double l : logits) z += std::exp(l - top);
    std::vector<double> p;
    for (double l : logits) p.push_back(std::exp(l - top) / z);
    return p;
}

/// -log(softmax(logits)[label]) via log-sum-exp, without forming probabilities.
inline double cross_entropy_from_logits(const std::vector<double>& logits, int label) {
    double top = *std::max_element(logits.begin(), logits.end());
    double z = 0;
    for (double l : logits) z += std::exp(l - top);
    return top + std::log(z) - logits[static_cast<std::size_t>(label)];
}

inline double cross_entropy(const std::vector<double>& probs, int label) {
    return -std::log(probs[static_cast<std::size_t>(label)]);
}

inline bool reaches(const std::map<std::size_t, std::set<std::size_t>>& succ, std::size_t from, std::size_t to) {
    std::vector<std::size_t> stack{from};
    std::set<std::size_t> seen{from};
    while (!stack.empty()) {
        auto n = stack.back();
        stack.pop_back();
        auto it = succ.find(n);
        if (it == succ.end()) continue;
        for (auto s : it->second) {
            if (s == to) return true;
            if (seen.insert(s).second) stack.push_back(s);
        }
    }
    return false;
}

inline std::vector<std::pair<std::size_t, std::size_t>> random_edges(std::size_t n, double p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && u(rng) < p) e.emplace_back(i, j);
    return e;
}

}

#endif
