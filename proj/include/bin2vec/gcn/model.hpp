#ifndef BIN2VEC_GCN_MODEL_HPP
#define BIN2VEC_GCN_MODEL_HPP

// Graph classifier: L graph convolutions H' = ReLU(A H W) over one-hot
// inputs, a sum readout per graph, then a two-layer perceptron and softmax.
// The backward pass is written out by hand; every forward intermediate the
// gradients need lives in ForwardCache.

#include "bin2vec/error.hpp"
#include "bin2vec/gcn/adjacency.hpp"
#include "bin2vec/gcn/batch.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace bin2vec::gcn {

struct ModelConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> layers{128, 128, 64};
    std::size_t mlp_hidden = 64;
    std::size_t classes = 2;
    NormMode mode = NormMode::symmetric;
    std::uint64_t seed = 0;
};

inline std::string shape_string(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

template <typename S>
struct Params {
    std::vector<Matrix<S>> conv;
    Matrix<S> w1;
    RowVector<S> b1;
    Matrix<S> w2;
    RowVector<S> b2;

    /// Visits every tensor as a flat row-major array, in a fixed order.
    template <typename F>
    void for_each(F&& f) {
        for (auto& w : conv) f(w.data(), static_cast<std::size_t>(w.size()));
        f(w1.data(), static_cast<std::size_t>(w1.size()));
        f(b1.data(), static_cast<std::size_t>(b1.size()));
        f(w2.data(), static_cast<std::size_t>(w2.size()));
        f(b2.data(), static_cast<std::size_t>(b2.size()));
    }

    std::size_t tensor_count() const { return conv.size() + 4; }

    std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes() const {
        std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
        for (const auto& w : conv) out.emplace_back(w.rows(), w.cols());
        out.emplace_back(w1.rows(), w1.cols());
        out.emplace_back(1, b1.size());
        out.emplace_back(w2.rows(), w2.cols());
        out.emplace_back(1, b2.size());
        return out;
    }

    static Params zeros_like(const Params& p) {
        Params z;
        for (const auto& w : p.conv) z.conv.push_back(Matrix<S>::Zero(w.rows(), w.cols()));
        z.w1 = Matrix<S>::Zero(p.w1.rows(), p.w1.cols());
        z.b1 = RowVector<S>::Zero(p.b1.size());
        z.w2 = Matrix<S>::Zero(p.w2.rows(), p.w2.cols());
        z.b2 = RowVector<S>::Zero(p.b2.size());
        return z;
    }

    template <typename T>
    Params<T> cast() const {
        Params<T> out;
        for (const auto& w : conv) out.conv.push_back(w.template cast<T>());
        out.w1 = w1.template cast<T>();
        out.b1 = b1.template cast<T>();
        out.w2 = w2.template cast<T>();
        out.b2 = b2.template cast<T>();
        return out;
    }
};

/// Uniform double in [0, 1) from the top 53 bits of the generator output.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename S>
void glorot_uniform(Matrix<S>& w, std::mt19937_64& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w.data()[i] = static_cast<S>((2.0 * unit_uniform(rng) - 1.0) * limit);
    }
}

template <typename S>
Params<S> init_params(const ModelConfig& cfg) {
    if (cfg.input_dim == 0 || cfg.layers.empty() || cfg.classes == 0 || cfg.mlp_hidden == 0) {
        throw ShapeError("model needs input_dim, at least one layer, mlp_hidden and classes");
    }
    std::mt19937_64 rng(cfg.seed);
    Params<S> p;
    std::size_t in = cfg.input_dim;
    for (auto h : cfg.layers) {
        p.conv.emplace_back(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(h));
        glorot_uniform(p.conv.back(), rng);
        in = h;
    }
    p.w1.resize(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(cfg.mlp_hidden));
    glorot_uniform(p.w1, rng);
    p.b1 = RowVector<S>::Zero(static_cast<Eigen::Index>(cfg.mlp_hidden));
    p.w2.resize(static_cast<Eigen::Index>(cfg.mlp_hidden), static_cast<Eigen::Index>(cfg.classes));
    glorot_uniform(p.w2, rng);
    p.b2 = RowVector<S>::Zero(static_cast<Eigen::Index>(cfg.classes));
    return p;
}

template <typename S>
Matrix<S> relu(const Matrix<S>& m) {
    return m.cwiseMax(S(0));
}

/// ReLU(A H W) for a dense input H.
template <typename S>
Matrix<S> gcn_layer_forward(const Matrix<S>& h, const SparseMatrix<S>& a, const Matrix<S>& w) {
    if (a.rows() != a.cols() || a.cols() != h.rows()) {
        throw ShapeError("adjacency " + shape_string(a.rows(), a.cols()) + " does not match H " +
                         shape_string(h.rows(), h.cols()));
    }
    if (h.cols() != w.rows()) {
        throw ShapeError("H " + shape_string(h.rows(), h.cols()) + " does not match W " +
                         shape_string(w.rows(), w.cols()));
    }
    Matrix<S> hw = h * w;
    return relu<S>(Matrix<S>(a * hw));
}

/// Row i of the result is row active[i] of W, i.e. X W for one-hot X.
template <typename S>
Matrix<S> gather_rows(const Matrix<S>& w, const std::vector<std::uint32_t>& active) {
    Matrix<S> out(static_cast<Eigen::Index>(active.size()), w.cols());
    for (std::size_t i = 0; i < active.size(); ++i) {
        if (active[i] >= w.rows()) {
            throw ShapeError("feature column " + std::to_string(active[i]) + " outside W " +
                             shape_string(w.rows(), w.cols()));
        }
        out.row(static_cast<Eigen::Index>(i)) = w.row(active[i]);
    }
    return out;
}

template <typename S>
Matrix<S> sum_pool(const Matrix<S>& z, const std::vector<std::size_t>& membership, std::size_t graphs) {
    Matrix<S> out = Matrix<S>::Zero(static_cast<Eigen::Index>(graphs), z.cols());
    for (std::size_t i = 0; i < membership.size(); ++i) {
        out.row(static_cast<Eigen::Index>(membership[i])) += z.row(static_cast<Eigen::Index>(i));
    }
    return out;
}

/// Row-wise softmax with the row maximum subtracted first.
template <typename S>
Matrix<S> softmax_rows(const Matrix<S>& logits) {
    Matrix<S> out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        S m = logits.row(r).maxCoeff();
        RowVector<S> e = (logits.row(r).array() - m).exp().matrix();
        out.row(r) = e / e.sum();
    }
    return out;
}

template <typename S>
S cross_entropy(const RowVector<S>& probs, int label) {
    return -std::log(probs(label));
}

template <typename S>
struct ForwardCache {
    std::vector<Matrix<S>> pre;   // A H_l W_l before ReLU, per layer
    std::vector<Matrix<S>> act;   // H_{l+1}
    Matrix<S> pooled;
    Matrix<S> z1;
    Matrix<S> a1;
    Matrix<S> logits;
    Matrix<S> probs;
};

template <typename S>
class Model {
public:
    Model() = default;
    explicit Model(ModelConfig cfg) : config(std::move(cfg)), params(init_params<S>(config)) {}
    Model(ModelConfig cfg, Params<S> p) : config(std::move(cfg)), params(std::move(p)) {}

    ModelConfig config;
    Params<S> params;

    Matrix<S> forward(const GraphBatch<S>& batch, ForwardCache<S>* cache = nullptr) const {
        check_batch(batch);
        ForwardCache<S> local;
        ForwardCache<S>& c = cache ? *cache : local;
        c.pre.clear();
        c.act.clear();
        Matrix<S> m = gather_rows(params.conv[0], batch.active);
        for (std::size_t l = 0; l < params.conv.size(); ++l) {
            if (l > 0) m = c.act.back() * params.conv[l];
            c.pre.push_back(batch.adjacency * m);
            c.act.push_back(relu<S>(c.pre.back()));
        }
        c.pooled = sum_pool(c.act.back(), batch.membership, batch.graphs());
        c.z1 = (c.pooled * params.w1).rowwise() + params.b1;
        c.a1 = relu<S>(c.z1);
        c.logits = (c.a1 * params.w2).rowwise() + params.b2;
        c.probs = softmax_rows(c.logits);
        return c.probs;
    }

    /// Mean cross-entropy of the batch.
    S loss(const GraphBatch<S>& batch, ForwardCache<S>* cache = nullptr) const {
        Matrix<S> probs = forward(batch, cache);
        return mean_loss(probs, batch.labels);
    }

    static S mean_loss(const Matrix<S>& probs, const std::vector<int>& labels) {
        S total = 0;
        for (std::size_t g = 0; g < labels.size(); ++g) {
            total += cross_entropy<S>(probs.row(static_cast<Eigen::Index>(g)), labels[g]);
        }
        return total / static_cast<S>(labels.size());
    }

    /// Gradients of the mean cross-entropy; `cache` must come from forward()
    /// on the same batch.
    Params<S> backward(const GraphBatch<S>& batch, const ForwardCache<S>& c) const {
        Params<S> g = Params<S>::zeros_like(params);
        const auto count = static_cast<S>(batch.graphs());
        Matrix<S> dlogits = c.probs;
        for (std::size_t i = 0; i < batch.labels.size(); ++i) {
            dlogits(static_cast<Eigen::Index>(i), batch.labels[i]) -= S(1);
        }
        dlogits /= count;
        g.w2.noalias() = c.a1.transpose() * dlogits;
        g.b2 = dlogits.colwise().sum();
        Matrix<S> dz1 = (dlogits * params.w2.transpose()).cwiseProduct(positive_mask(c.z1));
        g.w1.noalias() = c.pooled.transpose() * dz1;
        g.b1 = dz1.colwise().sum();
        Matrix<S> dpooled = dz1 * params.w1.transpose();

        Matrix<S> dh(static_cast<Eigen::Index>(batch.membership.size()), dpooled.cols());
        for (std::size_t i = 0; i < batch.membership.size(); ++i) {
            dh.row(static_cast<Eigen::Index>(i)) = dpooled.row(static_cast<Eigen::Index>(batch.membership[i]));
        }
        SparseMatrix<S> at = batch.adjacency.transpose();
        for (std::size_t l = params.conv.size(); l-- > 0;) {
            Matrix<S> dpre = dh.cwiseProduct(positive_mask(c.pre[l]));
            Matrix<S> dm = at * dpre;
            if (l == 0) {
                for (std::size_t i = 0; i < batch.active.size(); ++i) {
                    g.conv[0].row(batch.active[i]) += dm.row(static_cast<Eigen::Index>(i));
                }
            } else {
                g.conv[l].noalias() = c.act[l - 1].transpose() * dm;
                dh = dm * params.conv[l].transpose();
            }
        }
        return g;
    }

    std::vector<int> predict(const GraphBatch<S>& batch) const {
        Matrix<S> probs = forward(batch);
        std::vector<int> out;
        for (Eigen::Index r = 0; r < probs.rows(); ++r) {
            Eigen::Index best = 0;
            probs.row(r).maxCoeff(&best);
            out.push_back(static_cast<int>(best));
        }
        return out;
    }

private:
    static Matrix<S> positive_mask(const Matrix<S>& m) {
        return (m.array() > S(0)).template cast<S>().matrix();
    }

    void check_batch(const GraphBatch<S>& batch) const {
        if (batch.active.size() != static_cast<std::size_t>(batch.adjacency.rows())) {
            throw ShapeError("batch has " + std::to_string(batch.active.size()) + " feature rows but adjacency " +
                             shape_string(batch.adjacency.rows(), batch.adjacency.cols()));
        }
        if (batch.input_dim != config.input_dim) {
            throw ShapeError("batch features have " + std::to_string(batch.input_dim) + " columns, model expects " +
                             std::to_string(config.input_dim));
        }
        for (int label : batch.labels) {
            if (label < 0 || static_cast<std::size_t>(label) >= config.classes) {
                throw ShapeError("label " + std::to_string(label) + " outside " + std::to_string(config.classes) +
                                 " classes");
            }
        }
    }
};

}

#endif
