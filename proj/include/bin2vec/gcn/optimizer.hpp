#ifndef BIN2VEC_GCN_OPTIMIZER_HPP
#define BIN2VEC_GCN_OPTIMIZER_HPP

#include "bin2vec/error.hpp"
#include "bin2vec/gcn/model.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace bin2vec::gcn {

enum class OptimizerKind { adam, sgd };

inline OptimizerKind parse_optimizer(const std::string& s) {
    if (s == "adam") return OptimizerKind::adam;
    if (s == "sgd") return OptimizerKind::sgd;
    throw Error("unknown optimizer: " + s);
}

inline const char* optimizer_name(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename S>
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig cfg = {}) : cfg_(cfg) {}

    const OptimizerConfig& config() const { return cfg_; }
    std::size_t steps() const { return t_; }

    void step(Params<S>& params, Params<S>& grads) {
        if (cfg_.kind == OptimizerKind::sgd) {
            ++t_;
            apply(params, grads, [&](S* p, S* g, std::size_t, std::size_t n) {
                for (std::size_t i = 0; i < n; ++i) p[i] -= static_cast<S>(cfg_.learning_rate) * g[i];
            });
            return;
        }
        if (m_.empty()) {
            grads.for_each([&](S*, std::size_t n) {
                m_.emplace_back(n, S(0));
                v_.emplace_back(n, S(0));
            });
        }
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        const S b1 = static_cast<S>(cfg_.beta1), b2 = static_cast<S>(cfg_.beta2);
        apply(params, grads, [&](S* p, S* g, std::size_t k, std::size_t n) {
            auto& m = m_[k];
            auto& v = v_[k];
            for (std::size_t i = 0; i < n; ++i) {
                m[i] = b1 * m[i] + (S(1) - b1) * g[i];
                v[i] = b2 * v[i] + (S(1) - b2) * g[i] * g[i];
                double mhat = static_cast<double>(m[i]) / c1;
                double vhat = static_cast<double>(v[i]) / c2;
                p[i] -= static_cast<S>(cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon));
            }
        });
    }

private:
    OptimizerConfig cfg_;
    std::size_t t_ = 0;
    std::vector<std::vector<S>> m_;
    std::vector<std::vector<S>> v_;

    template <typename F>
    static void apply(Params<S>& params, Params<S>& grads, F&& f) {
        std::vector<std::pair<S*, std::size_t>> ps, gs;
        params.for_each([&](S* p, std::size_t n) { ps.emplace_back(p, n); });
        grads.for_each([&](S* g, std::size_t n) { gs.emplace_back(g, n); });
        if (ps.size() != gs.size()) throw ShapeError("gradient tensors do not match parameters");
        for (std::size_t k = 0; k < ps.size(); ++k) {
            if (ps[k].second != gs[k].second) throw ShapeError("gradient tensor " + std::to_string(k) + " has wrong size");
            f(ps[k].first, gs[k].first, k, ps[k].second);
        }
    }
};

}

#endif
