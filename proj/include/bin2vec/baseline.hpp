#ifndef BIN2VEC_BASELINE_HPP
#define BIN2VEC_BASELINE_HPP

// Bag of IR lines: every rendered statement (IMarks excluded) is one token.
// The classifier is multinomial logistic regression with an L2 penalty,
// trained by full-batch gradient descent on log(1 + count) features.

#include "bin2vec/cfg.hpp"
#include "bin2vec/error.hpp"
#include "bin2vec/ir.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace bin2vec::bow {

inline std::vector<std::string> tokens(const Cfg& cfg) {
    std::vector<std::string> out;
    for (const auto& [addr, block] : cfg.blocks) {
        for (const auto& s : block.stmts) {
            if (std::holds_alternative<ir::IMark>(s)) continue;
            out.push_back(ir::render(s));
        }
    }
    return out;
}

class BowVocabulary {
public:
    BowVocabulary() = default;

    explicit BowVocabulary(std::vector<std::string> kept) : tokens_(std::move(kept)) {
        std::sort(tokens_.begin(), tokens_.end());
        tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
        for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
    }

    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::optional<std::size_t> find(const std::string& t) const {
        auto it = index_.find(t);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Tokens whose total frequency over the training programs is >= min_count.
inline BowVocabulary bow_vocab(const std::vector<const std::vector<std::string>*>& train, std::size_t min_count) {
    if (train.empty()) throw Error("cannot build a vocabulary from an empty training set");
    std::map<std::string, std::size_t> counts;
    for (const auto* doc : train) {
        for (const auto& t : *doc) ++counts[t];
    }
    std::vector<std::string> kept;
    for (const auto& [t, n] : counts) {
        if (n >= min_count) kept.push_back(t);
    }
    return BowVocabulary(std::move(kept));
}

/// Counts of in-vocabulary tokens; out-of-vocabulary lines are dropped.
inline std::vector<double> bow_featurize(const std::vector<std::string>& doc, const BowVocabulary& vocab) {
    std::vector<double> counts(vocab.size(), 0.0);
    for (const auto& t : doc) {
        if (auto i = vocab.find(t)) counts[*i] += 1.0;
    }
    return counts;
}

using Dense = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LogRegConfig {
    double lambda = 1e-3;
    double learning_rate = 0.1;
    std::size_t iterations = 300;
};

class LogisticRegression {
public:
    LogisticRegression() = default;

    /// Rows of `x` are raw count vectors.
    void fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y, std::size_t classes,
             const LogRegConfig& cfg) {
        if (x.empty()) throw Error("no training vectors");
        Dense X = transform(x);
        const auto n = X.rows();
        const auto d = X.cols();
        Dense Y = Dense::Zero(n, static_cast<Eigen::Index>(classes));
        for (Eigen::Index i = 0; i < n; ++i) Y(i, y[static_cast<std::size_t>(i)]) = 1.0;
        w_ = Dense::Zero(d, static_cast<Eigen::Index>(classes));
        b_ = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(classes));
        // Adam on the full batch; the objective is convex so the schedule only
        // affects convergence speed.
        Dense mw = Dense::Zero(d, w_.cols()), vw = mw;
        Eigen::RowVectorXd mb = Eigen::RowVectorXd::Zero(b_.size()), vb = mb;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        for (std::size_t it = 1; it <= cfg.iterations; ++it) {
            Dense p = probabilities(X);
            Dense diff = (p - Y) / static_cast<double>(n);
            Dense gw = X.transpose() * diff + cfg.lambda * w_;
            Eigen::RowVectorXd gb = diff.colwise().sum();
            mw = b1 * mw + (1 - b1) * gw;
            vw = b2 * vw + (1 - b2) * gw.cwiseProduct(gw);
            mb = b1 * mb + (1 - b1) * gb;
            vb = b2 * vb + (1 - b2) * gb.cwiseProduct(gb);
            const double c1 = 1 - std::pow(b1, static_cast<double>(it));
            const double c2 = 1 - std::pow(b2, static_cast<double>(it));
            w_.array() -= cfg.learning_rate * (mw.array() / c1) / ((vw.array() / c2).sqrt() + eps);
            b_.array() -= cfg.learning_rate * (mb.array() / c1) / ((vb.array() / c2).sqrt() + eps);
        }
    }

    std::vector<int> predict(const std::vector<std::vector<double>>& x) const {
        Dense X = transform(x);
        if (X.rows() > 0 && X.cols() != w_.rows()) {
            throw ShapeError("count vectors have " + std::to_string(X.cols()) + " entries, model expects " +
                             std::to_string(w_.rows()));
        }
        Dense p = probabilities(X);
        std::vector<int> out;
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
            Eigen::Index best = 0;
            p.row(r).maxCoeff(&best);
            out.push_back(static_cast<int>(best));
        }
        return out;
    }

private:
    Dense w_;
    Eigen::RowVectorXd b_;

    static Dense transform(const std::vector<std::vector<double>>& x) {
        const auto d = x.empty() ? 0 : x.front().size();
        Dense X(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i].size() != d) throw ShapeError("count vectors of different lengths");
            for (std::size_t j = 0; j < d; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::log1p(x[i][j]);
        }
        return X;
    }

    Dense probabilities(const Dense& X) const {
        Dense logits = (X * w_).rowwise() + b_;
        for (Eigen::Index r = 0; r < logits.rows(); ++r) {
            double m = logits.row(r).maxCoeff();
            logits.row(r) = (logits.row(r).array() - m).exp().matrix();
            logits.row(r) /= logits.row(r).sum();
        }
        return logits;
    }
};

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (truth.empty()) return 0.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) ok += predicted[i] == truth[i];
    return static_cast<double>(ok) / static_cast<double>(truth.size());
}

struct BaselineGrid {
    std::vector<double> lambdas{1e-4, 1e-3, 1e-2, 1e-1};
    std::vector<std::size_t> min_counts{1, 2, 5};
};

struct BaselineResult {
    double val_accuracy = 0;
    double test_accuracy = 0;
    double lambda = 0;
    std::size_t min_count = 0;
    std::size_t vocab_size = 0;
    std::vector<int> test_predictions;
};

/// Picks (lambda, min_count) on validation accuracy, then scores the test split.
inline BaselineResult run_baseline(const std::vector<const std::vector<std::string>*>& train_docs,
                                   const std::vector<int>& train_y,
                                   const std::vector<const std::vector<std::string>*>& val_docs,
                                   const std::vector<int>& val_y,
                                   const std::vector<const std::vector<std::string>*>& test_docs,
                                   const std::vector<int>& test_y, std::size_t classes,
                                   const BaselineGrid& grid = {}, LogRegConfig base = {}) {
    BaselineResult best;
    bool have = false;
    for (auto mc : grid.min_counts) {
        auto vocab = bow_vocab(train_docs, mc);
        auto featurize_all = [&](const std::vector<const std::vector<std::string>*>& docs) {
            std::vector<std::vector<double>> out;
            for (const auto* d : docs) out.push_back(bow_featurize(*d, vocab));
            return out;
        };
        auto xtr = featurize_all(train_docs), xva = featurize_all(val_docs), xte = featurize_all(test_docs);
        for (auto lambda : grid.lambdas) {
            LogRegConfig cfg = base;
            cfg.lambda = lambda;
            LogisticRegression clf;
            clf.fit(xtr, train_y, classes, cfg);
            double val = accuracy(clf.predict(xva), val_y);
            if (!have || val > best.val_accuracy) {
                have = true;
                best.val_accuracy = val;
                best.lambda = lambda;
                best.min_count = mc;
                best.vocab_size = vocab.size();
                best.test_predictions = clf.predict(xte);
                best.test_accuracy = accuracy(best.test_predictions, test_y);
            }
        }
    }
    return best;
}

}

#endif
