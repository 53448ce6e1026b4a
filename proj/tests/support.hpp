#ifndef BIN2VEC_TESTS_SUPPORT_HPP
#define BIN2VEC_TESTS_SUPPORT_HPP

#include "oracles.hpp"

#include "bin2vec/gcn/batch.hpp"
#include "bin2vec/gcn/model.hpp"
#include "bin2vec/graph_builder.hpp"
#include "bin2vec/interchange.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

namespace fs = std::filesystem;

inline fs::path bin(const std::string& name) { return fs::path(BIN2VEC_FIXTURE_BIN) / name; }
inline fs::path dump(const std::string& name) { return fs::path(BIN2VEC_FIXTURE_DUMPS) / name; }

inline fs::path work_dir(const std::string& name) {
    auto p = fs::path(BIN2VEC_WORK) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

/// 64-bit ELF executables built from tests/fixtures/src.
inline std::vector<fs::path> binaries() {
    return {bin("tiny"), bin("loops"), bin("loops_pie_o2"), bin("dispatch"), bin("floats")};
}

inline std::vector<fs::path> dumps() {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(BIN2VEC_FIXTURE_DUMPS)) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<bin2vec::ProgramDump> all_programs() {
    std::vector<bin2vec::ProgramDump> out;
    for (const auto& b : binaries()) out.push_back(bin2vec::load_program(b));
    for (const auto& d : dumps()) {
        for (auto& p : bin2vec::read_dump_file(d)) out.push_back(std::move(p));
    }
    return out;
}

struct CommandResult {
    int status = -1;
    std::string output;
};

/// Runs the CLI through the shell, capturing stdout and stderr together.
inline CommandResult run_cli(const std::string& args) {
    std::string cmd = std::string("\"") + BIN2VEC_CLI + "\" " + args + " 2>&1";
    CommandResult r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
    int status = pclose(p);
    r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

}

namespace testgen {

inline oracle::Dense to_dense(const bin2vec::gcn::Matrix<double>& m) {
    oracle::Dense out = oracle::zeros(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return out;
}

inline std::vector<double> to_vector(const bin2vec::gcn::RowVector<double>& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline oracle::Weights to_weights(const bin2vec::gcn::Params<double>& p) {
    oracle::Weights w;
    for (const auto& c : p.conv) w.conv.push_back(to_dense(c));
    w.w1 = to_dense(p.w1);
    w.b1 = to_vector(p.b1);
    w.w2 = to_dense(p.w2);
    w.b2 = to_vector(p.b2);
    return w;
}

/// Random graph with random one-hot features; nodes in [1, max_nodes].
struct RandomGraph {
    std::size_t n = 0;
    bin2vec::gcn::EdgeList edges;
    std::vector<std::uint32_t> active;
    int label = 0;
};

inline RandomGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes, std::size_t dim, std::size_t classes) {
    RandomGraph g;
    g.n = 1 + rng() % max_nodes;
    g.edges = oracle::random_edges(g.n, 0.25, rng);
    for (std::size_t i = 0; i < g.n; ++i) g.active.push_back(static_cast<std::uint32_t>(rng() % dim));
    g.label = static_cast<int>(rng() % classes);
    return g;
}

template <typename S = double>
bin2vec::gcn::GraphSample<S> sample_of(const RandomGraph& g, std::size_t dim, bin2vec::gcn::NormMode mode) {
    bin2vec::FeatureMatrix x{dim, g.active};
    return bin2vec::gcn::make_sample<S>(x, g.edges, mode, g.label);
}

/// Biases are zero at initialization; give them values so they are exercised.
inline void randomize_biases(bin2vec::gcn::Params<double>& p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (Eigen::Index i = 0; i < p.b1.size(); ++i) p.b1(i) = u(rng);
    for (Eigen::Index i = 0; i < p.b2.size(); ++i) p.b2(i) = u(rng);
}

}

#endif
