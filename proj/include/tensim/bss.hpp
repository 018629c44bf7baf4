#pragma once

#include "tensim/hankel.hpp"
#include "tensim/tensor.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace tensim {

// Seeded generator with distribution transforms written out by hand so a
// seed produces the same stream on every standard library.
class Random {
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n);
    // Standard normal (Box-Muller).
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct BssParams {
    Index mixtures = 25;
    Index min_zeros = 3;
    Index max_zeros = 6;
    double min_magnitude = 0.5;
    double max_magnitude = 2.5;
    double sigma_rel = 0.1;
    std::uint64_t seed = 0;
    double ts = 0.05;
    Index samples = 100;
    std::array<Index, 3> dims{34, 34, 34};
    double tau = 2.3;
    double thresh = 0.1;

    // Throws InvalidArgument for infeasible ranges given `sources` signals.
    void validate(Index sources) const;
};

struct MixtureExperiment {
    std::vector<ExpPolySignal> sources;
    // samples x sources
    Matrix sampled_sources;
    // sources x mixtures, real
    Eigen::MatrixXd g;
    Matrix clean;
    Matrix noisy;
    double sigma = 0.0;
    BssParams params;
};

// Y = S G and Y^n = Y + sigma N with sigma = sigma_rel ||Y||_F / ||N||_F.
// Every column of G has between min_zeros and max_zeros zeros; the other
// entries have magnitude in [min_magnitude, max_magnitude] and a random sign.
MixtureExperiment generate_experiment(const std::vector<ExpPolySignal>& sources, const BssParams& params);

struct MixtureGraph {
    Index vertices = 0;
    // Zero-based (from, to) pairs, sorted, no self-loops.
    std::vector<std::pair<Index, Index>> edges;

    bool has_edge(Index from, Index to) const;
};

// Edge i -> j (i != j) iff support(G(:, i)) is a subset of support(G(:, j)),
// with support = {k : |g_ki| > zero_tol}.
MixtureGraph ground_truth_graph(const Eigen::MatrixXd& g, double zero_tol = 0.0);

struct Classification {
    MixtureGraph graph;
    // Estimated rank of each mixture's Hankel unfolding.
    std::vector<Index> ranks;
    // scores(i, j): (r_j + 1)-st singular value of [U_i U_j].
    Eigen::MatrixXd scores;
};

// Hankelizes every column of `y`, takes an orthonormal basis U_i of the
// column space of the mode-1 unfolding cut with the gap rule `tau`, and adds
// the edge i -> j when col(U_i) is numerically inside col(U_j).
Classification classify_mixtures(const Matrix& y, const std::array<Index, 3>& dims, double tau, double thresh);

struct GraphScore {
    Index true_positives = 0;
    Index false_positives = 0;
    Index false_negatives = 0;
    // 1 when nothing was predicted.
    double precision = 1.0;
    // 1 when the truth has no edges.
    double recall = 1.0;
};

GraphScore score_graph(const MixtureGraph& predicted, const MixtureGraph& truth);

struct BssRun {
    MixtureExperiment experiment;
    MixtureGraph truth;
    Classification classification;
    GraphScore score;
};

// generate_experiment on the reference sources, classify, and score.
BssRun run_bss(const BssParams& params);
BssRun run_bss(const std::vector<ExpPolySignal>& sources, const BssParams& params);

} // namespace tensim
