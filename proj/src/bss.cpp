#include "tensim/bss.hpp"

#include "tensim/error.hpp"
#include "tensim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace tensim {

double Random::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Random::index(std::uint64_t n) {
    if (n == 0) throw InvalidArgument("index range must be nonempty");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return x % n;
}

double Random::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1;
    do u1 = uniform();
    while (u1 == 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
}

void BssParams::validate(Index sources) const {
    if (sources < 1) throw InvalidArgument("at least one source is required");
    if (mixtures < 1) throw InvalidArgument("at least one mixture is required");
    if (min_zeros < 0 || min_zeros > max_zeros || max_zeros > sources)
        throw InvalidArgument("zero range [" + std::to_string(min_zeros) + ", " + std::to_string(max_zeros) +
                              "] is infeasible with " + std::to_string(sources) + " sources");
    if (!(min_magnitude > 0.0) || !(max_magnitude >= min_magnitude))
        throw InvalidArgument("magnitude range must satisfy 0 < min <= max");
    if (!(sigma_rel >= 0.0)) throw InvalidArgument("sigma_rel must be nonnegative");
    if (!(ts > 0.0)) throw InvalidArgument("sampling time must be positive");
    if (samples < 1) throw InvalidArgument("sample count must be positive");
    if (dims[0] + dims[1] + dims[2] != samples + 2 || *std::min_element(dims.begin(), dims.end()) < 1)
        throw InvalidArgument("Hankel dimensions must be positive and sum to samples + 2");
    if (!(tau > 1.0)) throw InvalidArgument("gap ratio must exceed 1");
    if (!(thresh > 0.0)) throw InvalidArgument("inclusion threshold must be positive");
}

MixtureExperiment generate_experiment(const std::vector<ExpPolySignal>& sources, const BssParams& params) {
    const Index r = static_cast<Index>(sources.size());
    params.validate(r);
    MixtureExperiment ex;
    ex.sources = sources;
    ex.params = params;

    ex.sampled_sources.resize(params.samples, r);
    for (Index k = 0; k < r; ++k)
        ex.sampled_sources.col(k) = sample(sources[static_cast<std::size_t>(k)], params.ts, params.samples).values;

    Random rng(params.seed);
    ex.g = Eigen::MatrixXd::Zero(r, params.mixtures);
    std::vector<Index> rows(static_cast<std::size_t>(r));
    for (Index j = 0; j < params.mixtures; ++j) {
        const Index zeros = params.min_zeros + static_cast<Index>(rng.index(static_cast<std::uint64_t>(params.max_zeros - params.min_zeros + 1)));
        std::iota(rows.begin(), rows.end(), Index{0});
        // Partial Fisher-Yates: the first r - zeros rows carry nonzeros.
        const Index keep = r - zeros;
        for (Index i = 0; i < keep; ++i) {
            const Index pick = i + static_cast<Index>(rng.index(static_cast<std::uint64_t>(r - i)));
            std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(pick)]);
        }
        for (Index i = 0; i < keep; ++i) {
            const double mag = rng.uniform(params.min_magnitude, params.max_magnitude);
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            ex.g(rows[static_cast<std::size_t>(i)], j) = sign * mag;
        }
    }

    ex.clean = ex.sampled_sources * ex.g.cast<Complex>();
    Eigen::MatrixXd noise(params.samples, params.mixtures);
    for (Index j = 0; j < params.mixtures; ++j)
        for (Index i = 0; i < params.samples; ++i) noise(i, j) = rng.normal();
    ex.noisy = ex.clean;
    if (params.sigma_rel > 0.0) {
        ex.sigma = params.sigma_rel * ex.clean.norm() / noise.norm();
        ex.noisy += ex.sigma * noise.cast<Complex>();
    }
    return ex;
}

bool MixtureGraph::has_edge(Index from, Index to) const {
    return std::binary_search(edges.begin(), edges.end(), std::pair<Index, Index>{from, to});
}

MixtureGraph ground_truth_graph(const Eigen::MatrixXd& g, double zero_tol) {
    MixtureGraph graph;
    graph.vertices = g.cols();
    for (Index i = 0; i < g.cols(); ++i)
        for (Index j = 0; j < g.cols(); ++j) {
            if (i == j) continue;
            bool subset = true;
            for (Index k = 0; k < g.rows() && subset; ++k)
                if (std::abs(g(k, i)) > zero_tol && !(std::abs(g(k, j)) > zero_tol)) subset = false;
            if (subset) graph.edges.emplace_back(i, j);
        }
    return graph;
}

Classification classify_mixtures(const Matrix& y, const std::array<Index, 3>& dims, double tau, double thresh) {
    const Index j = y.cols();
    std::vector<Matrix> bases;
    Classification out;
    out.graph.vertices = j;
    for (Index i = 0; i < j; ++i) {
        const DenseTensor h = hankelize(Vector(y.col(i)), dims[0], dims[1], dims[2]);
        bases.push_back(column_basis(unfold_mode(h, 0), RankRule{tau, 1e-10}));
        out.ranks.push_back(bases.back().cols());
    }
    out.scores = Eigen::MatrixXd::Zero(j, j);
    for (Index a = 0; a < j; ++a)
        for (Index b = 0; b < j; ++b) {
            if (a == b) continue;
            const auto inc = subspace_inclusion(bases[static_cast<std::size_t>(a)], bases[static_cast<std::size_t>(b)], thresh);
            out.scores(a, b) = inc.score;
            if (inc.included) out.graph.edges.emplace_back(a, b);
        }
    return out;
}

GraphScore score_graph(const MixtureGraph& predicted, const MixtureGraph& truth) {
    if (predicted.vertices != truth.vertices)
        throw DimensionMismatch("graphs have different vertex counts (" + std::to_string(predicted.vertices) +
                                " vs " + std::to_string(truth.vertices) + ")");
    GraphScore s;
    for (const auto& e : predicted.edges) {
        if (truth.has_edge(e.first, e.second))
            ++s.true_positives;
        else
            ++s.false_positives;
    }
    for (const auto& e : truth.edges)
        if (!predicted.has_edge(e.first, e.second)) ++s.false_negatives;
    const Index predicted_count = s.true_positives + s.false_positives;
    const Index truth_count = s.true_positives + s.false_negatives;
    s.precision = predicted_count > 0 ? static_cast<double>(s.true_positives) / static_cast<double>(predicted_count) : 1.0;
    s.recall = truth_count > 0 ? static_cast<double>(s.true_positives) / static_cast<double>(truth_count) : 1.0;
    return s;
}

BssRun run_bss(const BssParams& params) { return run_bss(reference_sources(), params); }

BssRun run_bss(const std::vector<ExpPolySignal>& sources, const BssParams& params) {
    BssRun run;
    run.experiment = generate_experiment(sources, params);
    run.truth = ground_truth_graph(run.experiment.g);
    run.classification = classify_mixtures(run.experiment.noisy, params.dims, params.tau, params.thresh);
    run.score = score_graph(run.classification.graph, run.truth);
    return run;
}

} // namespace tensim
