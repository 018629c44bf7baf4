#include "support.hpp"

#include "tensim/error.hpp"
#include "tensim/similarity.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

using namespace tensim;
using namespace tensim::testing;

namespace {

// 3x3x4 pair whose mode-1 and mode-2 linking matrices share a minimal
// polynomial but have swapped multiplicities.
std::pair<DenseTensor, DenseTensor> counterexample(Complex l1, Complex l2, Rng& rng) {
    DenseTensor a({3, 3, 4});
    for (Index k = 0; k < 4; ++k) {
        a({0, 1, k}) = random_complex(rng);
        a({0, 2, k}) = random_complex(rng);
        a({1, 0, k}) = random_complex(rng);
        a({2, 0, k}) = random_complex(rng);
    }
    const Matrix m1 = Eigen::Vector3cd(l2, l1, l1).asDiagonal();
    return {a, mode_product(a, m1.transpose(), 0)};
}

// Third-order tensor built from a sampled signal: entry (i,j,k) = f(i+j+k).
DenseTensor hankel_of(const std::function<Complex(double)>& f, Index n) {
    DenseTensor t({n, n, n});
    odometer(t.dims(), [&](const std::vector<Index>& i) { t(i) = f(static_cast<double>(i[0] + i[1] + i[2])); });
    return t;
}

std::vector<Index> sorted(std::vector<Index> v) {
    std::sort(v.begin(), v.end());
    return v;
}

// Index of the reported term whose lambda is closest to `target`.
std::size_t match(const std::vector<Complex>& lambdas, Complex target) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < lambdas.size(); ++r)
        if (std::abs(lambdas[r] - target) < std::abs(lambdas[best] - target)) best = r;
    return best;
}

} // namespace

TEST(CompressPair, IdenticalInputs) {
    Rng rng(31);
    const DenseTensor a = random_tensor({4, 5, 3}, rng);
    const auto p = compress_pair(a, a, 3);
    EXPECT_EQ(p.a.data(), p.b.data());
    for (bool ok : p.row_inclusion_ok) EXPECT_TRUE(ok);
}

TEST(CompressPair, LowRankRoundTrip) {
    Rng rng(32);
    const DenseTensor core = random_tensor({2, 3, 3}, rng);
    const DenseTensor a = mode_product(mode_product(core, random_matrix(5, 2, rng), 0), random_matrix(4, 3, rng), 1);
    const auto p = compress_pair(a, Complex(3.0) * a, 2);
    EXPECT_EQ(p.a.dims(), (std::vector<Index>{2, 3, 3}));
    EXPECT_LT(rel_diff(decompress(p.a, p.u), a), 1e-12);
    for (Index n = 0; n < 2; ++n) {
        const Matrix& u = p.u[static_cast<std::size_t>(n)];
        EXPECT_LT((u * u.adjoint() - Matrix::Identity(u.rows(), u.rows())).norm(), 1e-12);
        Eigen::JacobiSVD<Matrix> svd(unfold_mode(p.a, n));
        EXPECT_GT(svd.singularValues().minCoeff(), 1e-8 * svd.singularValues()(0));
    }
}

TEST(CompressPair, IndependentBFailsInclusion) {
    Rng rng(33);
    const DenseTensor core = random_tensor({2, 2, 2}, rng);
    DenseTensor a = core;
    for (Index n = 0; n < 3; ++n) a = mode_product(a, random_matrix(5, 2, rng), n);
    const DenseTensor b = random_tensor({5, 5, 5}, rng);
    const auto p = compress_pair(a, b, 3);
    EXPECT_TRUE(std::find(p.row_inclusion_ok.begin(), p.row_inclusion_ok.end(), false) != p.row_inclusion_ok.end());
    EXPECT_EQ(analyze_similarity(a, b).verdict, Verdict::InclusionFailed);
}

TEST(LinkingMatrices, ModeOneConstruction) {
    Rng rng(34);
    const DenseTensor a = random_tensor({4, 5, 6}, rng);
    const Matrix m = random_matrix(4, 4, rng);
    const auto res = linking_matrices(a, mode_product(a, m.transpose(), 0), 2, 1e-8);
    ASSERT_EQ(res.matrices.size(), 1u);
    EXPECT_LT(rel_diff(res.matrices[0].m, m), 1e-10);
    // A generic mode-1 transform leaves the mode-2 columns outside col(A_(2)).
    ASSERT_FALSE(res.ok());
    EXPECT_EQ(res.failure->mode, 1);
    EXPECT_THROW(linking_matrices(a, a, 1, 1e-8), InvalidArgument);
}

TEST(LinkingMatrices, ScaledCopyAndUnrelated) {
    Rng rng(35);
    const DenseTensor a = random_tensor({3, 4, 5}, rng);
    const auto res = linking_matrices(a, Complex(3.0) * a, 3, 1e-8);
    ASSERT_TRUE(res.ok());
    for (const auto& l : res.matrices) EXPECT_LT((l.m - 3.0 * Matrix::Identity(l.m.rows(), l.m.rows())).norm(), 1e-10);

    const DenseTensor b = random_tensor({3, 4, 5}, rng);
    const auto bad = linking_matrices(a, b, 3, 1e-8);
    ASSERT_FALSE(bad.ok());
    EXPECT_GT(bad.failure->residual, 1e-8);
    EXPECT_EQ(bad.failure->mode, 0);
}

TEST(AnalyzeSimilarity, ScaledCopy) {
    Rng rng(36);
    const DenseTensor a = random_tensor({3, 4, 5}, rng);
    const auto rep = analyze_similarity(a, Complex(2.0) * a);
    EXPECT_EQ(rep.verdict, Verdict::SameScaledTerms);
    ASSERT_EQ(rep.terms, 1);
    EXPECT_LT(std::abs(rep.lambdas[0] - 2.0), 1e-10);
    for (Index n = 0; n < 3; ++n) EXPECT_EQ(rep.multiplicities[static_cast<std::size_t>(n)][0], rep.compressed_dims[static_cast<std::size_t>(n)]);
    EXPECT_TRUE(rep.spectra_agree);
    EXPECT_TRUE(rep.zero_scalings.empty());
}

TEST(AnalyzeSimilarity, ThreeTermSynthetic) {
    Rng rng(37);
    const std::vector<std::vector<Index>> ranks{{2, 2}, {1, 3}, {2, 1}};
    const std::vector<Complex> scalings{2.0, -1.0, 0.5};
    const auto p = make_block_term_pair({6, 7, 4}, 2, ranks, scalings, rng);
    SimilarityConfig cfg;
    cfg.modes = 2;
    const auto run = run_similarity(p.a, p.b, cfg);
    const auto& rep = run.report;
    ASSERT_EQ(rep.verdict, Verdict::SameScaledTerms) << rep.message;
    ASSERT_EQ(rep.terms, 3);
    for (std::size_t r = 0; r < 3; ++r) EXPECT_LT(std::abs(rep.lambdas[r] - scalings[r]), 1e-8);
    EXPECT_EQ(rep.multiplicities[0], (std::vector<Index>{2, 1, 2}));
    EXPECT_EQ(rep.multiplicities[1], (std::vector<Index>{2, 3, 1}));
    EXPECT_EQ(rep.compressed_dims, (std::vector<Index>{5, 6, 4}));

    ASSERT_TRUE(run.terms.has_value());
    const auto& td = *run.terms;
    EXPECT_LT(td.off_block_mass, 1e-8);
    EXPECT_LT(td.a_reconstruction_error, 1e-8);
    EXPECT_LT(td.b_reconstruction_error, 1e-8);
    for (const auto& w : td.intertwining) EXPECT_LT(w.residual, 1e-8);
    for (Index r = 0; r < 3; ++r) {
        const DenseTensor ar = td.full_term_a(r);
        const DenseTensor br = td.full_term_b(r);
        EXPECT_LT(rel_diff(ar, p.terms[static_cast<std::size_t>(r)]), 1e-8) << "term " << r;
        EXPECT_LT((br - td.lambdas[static_cast<std::size_t>(r)] * ar).norm() / ar.norm(), 1e-8);
        EXPECT_EQ(td.cores[static_cast<std::size_t>(r)].dims()[0], ranks[static_cast<std::size_t>(r)][0]);
    }
}

TEST(AnalyzeSimilarity, Counterexample) {
    Rng rng(38);
    const auto [a, b] = counterexample(1.0, 3.0, rng);
    SimilarityConfig cfg;
    cfg.modes = 2;
    const auto rep = analyze_similarity(a, b, cfg);
    ASSERT_EQ(rep.terms, 2);
    EXPECT_LT(std::abs(rep.lambdas[0] - 3.0), 1e-10);
    EXPECT_LT(std::abs(rep.lambdas[1] - 1.0), 1e-10);
    EXPECT_EQ(rep.multiplicities[0], (std::vector<Index>{1, 2}));
    EXPECT_EQ(rep.multiplicities[1], (std::vector<Index>{2, 1}));
    EXPECT_EQ(rep.verdict, Verdict::SameScaledTerms);
    // The four nonzero fibers make the mode-3 unfolding invertible on its
    // support, so the third mode links as well and splits (2,2).
    const auto all = analyze_similarity(a, b);
    EXPECT_EQ(all.verdict, Verdict::SameScaledTerms);
    EXPECT_EQ(all.multiplicities[2], (std::vector<Index>{2, 2}));
}

TEST(AnalyzeSimilarity, JordanStructureIsNotScalar) {
    // Shift of t * 0.9^t: the linking matrices carry a 2x2 Jordan block.
    const auto f = [](double t) { return Complex(t * std::pow(0.9, t)); };
    const auto g = [&](double t) { return f(t + 1.0); };
    const auto run = run_similarity(hankel_of(f, 6), hankel_of(g, 6));
    const auto& rep = run.report;
    ASSERT_EQ(rep.verdict, Verdict::SharedStructureNonScalar) << rep.message;
    ASSERT_EQ(rep.terms, 1);
    EXPECT_LT(std::abs(rep.lambdas[0] - 0.9), 1e-6);
    for (const auto& nil : rep.nilpotency) EXPECT_EQ(nil[0], 2);
    ASSERT_TRUE(run.terms.has_value());
    EXPECT_LT(run.terms->a_reconstruction_error, 1e-8);
    EXPECT_LT(run.terms->b_reconstruction_error, 1e-8);
}

TEST(AnalyzeSimilarity, DistinctExponentialsAreScaledTerms) {
    const auto f = [](double t) { return std::pow(Complex(0.8), t) + std::pow(Complex(-0.5, 0.6), t); };
    const auto g = [&](double t) { return f(t + 1.0); };
    const auto rep = analyze_similarity(hankel_of(f, 5), hankel_of(g, 5));
    ASSERT_EQ(rep.verdict, Verdict::SameScaledTerms) << rep.message;
    ASSERT_EQ(rep.terms, 2);
    EXPECT_LT(std::abs(rep.lambdas[match(rep.lambdas, 0.8)] - 0.8), 1e-8);
    EXPECT_LT(std::abs(rep.lambdas[match(rep.lambdas, Complex(-0.5, 0.6))] - Complex(-0.5, 0.6)), 1e-8);
}

TEST(AnalyzeSimilarity, ZeroScalingIsFlagged) {
    Rng rng(39);
    const auto p = make_block_term_pair({5, 5, 3}, 2, {{2, 2}, {2, 2}}, {1.5, 0.0}, rng);
    SimilarityConfig cfg;
    cfg.modes = 2;
    const auto rep = analyze_similarity(p.a, p.b, cfg);
    EXPECT_EQ(rep.verdict, Verdict::SameScaledTerms) << rep.message;
    ASSERT_EQ(rep.zero_scalings.size(), 1u);
    EXPECT_LT(std::abs(rep.lambdas[static_cast<std::size_t>(rep.zero_scalings[0])]), 1e-8);
}

TEST(AnalyzeSimilarity, Errors) {
    Rng rng(40);
    const DenseTensor a = random_tensor({3, 3, 3}, rng);
    EXPECT_THROW(analyze_similarity(a, random_tensor({3, 3, 4}, rng)), DimensionMismatch);
    SimilarityConfig one;
    one.modes = 1;
    EXPECT_THROW(analyze_similarity(a, a, one), InvalidArgument);
    SimilarityConfig four;
    four.modes = 4;
    EXPECT_THROW(analyze_similarity(a, a, four), InvalidArgument);
    EXPECT_THROW(analyze_similarity(DenseTensor({3, 3, 3}), a), InvalidArgument);
}

TEST(AnalyzeSimilarity, IllConditionedIsUnreliable) {
    Rng rng(41);
    const auto p = make_block_term_pair({4, 4, 3}, 2, {{2, 2}, {2, 2}}, {1.0, 1.0 + 1e-4}, rng);
    SimilarityConfig cfg;
    cfg.modes = 2;
    cfg.eig_tol = 1e-9;
    cfg.cond_ceiling = 1.0 + 1e-12;
    const auto rep = analyze_similarity(p.a, p.b, cfg);
    EXPECT_EQ(rep.verdict, Verdict::Unreliable);
}

TEST(RecoverTerms, SingleTerm) {
    Rng rng(42);
    const DenseTensor a = random_tensor({3, 3, 2}, rng);
    const DenseTensor b = Complex(-2.0) * a;
    const auto link = linking_matrices(a, b, 3, 1e-8);
    ASSERT_TRUE(link.ok());
    const auto td = recover_terms(a, b, link.matrices);
    EXPECT_EQ(td.terms, 1);
    EXPECT_EQ(td.off_block_mass, 0.0);
    EXPECT_LT(rel_diff(td.term_a(0), a), 1e-10);
    EXPECT_LT(rel_diff(td.term_b(0), b), 1e-10);
}

TEST(RedundantInclusions, SingletonMatchesLinkingResidual) {
    Rng rng(43);
    const DenseTensor a = random_tensor({4, 3, 5}, rng);
    const DenseTensor b = mode_product(a, random_matrix(3, 3, rng), 1) + 1e-3 * random_tensor({4, 3, 5}, rng);
    const auto link = solve_linking(unfold_mode(a, 1), unfold_mode(b, 1), 1);
    EXPECT_NEAR(check_redundant_inclusions(a, b, link, ModeSet(3, {1})), link.residual, 1e-14);
    EXPECT_THROW(check_redundant_inclusions(a, b, link, ModeSet(3, {0, 2})), InvalidArgument);
}

TEST(RedundantInclusions, AllSupersetsOfMode) {
    Rng rng(44);
    for (const std::vector<Index> dims : {std::vector<Index>{3, 4, 2, 3}, std::vector<Index>{2, 3, 2, 2, 3}}) {
        const Index order = static_cast<Index>(dims.size());
        const DenseTensor a = random_tensor(dims, rng);
        for (Index n = 0; n < order; ++n) {
            const Matrix m = random_matrix(dims[static_cast<std::size_t>(n)], dims[static_cast<std::size_t>(n)], rng);
            const DenseTensor b = mode_product(a, m.transpose(), n);
            const auto link = solve_linking(unfold_mode(a, n), unfold_mode(b, n), n);
            for (int mask = 1; mask < (1 << order) - 1; ++mask) {
                if (!(mask & (1 << n))) continue;
                std::vector<Index> s;
                for (Index k = 0; k < order; ++k)
                    if (mask & (1 << k)) s.push_back(k);
                EXPECT_LT(check_redundant_inclusions(a, b, link, ModeSet(order, s)), 1e-10) << "n=" << n << " mask=" << mask;
            }
        }
    }
}

TEST(RedundantInclusions, KroneckerFactorPlacement) {
    // With the first listed mode of S varying fastest, the factor acting on
    // the second mode of S={2,3} is the slow (left) Kronecker factor.
    Rng rng(45);
    const DenseTensor a = random_tensor({2, 3, 2, 2}, rng);
    const Matrix m = random_matrix(3, 3, rng);
    const ModeSet s(4, {1, 2});
    const Matrix ms = modeset_linking_matrix(a.dims(), m, 1, s);
    EXPECT_LT(rel_diff(ms, kron(Matrix::Identity(2, 2), m)), 1e-15);
    const ModeSet s2(4, {0, 1});
    EXPECT_LT(rel_diff(modeset_linking_matrix(a.dims(), m, 1, s2), kron(m, Matrix::Identity(2, 2))), 1e-15);
}

TEST(Properties, SpectraAgreeAndMultiplicitiesMatch) {
    Rng rng(46);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<Index> dims{6, 5, 4};
        const Index terms = 1 + static_cast<Index>(trial % 3);
        const auto ranks = random_ranks(dims, 2, terms, rng);
        ASSERT_FALSE(ranks.empty());
        const auto scalings = random_scalings(terms, 0.3, rng);
        const auto p = make_block_term_pair(dims, 2, ranks, scalings, rng);
        SimilarityConfig cfg;
        cfg.modes = 2;
        const auto rep = analyze_similarity(p.a, p.b, cfg);
        ASSERT_EQ(rep.verdict, Verdict::SameScaledTerms) << rep.message;
        ASSERT_EQ(rep.terms, terms);
        EXPECT_TRUE(rep.spectra_agree);
        for (Index r = 0; r < terms; ++r) {
            const std::size_t k = match(rep.lambdas, scalings[static_cast<std::size_t>(r)]);
            EXPECT_LT(std::abs(rep.lambdas[k] - scalings[static_cast<std::size_t>(r)]), 1e-8);
            for (std::size_t n = 0; n < 2; ++n) {
                EXPECT_EQ(rep.multiplicities[n][k], ranks[static_cast<std::size_t>(r)][n]);
                EXPECT_LT(rep.eig_deviation[n][k], 1e-8);
            }
        }
    }
}

TEST(Properties, EqualDimsGiveSimilarLinkingMatrices) {
    Rng rng(47);
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<std::vector<Index>> ranks{{2, 2}, {1, 1}, {2, 2}};
        const auto p = make_block_term_pair({5, 5, 4}, 2, ranks, random_scalings(3, 0.3, rng), rng);
        // A generic combination of the mode-3 slices is nonsingular.
        Matrix combo = Matrix::Zero(5, 5);
        for (Index k = 0; k < 4; ++k) {
            const Complex c = random_complex(rng);
            for (Index i = 0; i < 5; ++i)
                for (Index j = 0; j < 5; ++j) combo(i, j) += c * p.a({i, j, k});
        }
        Eigen::JacobiSVD<Matrix> svd(combo);
        ASSERT_GT(svd.singularValues()(4), 1e-8);
        SimilarityConfig cfg;
        cfg.modes = 2;
        const auto rep = analyze_similarity(p.a, p.b, cfg);
        ASSERT_EQ(rep.verdict, Verdict::SameScaledTerms) << rep.message;
        EXPECT_EQ(rep.multiplicities[0], rep.multiplicities[1]);
    }
}

TEST(Properties, TermPermutationInvariance) {
    Rng rng(48);
    const std::vector<Index> dims{6, 6, 3};
    const std::vector<std::vector<Index>> ranks{{2, 1}, {1, 3}, {3, 2}};
    const std::vector<Complex> scalings{Complex(0.5, 1.0), -2.0, 1.25};
    const auto p = make_block_term_pair(dims, 2, ranks, scalings, rng);
    SimilarityConfig cfg;
    cfg.modes = 2;
    const auto ref = analyze_similarity(p.a, p.b, cfg);
    const std::vector<std::size_t> perm{2, 0, 1};
    DenseTensor a(dims), b(dims);
    for (std::size_t i : perm) {
        a += p.terms[i];
        b += scalings[i] * p.terms[i];
    }
    const auto rep = analyze_similarity(a, b, cfg);
    EXPECT_EQ(rep.verdict, ref.verdict);
    EXPECT_EQ(rep.terms, ref.terms);
    for (std::size_t r = 0; r < 3; ++r) EXPECT_LT(std::abs(rep.lambdas[r] - ref.lambdas[r]), 1e-8);
    for (std::size_t n = 0; n < 2; ++n) EXPECT_EQ(sorted(rep.multiplicities[n]), sorted(ref.multiplicities[n]));
}
