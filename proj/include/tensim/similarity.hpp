#pragma once

#include "tensim/spectral.hpp"
#include "tensim/tensor.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tensim {

// Tolerances of the similarity pipeline. `modes` is the number of leading
// modes analyzed (2 <= modes <= N); 0 selects every mode.
struct SimilarityConfig {
    Index modes = 0;
    // Largest accepted relative residual of a linking system.
    double residual_tol = 1e-6;
    // Eigenvalue clustering tolerance; 0 picks max(1e-8, 1e-6 ||M_n||_2)
    // over the analyzed modes.
    double eig_tol = 0.0;
    double scalar_tol = 1e-6;
    // Relative residual allowed when projecting rows of B onto the row space of A.
    double inclusion_thresh = 1e-6;
    double cond_ceiling = 1e8;
    // Largest accepted off-block mass of the transformed core, relative to its norm.
    double block_tol = 1e-6;
    // Rank cut for the compression step. The default keeps every singular
    // value above the relative floor.
    RankRule compression{std::numeric_limits<double>::infinity(), 1e-10};
};

enum class Verdict {
    SameScaledTerms,
    SharedStructureNonScalar,
    InclusionFailed,
    Unreliable,
};

const char* to_string(Verdict v);

struct CompressedPair {
    DenseTensor a;
    DenseTensor b;
    // u[n] has orthonormal rows spanning the row space of unfold_mode(A~, n).
    std::vector<Matrix> u;
    std::vector<bool> row_inclusion_ok;
    // ||B~_(n) (I - P_n)||_F / ||B~_(n)||_F with P_n the row-space projector of A~_(n).
    std::vector<double> row_inclusion_residual;
};

// Compresses both tensors in the leading `modes` modes with bases computed
// from A~ alone: A = A~ x_1 conj(U_1) ... and likewise for B.
CompressedPair compress_pair(const DenseTensor& a_full, const DenseTensor& b_full, Index modes,
                             const RankRule& rule = SimilarityConfig{}.compression,
                             double inclusion_thresh = SimilarityConfig{}.inclusion_thresh);

// A~ = A x_1 U_1^T ... x_k U_k^T.
DenseTensor decompress(const DenseTensor& compressed, const std::vector<Matrix>& u);

struct InclusionFailure {
    Index mode = 0;
    double residual = 0.0;
};

struct LinkingResult {
    std::vector<LinkingMatrix> matrices;
    std::optional<InclusionFailure> failure;

    bool ok() const { return !failure.has_value(); }
};

// Solves unfold(B, n) = unfold(A, n) M_n for the leading `modes` modes and
// stops at the first mode whose residual exceeds residual_tol.
LinkingResult linking_matrices(const DenseTensor& a, const DenseTensor& b, Index modes, double residual_tol);

struct SimilarityReport {
    Verdict verdict = Verdict::Unreliable;
    Index modes = 0;
    Index terms = 0;
    // Across-mode averaged scalings, one per term.
    std::vector<Complex> lambdas;
    // multiplicities[n][r] = L_nr, nilpotency[n][r] = mu_r seen in mode n.
    std::vector<std::vector<Index>> multiplicities;
    std::vector<std::vector<Index>> nilpotency;
    std::vector<std::vector<bool>> scalar_block;
    // |center of term r in mode n - lambdas[r]|.
    std::vector<std::vector<double>> eig_deviation;
    std::vector<double> linking_residuals;
    std::vector<double> cond_s;
    std::vector<double> decomposition_residuals;
    std::vector<bool> row_inclusion_ok;
    std::vector<double> row_inclusion_residual;
    std::vector<Index> original_dims;
    std::vector<Index> compressed_dims;
    double eig_tol = 0.0;
    // Off-block Frobenius mass of A x_n S_n^T relative to its norm.
    double off_block_mass = 0.0;
    bool spectra_agree = false;
    // Terms whose scaling is numerically zero (present in A, absent from B).
    std::vector<Index> zero_scalings;
    std::optional<InclusionFailure> failure;
    std::string message;
};

// Full pipeline: compress, link, decompose every linking matrix against the
// global eigenvalue clusters, and classify.
SimilarityReport analyze_similarity(const DenseTensor& a_full, const DenseTensor& b_full,
                                    const SimilarityConfig& config = {});

struct IntertwiningResidual {
    Index term = 0;
    Index mode_a = 0;
    Index mode_b = 0;
    // ||D_r x_a T_ar^T - D_r x_b T_br^T||_F / ||D_r||_F
    double residual = 0.0;
};

struct TermDecomposition {
    Index terms = 0;
    std::vector<DenseTensor> cores;
    // factors[n] = S_n^{-T}; its column group r is X^(n)_r.
    std::vector<Matrix> factors;
    std::vector<std::vector<Index>> multiplicities;
    // blocks[n][r] = T_nr.
    std::vector<std::vector<Matrix>> blocks;
    std::vector<Complex> lambdas;
    double off_block_mass = 0.0;
    double a_reconstruction_error = 0.0;
    double b_reconstruction_error = 0.0;
    std::vector<IntertwiningResidual> intertwining;
    // Compression bases U_n of the analyzed pair; empty when the terms were
    // recovered from tensors given directly in compressed form.
    std::vector<Matrix> compression;

    Matrix factor(Index n, Index r) const;
    // A_r = D_r x_1 X^(1)_r ... x_k X^(k)_r.
    DenseTensor term_a(Index r) const;
    // B_r = (D_r x_1 T_1r^T) x_1 X^(1)_r ... x_k X^(k)_r.
    DenseTensor term_b(Index r) const;
    // Terms mapped back to the uncompressed space through `compression`.
    DenseTensor full_term_a(Index r) const;
    DenseTensor full_term_b(Index r) const;
};

// Recovers the block terms of the compressed pair (A, B) from their linking
// matrices. Throws NumericalError when the transformed core is not block
// diagonal within config.block_tol.
TermDecomposition recover_terms(const DenseTensor& a, const DenseTensor& b,
                                const std::vector<LinkingMatrix>& linking, const SimilarityConfig& config = {});

// Residual of unfold_modeset(A, S) M_S = unfold_modeset(B, S) with
// M_S built from the mode-n linking matrix by Kronecker products with
// identities over the other modes of S.
double check_redundant_inclusions(const DenseTensor& a, const DenseTensor& b, const LinkingMatrix& link,
                                  const ModeSet& s);

// M_S itself, for the column linearization used by unfold_modeset.
Matrix modeset_linking_matrix(const std::vector<Index>& dims, const Matrix& m_n, Index n, const ModeSet& s);

// Everything the CLI needs from one run.
struct SimilarityRun {
    SimilarityReport report;
    std::optional<TermDecomposition> terms;
    std::string terms_error;
};

SimilarityRun run_similarity(const DenseTensor& a_full, const DenseTensor& b_full,
                             const SimilarityConfig& config = {});

} // namespace tensim
