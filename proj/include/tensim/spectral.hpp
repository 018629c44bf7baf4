#pragma once

#include "tensim/tensor.hpp"

#include <limits>
#include <span>
#include <vector>

namespace tensim {

// Least-squares solution M of A_unf * M = B_unf for one mode.
struct LinkingMatrix {
    Index mode = 0;
    Matrix m;
    // ||A_unf M - B_unf||_F / ||B_unf||_F (absolute when B_unf is zero).
    double residual = 0.0;
};

// M = argmin ||A_unf M - B_unf||_F through a column-pivoted QR of A_unf.
// Throws NumericalError when A_unf is rank deficient.
LinkingMatrix solve_linking(const Matrix& a_unf, const Matrix& b_unf, Index mode = 0);

struct EigenCluster {
    Complex lambda;       // mean of the member eigenvalues
    Index multiplicity = 0;
    double spread = 0.0;  // max distance of a member to lambda
    Index nilpotency = 1; // exponent of (x - lambda) in the minimal polynomial
};

// Single-linkage clustering: eigenvalues closer than `tol` share a cluster.
// Clusters come back ordered by decreasing |lambda|, then increasing phase.
std::vector<EigenCluster> cluster_eigenvalues(std::span<const Complex> eigs, double tol);

// Same ordering rule applied to a list of centers; returns the permutation.
std::vector<Index> spectral_order(std::span<const Complex> centers, double tol);

// M S = S Bdiag(T_1, ..., T_R) with S = [S_1 ... S_R]; each S_r is an
// orthonormal basis of the invariant subspace belonging to cluster r.
struct PrimaryDecomposition {
    Matrix s;
    std::vector<Matrix> blocks;
    std::vector<EigenCluster> clusters;
    double cond_s = 1.0;
    // ||M S - S Bdiag(T)||_F / ||M||_F
    double residual = 0.0;

    // Column offset of block r inside s.
    Index offset(std::size_t r) const;
    Matrix basis(std::size_t r) const { return s.middleCols(offset(r), clusters[r].multiplicity); }
};

// Default clustering tolerance for a matrix: max(1e-8, 1e-6 ||M||_2).
double default_eig_tol(const Matrix& m);

// Primary decomposition over C. Eigenvalues come from a complex Schur form,
// are clustered with `tol`, and every cluster's invariant subspace is read off
// the leading Schur vectors after reordering that cluster to the top. The
// nilpotency index of each cluster is the power at which the rank of
// (T_r - lambda_r I)^k stops decreasing. Throws NumericalError when
// cond(S) exceeds `cond_ceiling`.
PrimaryDecomposition primary_decomposition(const Matrix& m, double tol,
                                           double cond_ceiling = std::numeric_limits<double>::infinity());

// Variant with prescribed cluster centers: every eigenvalue joins the
// nearest center and the blocks follow the order of `centers`. Centers that
// attract no eigenvalue produce empty blocks (multiplicity 0).
PrimaryDecomposition primary_decomposition(const Matrix& m, std::span<const Complex> centers, double tol);

// ||T - lambda I||_F <= tol * max(1, |lambda|) * sqrt(size).
bool is_scalar_block(const Matrix& t, Complex lambda, double tol);

struct InclusionResult {
    bool included = false;
    double score = 0.0;
};

// Numerical test of col(U) in col(V) for orthonormal bases: the score is the
// (r_V + 1)-st singular value of [U V] and inclusion means score < thresh.
InclusionResult subspace_inclusion(const Matrix& u, const Matrix& v, double thresh);

// Orthonormal basis of the column space of `m` cut at estimate_rank.
Matrix column_basis(const Matrix& m, const RankRule& rule);

} // namespace tensim
