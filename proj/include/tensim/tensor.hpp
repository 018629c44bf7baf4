#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace tensim {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Dense complex N-way array (N >= 2) stored first-index-fastest: the entry
// (i_1, ..., i_N) lives at linear offset i_1 + I_1 * (i_2 + I_2 * (...)).
//
// Modes are zero-based in the C++ interface. Text formats and the CLI use
// one-based mode numbers.
class DenseTensor {
public:
    DenseTensor() = default;

    // Zero tensor of the given shape.
    explicit DenseTensor(std::vector<Index> dims);
    DenseTensor(std::vector<Index> dims, Vector data);

    static DenseTensor zeros(std::vector<Index> dims) { return DenseTensor(std::move(dims)); }

    Index order() const { return static_cast<Index>(dims_.size()); }
    const std::vector<Index>& dims() const { return dims_; }
    Index dim(Index n) const { return dims_.at(static_cast<std::size_t>(n)); }
    Index size() const { return data_.size(); }

    const Vector& data() const { return data_; }
    Vector& data() { return data_; }

    Complex& operator[](Index linear) { return data_[linear]; }
    const Complex& operator[](Index linear) const { return data_[linear]; }

    Complex& operator()(std::span<const Index> idx) { return data_[linear_index(idx)]; }
    const Complex& operator()(std::span<const Index> idx) const { return data_[linear_index(idx)]; }
    Complex& operator()(std::initializer_list<Index> idx) {
        return data_[linear_index({idx.begin(), idx.size()})];
    }
    const Complex& operator()(std::initializer_list<Index> idx) const {
        return data_[linear_index({idx.begin(), idx.size()})];
    }

    Index linear_index(std::span<const Index> idx) const;

    double norm() const { return data_.norm(); }

    DenseTensor& operator+=(const DenseTensor& other);
    DenseTensor& operator-=(const DenseTensor& other);
    DenseTensor& operator*=(Complex s);

    friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
    friend DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
    friend DenseTensor operator*(Complex s, DenseTensor a) { return a *= s; }
    friend DenseTensor operator*(DenseTensor a, Complex s) { return a *= s; }

private:
    std::vector<Index> dims_;
    Vector data_;
};

// Product of all entries of `dims`.
Index product(std::span<const Index> dims);

// Nonempty proper subset S of the modes {0, ..., N-1} of an order-N tensor.
// Modes are kept in increasing order; the complement is increasing too.
class ModeSet {
public:
    ModeSet(Index order, std::vector<Index> modes);

    Index order() const { return order_; }
    const std::vector<Index>& modes() const { return modes_; }
    const std::vector<Index>& complement() const { return complement_; }
    bool contains(Index n) const;

private:
    Index order_;
    std::vector<Index> modes_;
    std::vector<Index> complement_;
};

// Mode-n matrix representation: a (prod_{k != n} I_k) x I_n matrix whose
// columns are the vectorized mode-n slices of A.
Matrix unfold_mode(const DenseTensor& a, Index n);

// Mode-S matrix representation: (prod_{k in S^c} I_k) x (prod_{k in S} I_k).
// Row and column indices linearize their index groups first-index-fastest.
Matrix unfold_modeset(const DenseTensor& a, const ModeSet& s);

// Inverse of unfold_mode.
DenseTensor fold_mode(const Matrix& m, std::vector<Index> dims, Index n);

// Inverse of unfold_modeset.
DenseTensor fold_modeset(const Matrix& m, std::vector<Index> dims, const ModeSet& s);

// R = D x_n X, i.e. unfold_mode(R, n) == unfold_mode(D, n) * X^T. X must have
// dims(D)[n] columns; the result has X.rows() entries in mode n.
DenseTensor mode_product(const DenseTensor& d, const Matrix& x, Index n);

struct ModeFactor {
    Matrix matrix;
    Index mode;
};

// Applies every factor in turn. At most one factor per mode; the result does
// not depend on the order of `factors`.
DenseTensor multi_mode_product(const DenseTensor& d, std::span<const ModeFactor> factors);

// Gap-ratio rank rule. The absolute floor used for a list of singular values
// is rel_floor * sigma_1.
struct RankRule {
    double gap_ratio = 2.3;
    double rel_floor = 1e-10;
};

// Largest k such that sigma_k > abs_floor and sigma_k / sigma_{k+1} > tau,
// where values at or below the floor count as zero. Returns the full length
// when there is no gap and every value is above the floor; 0 when
// sigma_1 <= abs_floor.
Index estimate_rank(std::span<const double> singular_values, double tau, double abs_floor);

// Singular values of unfold_mode(a, n), descending.
Eigen::VectorXd mode_singular_values(const DenseTensor& a, Index n);

// Per-mode ranks of the unfoldings under `rule`.
std::vector<Index> ml_rank(const DenseTensor& a, const RankRule& rule = {});

struct MlsvdResult {
    DenseTensor core;
    // factors[n] is I_n x r_n with orthonormal columns spanning mode-n fibers.
    std::vector<Matrix> factors;
    double rel_error = 0.0;
};

// Truncated multilinear SVD, optionally refined by `refine_iters` sweeps of
// alternating subspace iteration. rel_error = ||A - core x_1 U_1 ... ||_F / ||A||_F
// (0 for the zero tensor).
MlsvdResult mlsvd_truncate(const DenseTensor& a, std::span<const Index> target_ranks,
                           int refine_iters = 0);

// Reassembles core x_1 U_1 ... x_N U_N.
DenseTensor mlsvd_reconstruct(const MlsvdResult& r);

struct DiagBlocks {
    std::vector<DenseTensor> blocks;
    double off_block_mass = 0.0;
};

// Splits the leading partitions.size() modes of D into consecutive index
// blocks (partitions[n][r] entries for term r) and returns the diagonal
// blocks D(V_1r, ..., V_kr, :, ..., :) with the Frobenius norm of everything
// outside them. Every mode must be partitioned into the same number of blocks.
DiagBlocks extract_diag_blocks(const DenseTensor& d,
                               const std::vector<std::vector<Index>>& partitions);

} // namespace tensim
