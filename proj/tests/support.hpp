#pragma once

// Shared helpers for the test suites: seeded random data, brute-force
// oracles that work straight from index formulas, and a generator of tensor
// pairs built from known block terms.

#include "tensim/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace tensim::testing {

using Rng = std::mt19937_64;

inline Complex random_complex(Rng& rng) {
    std::normal_distribution<double> nd;
    return {nd(rng), nd(rng)};
}

inline Matrix random_matrix(Index rows, Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = random_complex(rng);
    return m;
}

inline Matrix random_orthonormal(Index rows, Index cols, Rng& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(rows, cols, rng));
    return qr.householderQ() * Matrix::Identity(rows, cols);
}

inline DenseTensor random_tensor(std::vector<Index> dims, Rng& rng) {
    DenseTensor t(std::move(dims));
    for (Index i = 0; i < t.size(); ++i) t[i] = random_complex(rng);
    return t;
}

inline DenseTensor iota_tensor(std::vector<Index> dims) {
    DenseTensor t(std::move(dims));
    for (Index i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i + 1);
    return t;
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
    const double n = std::max(a.norm(), b.norm());
    return n == 0.0 ? 0.0 : (a - b).norm() / n;
}

inline double rel_diff(const DenseTensor& a, const DenseTensor& b) {
    const double n = std::max(a.norm(), b.norm());
    return n == 0.0 ? 0.0 : (a - b).norm() / n;
}

// Calls f(multi_index) for every index tuple of `dims`, first index fastest.
template <typename F>
void odometer(const std::vector<Index>& dims, F&& f) {
    std::vector<Index> idx(dims.size(), 0);
    Index total = 1;
    for (Index d : dims) total *= d;
    for (Index k = 0; k < total; ++k) {
        f(idx);
        for (std::size_t m = 0; m < dims.size(); ++m) {
            if (++idx[m] < dims[m]) break;
            idx[m] = 0;
        }
    }
}

// Mode-n unfolding evaluated entry by entry from the index map
// row = 1 + sum_{k != n} (i_k - 1) prod_{l < k, l != n} I_l, col = i_n.
inline Matrix brute_unfold(const DenseTensor& a, Index n) {
    const auto& dims = a.dims();
    Index rows = 1;
    for (std::size_t k = 0; k < dims.size(); ++k)
        if (static_cast<Index>(k) != n) rows *= dims[k];
    Matrix m = Matrix::Zero(rows, a.dim(n));
    odometer(dims, [&](const std::vector<Index>& idx) {
        Index row = 0;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            if (static_cast<Index>(k) == n) continue;
            Index stride = 1;
            for (std::size_t l = 0; l < k; ++l)
                if (static_cast<Index>(l) != n) stride *= dims[l];
            row += idx[k] * stride;
        }
        m(row, idx[static_cast<std::size_t>(n)]) = a(idx);
    });
    return m;
}

// R(..., j, ...) = sum_i X(j, i) D(..., i, ...), by explicit summation.
inline DenseTensor brute_mode_product(const DenseTensor& d, const Matrix& x, Index n) {
    auto dims = d.dims();
    dims[static_cast<std::size_t>(n)] = x.rows();
    DenseTensor r(dims);
    odometer(dims, [&](const std::vector<Index>& idx) {
        std::vector<Index> src = idx;
        Complex acc = 0.0;
        for (Index i = 0; i < d.dim(n); ++i) {
            src[static_cast<std::size_t>(n)] = i;
            acc += x(idx[static_cast<std::size_t>(n)], i) * d(src);
        }
        r(idx) = acc;
    });
    return r;
}

// Standard Kronecker product (first factor varies slowest).
inline Matrix kron(const Matrix& x, const Matrix& y) {
    Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.cols(); ++j)
            out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return out;
}

// Kronecker product of factors listed in increasing mode order, arranged so
// that the first factor acts on the fastest-varying index. This is the
// ordering that matches first-index-fastest linearization.
inline Matrix kron_modes(const std::vector<Matrix>& factors) {
    Matrix out = Matrix::Identity(1, 1);
    for (const auto& f : factors) out = kron(f, out);
    return out;
}

// A = sum_r D_r x_1 X_r^(1) ... x_k X_r^(k) and B = sum_r lambda_r (same term).
struct BlockTermPair {
    DenseTensor a;
    DenseTensor b;
    // ranks[r][n] = L_nr for the analyzed modes n < k.
    std::vector<std::vector<Index>> ranks;
    std::vector<Complex> scalings;
    std::vector<DenseTensor> terms; // unscaled A_r
};

inline BlockTermPair make_block_term_pair(const std::vector<Index>& dims, Index modes,
                                          const std::vector<std::vector<Index>>& ranks,
                                          const std::vector<Complex>& scalings, Rng& rng) {
    BlockTermPair p;
    p.a = DenseTensor(dims);
    p.b = DenseTensor(dims);
    p.ranks = ranks;
    p.scalings = scalings;
    for (std::size_t r = 0; r < ranks.size(); ++r) {
        auto core_dims = dims;
        for (Index n = 0; n < modes; ++n) core_dims[static_cast<std::size_t>(n)] = ranks[r][static_cast<std::size_t>(n)];
        DenseTensor term = random_tensor(core_dims, rng);
        for (Index n = 0; n < modes; ++n)
            term = mode_product(term, random_matrix(dims[static_cast<std::size_t>(n)], ranks[r][static_cast<std::size_t>(n)], rng), n);
        p.a += term;
        p.b += scalings[r] * term;
        p.terms.push_back(std::move(term));
    }
    return p;
}

// Random ranks L_nr >= 1 with sum_r L_nr <= I_n in every analyzed mode and
// each term's core generic enough to keep its ranks (L_nr <= product of the
// core's other dimensions).
inline std::vector<std::vector<Index>> random_ranks(const std::vector<Index>& dims, Index modes, Index terms, Rng& rng) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<std::vector<Index>> ranks(static_cast<std::size_t>(terms), std::vector<Index>(static_cast<std::size_t>(modes)));
        bool ok = true;
        for (Index n = 0; n < modes && ok; ++n) {
            Index budget = dims[static_cast<std::size_t>(n)];
            if (budget < terms) { ok = false; break; }
            for (Index r = 0; r < terms; ++r) {
                const Index remaining = terms - r - 1;
                const Index hi = std::min<Index>(3, budget - remaining);
                std::uniform_int_distribution<Index> pick(1, hi);
                ranks[static_cast<std::size_t>(r)][static_cast<std::size_t>(n)] = pick(rng);
                budget -= ranks[static_cast<std::size_t>(r)][static_cast<std::size_t>(n)];
            }
        }
        if (!ok) continue;
        for (Index r = 0; r < terms && ok; ++r)
            for (Index n = 0; n < modes && ok; ++n) {
                Index others = 1;
                for (Index k = 0; k < static_cast<Index>(dims.size()); ++k) {
                    if (k == n) continue;
                    others *= k < modes ? ranks[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] : dims[static_cast<std::size_t>(k)];
                }
                ok = ranks[static_cast<std::size_t>(r)][static_cast<std::size_t>(n)] <= others;
            }
        if (ok) return ranks;
    }
    return {};
}

// Nonzero complex scalings pairwise at least `gap` apart.
inline std::vector<Complex> random_scalings(Index terms, double gap, Rng& rng) {
    std::uniform_real_distribution<double> mag(0.5, 3.0);
    std::uniform_real_distribution<double> phase(-3.14159, 3.14159);
    std::vector<Complex> out;
    while (static_cast<Index>(out.size()) < terms) {
        const Complex c = std::polar(mag(rng), phase(rng));
        bool far = true;
        for (const auto& o : out) far = far && std::abs(o - c) >= gap;
        if (far) out.push_back(c);
    }
    return out;
}

} // namespace tensim::testing
