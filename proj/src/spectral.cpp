#include "tensim/spectral.hpp"

#include "tensim/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tensim {

namespace {

struct Labeling {
    std::vector<Index> labels; // cluster of each input eigenvalue
    std::vector<EigenCluster> clusters;
};

void fill_cluster_stats(std::span<const Complex> eigs, const std::vector<Index>& labels,
                        std::vector<EigenCluster>& clusters) {
    for (auto& c : clusters) {
        c.lambda = 0.0;
        c.multiplicity = 0;
        c.spread = 0.0;
    }
    for (std::size_t i = 0; i < eigs.size(); ++i) {
        auto& c = clusters[static_cast<std::size_t>(labels[i])];
        c.lambda += eigs[i];
        ++c.multiplicity;
    }
    for (auto& c : clusters)
        if (c.multiplicity > 0) c.lambda /= static_cast<double>(c.multiplicity);
    for (std::size_t i = 0; i < eigs.size(); ++i) {
        auto& c = clusters[static_cast<std::size_t>(labels[i])];
        c.spread = std::max(c.spread, std::abs(eigs[i] - c.lambda));
    }
}

Labeling single_linkage(std::span<const Complex> eigs, double tol) {
    const std::size_t n = eigs.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(eigs[i] - eigs[j]) <= tol) parent[find(i)] = find(j);

    // Provisional labels in order of first appearance.
    std::vector<Index> root_label(n, -1);
    std::vector<Index> labels(n);
    Index count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        if (root_label[r] < 0) root_label[r] = count++;
        labels[i] = root_label[r];
    }
    std::vector<EigenCluster> clusters(static_cast<std::size_t>(count));
    fill_cluster_stats(eigs, labels, clusters);

    std::vector<Complex> centers;
    for (const auto& c : clusters) centers.push_back(c.lambda);
    const auto order = spectral_order(centers, tol);
    std::vector<Index> rank_of(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank_of[static_cast<std::size_t>(order[r])] = static_cast<Index>(r);

    Labeling out;
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.labels[i] = rank_of[static_cast<std::size_t>(labels[i])];
    for (Index k : order) out.clusters.push_back(clusters[static_cast<std::size_t>(k)]);
    return out;
}

// Complex Givens rotation [c s; -conj(s) c] with [c s; -conj(s) c] [f; g] = [r; 0].
void make_givens(Complex f, Complex g, double& c, Complex& s) {
    if (g == Complex(0.0)) {
        c = 1.0;
        s = 0.0;
        return;
    }
    if (f == Complex(0.0)) {
        c = 0.0;
        s = std::conj(g) / std::abs(g);
        return;
    }
    const double nf = std::abs(f);
    const double ng = std::abs(g);
    const double d = std::hypot(nf, ng);
    c = nf / d;
    s = (f / nf) * std::conj(g) / d;
}

// Swaps the diagonal entries k and k+1 of the upper triangular T by a unitary
// similarity, updating the Schur vectors Q accordingly.
void swap_adjacent(Matrix& t, Matrix& q, Index k) {
    const Index n = t.rows();
    const Complex t11 = t(k, k);
    const Complex t22 = t(k + 1, k + 1);
    double c = 1.0;
    Complex s = 0.0;
    make_givens(t(k, k + 1), t22 - t11, c, s);

    for (Index j = k + 2; j < n; ++j) {
        const Complex a = t(k, j);
        const Complex b = t(k + 1, j);
        t(k, j) = c * a + s * b;
        t(k + 1, j) = c * b - std::conj(s) * a;
    }
    for (Index i = 0; i < k; ++i) {
        const Complex a = t(i, k);
        const Complex b = t(i, k + 1);
        t(i, k) = c * a + std::conj(s) * b;
        t(i, k + 1) = c * b - s * a;
    }
    t(k, k) = t22;
    t(k + 1, k + 1) = t11;
    for (Index i = 0; i < n; ++i) {
        const Complex a = q(i, k);
        const Complex b = q(i, k + 1);
        q(i, k) = c * a + std::conj(s) * b;
        q(i, k + 1) = c * b - s * a;
    }
}

// Moves the diagonal entries flagged in `select` to the leading positions,
// keeping their relative order.
void reorder_schur(Matrix& t, Matrix& q, std::vector<bool> select) {
    const Index n = t.rows();
    Index next = 0;
    for (Index k = 0; k < n; ++k) {
        if (!select[static_cast<std::size_t>(k)]) continue;
        for (Index j = k; j > next; --j) {
            swap_adjacent(t, q, j - 1);
            std::swap(select[static_cast<std::size_t>(j - 1)], select[static_cast<std::size_t>(j)]);
        }
        ++next;
    }
}

Index numerical_rank(const Matrix& m, double thresh) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    Index r = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv[i] > thresh) ++r;
    return r;
}

Index nilpotency_index(const Matrix& block, Complex lambda, double tol, double scale) {
    const Index size = block.rows();
    if (size == 0) return 1;
    const Matrix nil = block - lambda * Matrix::Identity(size, size);
    Matrix power = nil;
    double thresh = 10.0 * tol;
    Index prev = numerical_rank(power, thresh);
    for (Index k = 1; k < size; ++k) {
        power = power * nil;
        thresh *= scale;
        const Index next = numerical_rank(power, thresh);
        if (next == prev) return k;
        prev = next;
    }
    return size;
}

PrimaryDecomposition decompose_with_labels(const Matrix& m, const Eigen::ComplexSchur<Matrix>& schur,
                                           const std::vector<Index>& labels,
                                           std::vector<EigenCluster> clusters, double tol) {
    const Index n = m.rows();
    const double scale = std::max(1.0, m.norm());
    PrimaryDecomposition pd;
    pd.s = Matrix::Zero(n, n);
    Index col = 0;
    for (std::size_t r = 0; r < clusters.size(); ++r) {
        auto& cl = clusters[r];
        std::vector<bool> select(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) select[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i)] == static_cast<Index>(r);
        const Index size = cl.multiplicity;
        if (size == 0) {
            pd.blocks.emplace_back(0, 0);
            cl.nilpotency = 1;
            continue;
        }
        Matrix t = schur.matrixT();
        Matrix q = schur.matrixU();
        reorder_schur(t, q, std::move(select));
        pd.s.middleCols(col, size) = q.leftCols(size);
        Matrix block = t.topLeftCorner(size, size).triangularView<Eigen::Upper>();
        cl.nilpotency = std::min(size, nilpotency_index(block, cl.lambda, tol, scale));
        pd.blocks.push_back(std::move(block));
        col += size;
    }
    pd.clusters = std::move(clusters);

    Eigen::JacobiSVD<Matrix> svd(pd.s);
    const auto& sv = svd.singularValues();
    pd.cond_s = sv.size() == 0 ? 1.0 : (sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1]
                                                                  : std::numeric_limits<double>::infinity());

    Matrix bdiag = Matrix::Zero(n, n);
    for (std::size_t r = 0; r < pd.blocks.size(); ++r) {
        const Index sz = pd.blocks[r].rows();
        bdiag.block(pd.offset(r), pd.offset(r), sz, sz) = pd.blocks[r];
    }
    const double mnorm = m.norm();
    const double res = (m * pd.s - pd.s * bdiag).norm();
    pd.residual = mnorm > 0.0 ? res / mnorm : res;
    return pd;
}

void check_square(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw InvalidArgument("primary decomposition needs a nonempty square matrix");
}

} // namespace

LinkingMatrix solve_linking(const Matrix& a_unf, const Matrix& b_unf, Index mode) {
    if (a_unf.rows() != b_unf.rows())
        throw DimensionMismatch("solve_linking: unfoldings have different row counts");
    Eigen::ColPivHouseholderQR<Matrix> qr(a_unf);
    qr.setThreshold(1e-12);
    if (qr.rank() < a_unf.cols())
        throw NumericalError("solve_linking: mode-" + std::to_string(mode + 1) +
                             " unfolding is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                             std::to_string(a_unf.cols()) + "); compress the pair first");
    LinkingMatrix out;
    out.mode = mode;
    out.m = qr.solve(b_unf);
    const double bnorm = b_unf.norm();
    const double res = (a_unf * out.m - b_unf).norm();
    out.residual = bnorm > 0.0 ? res / bnorm : res;
    return out;
}

std::vector<Index> spectral_order(std::span<const Complex> centers, double tol) {
    std::vector<Index> order(centers.size());
    std::iota(order.begin(), order.end(), 0);
    auto at = [&](Index i) { return centers[static_cast<std::size_t>(i)]; };
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::abs(at(a)) > std::abs(at(b)); });
    // Within runs of (numerically) equal magnitude, order by phase.
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t end = start + 1;
        const double head = std::abs(at(order[start]));
        while (end < order.size() && head - std::abs(at(order[end])) <= tol) ++end;
        std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end),
                         [&](Index a, Index b) { return std::arg(at(a)) < std::arg(at(b)); });
        start = end;
    }
    return order;
}

std::vector<EigenCluster> cluster_eigenvalues(std::span<const Complex> eigs, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("cluster_eigenvalues: tolerance must be positive");
    return single_linkage(eigs, tol).clusters;
}

Index PrimaryDecomposition::offset(std::size_t r) const {
    Index off = 0;
    for (std::size_t k = 0; k < r; ++k) off += clusters[k].multiplicity;
    return off;
}

double default_eig_tol(const Matrix& m) {
    const double norm2 = m.size() == 0 ? 0.0 : Eigen::JacobiSVD<Matrix>(m).singularValues()[0];
    return std::max(1e-8, 1e-6 * norm2);
}

PrimaryDecomposition primary_decomposition(const Matrix& m, double tol, double cond_ceiling) {
    check_square(m);
    if (!(tol > 0.0)) throw InvalidArgument("primary_decomposition: tolerance must be positive");
    Eigen::ComplexSchur<Matrix> schur(m);
    if (schur.info() != Eigen::Success) throw NumericalError("complex Schur decomposition did not converge");
    const Vector eigs = schur.matrixT().diagonal();
    auto lab = single_linkage({eigs.data(), static_cast<std::size_t>(eigs.size())}, tol);
    auto pd = decompose_with_labels(m, schur, lab.labels, std::move(lab.clusters), tol);
    if (pd.cond_s > cond_ceiling)
        throw NumericalError("primary decomposition basis is ill-conditioned (cond " +
                             std::to_string(pd.cond_s) + ")");
    return pd;
}

PrimaryDecomposition primary_decomposition(const Matrix& m, std::span<const Complex> centers, double tol) {
    check_square(m);
    if (centers.empty()) throw InvalidArgument("primary_decomposition: no cluster centers given");
    Eigen::ComplexSchur<Matrix> schur(m);
    if (schur.info() != Eigen::Success) throw NumericalError("complex Schur decomposition did not converge");
    const Vector eigs = schur.matrixT().diagonal();
    std::vector<Index> labels(static_cast<std::size_t>(eigs.size()));
    for (Index i = 0; i < eigs.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t r = 1; r < centers.size(); ++r)
            if (std::abs(eigs[i] - centers[r]) < std::abs(eigs[i] - centers[best])) best = r;
        labels[static_cast<std::size_t>(i)] = static_cast<Index>(best);
    }
    std::vector<EigenCluster> clusters(centers.size());
    fill_cluster_stats({eigs.data(), static_cast<std::size_t>(eigs.size())}, labels, clusters);
    for (std::size_t r = 0; r < centers.size(); ++r)
        if (clusters[r].multiplicity == 0) clusters[r].lambda = centers[r];
    return decompose_with_labels(m, schur, labels, std::move(clusters), tol);
}

bool is_scalar_block(const Matrix& t, Complex lambda, double tol) {
    if (t.rows() != t.cols()) throw InvalidArgument("is_scalar_block: block must be square");
    const Index n = t.rows();
    const double dev = (t - lambda * Matrix::Identity(n, n)).norm();
    return dev <= tol * std::max(1.0, std::abs(lambda)) * std::sqrt(static_cast<double>(n));
}

InclusionResult subspace_inclusion(const Matrix& u, const Matrix& v, double thresh) {
    if (u.rows() != v.rows()) throw DimensionMismatch("subspace_inclusion: bases live in different spaces");
    InclusionResult res;
    const Index rv = v.cols();
    if (u.cols() == 0 || u.rows() <= rv) {
        res.score = 0.0;
    } else {
        Matrix joined(u.rows(), u.cols() + rv);
        joined << u, v;
        // Tall and thin: the triangular factor carries the singular values.
        Eigen::HouseholderQR<Matrix> qr(joined);
        const Index k = std::min(joined.rows(), joined.cols());
        const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        res.score = Eigen::JacobiSVD<Matrix>(r).singularValues()[rv];
    }
    res.included = res.score < thresh;
    return res;
}

Matrix column_basis(const Matrix& m, const RankRule& rule) {
    Matrix u;
    Eigen::VectorXd sv;
    if (m.rows() > 2 * m.cols()) {
        Eigen::HouseholderQR<Matrix> qr(m);
        const Matrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
        Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullU);
        sv = svd.singularValues();
        u = qr.householderQ() * (Matrix(m.rows(), m.cols()) << svd.matrixU(), Matrix::Zero(m.rows() - m.cols(), m.cols())).finished();
    } else {
        Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
        sv = svd.singularValues();
        u = svd.matrixU();
    }
    const double floor = sv.size() > 0 ? rule.rel_floor * sv[0] : 0.0;
    const Index r = estimate_rank({sv.data(), static_cast<std::size_t>(sv.size())}, rule.gap_ratio, floor);
    return u.leftCols(r);
}

} // namespace tensim
