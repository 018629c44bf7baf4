#include "tensim/tensor.hpp"

#include "tensim/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace tensim {

namespace {

void check_dims(const std::vector<Index>& dims) {
    if (dims.size() < 2)
        throw InvalidArgument("tensor order must be at least 2, got " + std::to_string(dims.size()));
    for (Index d : dims)
        if (d < 1) throw InvalidArgument("tensor dimensions must be positive");
}

void check_mode(const DenseTensor& a, Index n) {
    if (n < 0 || n >= a.order())
        throw InvalidArgument("mode " + std::to_string(n) + " out of range for order-" +
                              std::to_string(a.order()) + " tensor");
}

// Visits every entry in storage order, handing the callback the linear offset
// and the multi-index.
template <typename F>
void for_each_index(const std::vector<Index>& dims, F&& f) {
    const std::size_t order = dims.size();
    std::vector<Index> idx(order, 0);
    const Index total = product(dims);
    for (Index lin = 0; lin < total; ++lin) {
        f(lin, idx);
        for (std::size_t k = 0; k < order; ++k) {
            if (++idx[k] < dims[k]) break;
            idx[k] = 0;
        }
    }
}

// Strides that linearize the modes of `group` first-index-fastest; zero for
// modes outside the group.
std::vector<Index> group_strides(const std::vector<Index>& dims, const std::vector<Index>& group) {
    std::vector<Index> strides(dims.size(), 0);
    Index s = 1;
    for (Index k : group) {
        strides[static_cast<std::size_t>(k)] = s;
        s *= dims[static_cast<std::size_t>(k)];
    }
    return strides;
}

// Orthonormal basis (I_n x r) of the span of the mode-n fibers, ordered by
// decreasing singular value. For unfold = P S V^H the fibers are the columns
// of unfold^T = conj(V) S P^T.
Matrix leading_fiber_basis(const Matrix& unfolded, Index r) {
    Eigen::BDCSVD<Matrix> svd(unfolded, Eigen::ComputeThinV);
    return svd.matrixV().leftCols(r).conjugate();
}

} // namespace

Index product(std::span<const Index> dims) {
    return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(std::vector<Index> dims) : dims_(std::move(dims)) {
    check_dims(dims_);
    data_ = Vector::Zero(product(dims_));
}

DenseTensor::DenseTensor(std::vector<Index> dims, Vector data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims(dims_);
    if (data_.size() != product(dims_))
        throw DimensionMismatch("tensor data has " + std::to_string(data_.size()) +
                                " entries, dims require " + std::to_string(product(dims_)));
}

Index DenseTensor::linear_index(std::span<const Index> idx) const {
    if (idx.size() != dims_.size()) throw InvalidArgument("index arity does not match tensor order");
    Index lin = 0;
    Index stride = 1;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (idx[k] < 0 || idx[k] >= dims_[k]) throw InvalidArgument("tensor index out of range");
        lin += idx[k] * stride;
        stride *= dims_[k];
    }
    return lin;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    if (dims_ != other.dims_) throw DimensionMismatch("tensor shapes differ");
    data_ += other.data_;
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
    if (dims_ != other.dims_) throw DimensionMismatch("tensor shapes differ");
    data_ -= other.data_;
    return *this;
}

DenseTensor& DenseTensor::operator*=(Complex s) {
    data_ *= s;
    return *this;
}

ModeSet::ModeSet(Index order, std::vector<Index> modes) : order_(order), modes_(std::move(modes)) {
    std::sort(modes_.begin(), modes_.end());
    if (modes_.empty()) throw InvalidArgument("mode set must be nonempty");
    if (std::adjacent_find(modes_.begin(), modes_.end()) != modes_.end())
        throw InvalidArgument("mode set contains a repeated mode");
    if (modes_.front() < 0 || modes_.back() >= order_)
        throw InvalidArgument("mode set refers to a mode outside the tensor order");
    if (static_cast<Index>(modes_.size()) == order_)
        throw InvalidArgument("mode set must be a proper subset of the modes");
    for (Index k = 0; k < order_; ++k)
        if (!contains(k)) complement_.push_back(k);
}

bool ModeSet::contains(Index n) const {
    return std::binary_search(modes_.begin(), modes_.end(), n);
}

Matrix unfold_modeset(const DenseTensor& a, const ModeSet& s) {
    if (s.order() != a.order()) throw InvalidArgument("mode set order does not match tensor order");
    const auto& dims = a.dims();
    const auto row_strides = group_strides(dims, s.complement());
    const auto col_strides = group_strides(dims, s.modes());
    Index rows = 1, cols = 1;
    for (Index k : s.complement()) rows *= dims[static_cast<std::size_t>(k)];
    for (Index k : s.modes()) cols *= dims[static_cast<std::size_t>(k)];

    Matrix m(rows, cols);
    for_each_index(dims, [&](Index lin, const std::vector<Index>& idx) {
        Index r = 0, c = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            r += idx[k] * row_strides[k];
            c += idx[k] * col_strides[k];
        }
        m(r, c) = a[lin];
    });
    return m;
}

Matrix unfold_mode(const DenseTensor& a, Index n) {
    check_mode(a, n);
    // With first-index-fastest storage the mode-n unfolding is a reshape of
    // each (left x I_n) slab placed one below another.
    const Index left = product(std::span(a.dims()).first(static_cast<std::size_t>(n)));
    const Index in = a.dim(n);
    const Index right = a.size() / (left * in);
    Matrix m(left * right, in);
    for (Index r = 0; r < right; ++r)
        m.middleRows(r * left, left) =
            Eigen::Map<const Matrix>(a.data().data() + r * left * in, left, in);
    return m;
}

DenseTensor fold_modeset(const Matrix& m, std::vector<Index> dims, const ModeSet& s) {
    check_dims(dims);
    if (s.order() != static_cast<Index>(dims.size()))
        throw InvalidArgument("mode set order does not match tensor order");
    Index rows = 1, cols = 1;
    for (Index k : s.complement()) rows *= dims[static_cast<std::size_t>(k)];
    for (Index k : s.modes()) cols *= dims[static_cast<std::size_t>(k)];
    if (m.rows() != rows || m.cols() != cols)
        throw DimensionMismatch("matrix shape " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + " does not match the unfolding shape " +
                                std::to_string(rows) + "x" + std::to_string(cols));
    const auto row_strides = group_strides(dims, s.complement());
    const auto col_strides = group_strides(dims, s.modes());
    DenseTensor t(dims);
    for_each_index(dims, [&](Index lin, const std::vector<Index>& idx) {
        Index r = 0, c = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            r += idx[k] * row_strides[k];
            c += idx[k] * col_strides[k];
        }
        t[lin] = m(r, c);
    });
    return t;
}

DenseTensor fold_mode(const Matrix& m, std::vector<Index> dims, Index n) {
    check_dims(dims);
    if (n < 0 || n >= static_cast<Index>(dims.size())) throw InvalidArgument("mode out of range");
    const Index in = dims[static_cast<std::size_t>(n)];
    const Index total = product(dims);
    if (m.cols() != in || m.rows() * in != total)
        throw DimensionMismatch("matrix shape " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + " does not match the mode-" +
                                std::to_string(n + 1) + " unfolding shape");
    const Index left = product(std::span(dims).first(static_cast<std::size_t>(n)));
    const Index right = total / (left * in);
    DenseTensor t(std::move(dims));
    for (Index r = 0; r < right; ++r)
        Eigen::Map<Matrix>(t.data().data() + r * left * in, left, in) = m.middleRows(r * left, left);
    return t;
}

DenseTensor mode_product(const DenseTensor& d, const Matrix& x, Index n) {
    check_mode(d, n);
    const Index in = d.dim(n);
    if (x.cols() != in)
        throw DimensionMismatch("mode-" + std::to_string(n + 1) + " product: matrix has " +
                                std::to_string(x.cols()) + " columns, tensor dimension is " +
                                std::to_string(in));
    if (x.rows() < 1) throw InvalidArgument("mode product with an empty matrix");
    const Index out = x.rows();
    const Index left = product(std::span(d.dims()).first(static_cast<std::size_t>(n)));
    const Index right = d.size() / (left * in);

    auto dims = d.dims();
    dims[static_cast<std::size_t>(n)] = out;
    DenseTensor r(std::move(dims));
    const Matrix xt = x.transpose();
    for (Index k = 0; k < right; ++k) {
        Eigen::Map<const Matrix> slab(d.data().data() + k * left * in, left, in);
        Eigen::Map<Matrix>(r.data().data() + k * left * out, left, out).noalias() = slab * xt;
    }
    return r;
}

DenseTensor multi_mode_product(const DenseTensor& d, std::span<const ModeFactor> factors) {
    std::vector<bool> seen(static_cast<std::size_t>(d.order()), false);
    for (const auto& f : factors) {
        check_mode(d, f.mode);
        if (seen[static_cast<std::size_t>(f.mode)])
            throw InvalidArgument("multi-mode product has two factors for mode " +
                                  std::to_string(f.mode + 1));
        seen[static_cast<std::size_t>(f.mode)] = true;
    }
    DenseTensor r = d;
    for (const auto& f : factors) r = mode_product(r, f.matrix, f.mode);
    return r;
}

Index estimate_rank(std::span<const double> sv, double tau, double abs_floor) {
    const Index len = static_cast<Index>(sv.size());
    if (len == 0 || !(sv[0] > abs_floor)) return 0;
    for (Index k = len - 1; k >= 1; --k) {
        const double hi = sv[static_cast<std::size_t>(k - 1)];
        const double lo = sv[static_cast<std::size_t>(k)];
        if (!(hi > abs_floor)) continue;
        if (!(lo > abs_floor) || hi / lo > tau) return k;
    }
    // No gap and every value above the floor.
    return len;
}

Eigen::VectorXd mode_singular_values(const DenseTensor& a, Index n) {
    Eigen::BDCSVD<Matrix> svd(unfold_mode(a, n));
    return svd.singularValues();
}

std::vector<Index> ml_rank(const DenseTensor& a, const RankRule& rule) {
    std::vector<Index> ranks;
    ranks.reserve(static_cast<std::size_t>(a.order()));
    for (Index n = 0; n < a.order(); ++n) {
        const Eigen::VectorXd sv = mode_singular_values(a, n);
        const double floor = sv.size() > 0 ? rule.rel_floor * sv[0] : 0.0;
        ranks.push_back(estimate_rank({sv.data(), static_cast<std::size_t>(sv.size())},
                                      rule.gap_ratio, floor));
    }
    return ranks;
}

DenseTensor mlsvd_reconstruct(const MlsvdResult& r) {
    DenseTensor t = r.core;
    for (Index n = 0; n < static_cast<Index>(r.factors.size()); ++n)
        t = mode_product(t, r.factors[static_cast<std::size_t>(n)], n);
    return t;
}

MlsvdResult mlsvd_truncate(const DenseTensor& a, std::span<const Index> target_ranks, int refine_iters) {
    const Index order = a.order();
    if (static_cast<Index>(target_ranks.size()) != order)
        throw InvalidArgument("mlsvd_truncate: need one target rank per mode");
    for (Index n = 0; n < order; ++n) {
        const Index r = target_ranks[static_cast<std::size_t>(n)];
        if (r < 1 || r > a.dim(n))
            throw InvalidArgument("mlsvd_truncate: target rank " + std::to_string(r) +
                                  " invalid for mode " + std::to_string(n + 1) + " of size " +
                                  std::to_string(a.dim(n)));
    }
    if (refine_iters < 0) throw InvalidArgument("mlsvd_truncate: negative refinement count");

    MlsvdResult res;
    res.factors.resize(static_cast<std::size_t>(order));
    for (Index n = 0; n < order; ++n)
        res.factors[static_cast<std::size_t>(n)] =
            leading_fiber_basis(unfold_mode(a, n), target_ranks[static_cast<std::size_t>(n)]);

    for (int it = 0; it < refine_iters; ++it) {
        for (Index n = 0; n < order; ++n) {
            DenseTensor y = a;
            for (Index k = 0; k < order; ++k)
                if (k != n) y = mode_product(y, res.factors[static_cast<std::size_t>(k)].adjoint(), k);
            res.factors[static_cast<std::size_t>(n)] =
                leading_fiber_basis(unfold_mode(y, n), target_ranks[static_cast<std::size_t>(n)]);
        }
    }

    res.core = a;
    for (Index n = 0; n < order; ++n)
        res.core = mode_product(res.core, res.factors[static_cast<std::size_t>(n)].adjoint(), n);

    const double norm_a = a.norm();
    res.rel_error = norm_a == 0.0 ? 0.0 : (a - mlsvd_reconstruct(res)).norm() / norm_a;
    return res;
}

DiagBlocks extract_diag_blocks(const DenseTensor& d, const std::vector<std::vector<Index>>& partitions) {
    const std::size_t nparts = partitions.size();
    if (nparts < 1 || static_cast<Index>(nparts) > d.order())
        throw InvalidArgument("extract_diag_blocks: need partitions for 1..N modes");
    const std::size_t nterms = partitions.front().size();
    if (nterms < 1) throw InvalidArgument("extract_diag_blocks: empty partition");

    // owner[n][i] = block that index i of mode n belongs to.
    std::vector<std::vector<Index>> owner(nparts);
    std::vector<std::vector<Index>> offset(nparts);
    for (std::size_t n = 0; n < nparts; ++n) {
        const auto& part = partitions[n];
        if (part.size() != nterms)
            throw InvalidArgument("extract_diag_blocks: every mode needs the same number of blocks");
        Index pos = 0;
        for (std::size_t r = 0; r < nterms; ++r) {
            if (part[r] < 1) throw InvalidArgument("extract_diag_blocks: block lengths must be positive");
            offset[n].push_back(pos);
            for (Index i = 0; i < part[r]; ++i) owner[n].push_back(static_cast<Index>(r));
            pos += part[r];
        }
        if (pos != d.dim(static_cast<Index>(n)))
            throw DimensionMismatch("extract_diag_blocks: block lengths of mode " + std::to_string(n + 1) +
                                    " sum to " + std::to_string(pos) + ", dimension is " +
                                    std::to_string(d.dim(static_cast<Index>(n))));
    }

    DiagBlocks out;
    for (std::size_t r = 0; r < nterms; ++r) {
        auto dims = d.dims();
        for (std::size_t n = 0; n < nparts; ++n) dims[n] = partitions[n][r];
        out.blocks.emplace_back(std::move(dims));
    }

    double mass2 = 0.0;
    std::vector<Index> local(static_cast<std::size_t>(d.order()));
    for_each_index(d.dims(), [&](Index lin, const std::vector<Index>& idx) {
        const Index r = owner[0][static_cast<std::size_t>(idx[0])];
        bool inside = true;
        for (std::size_t n = 1; n < nparts && inside; ++n)
            inside = owner[n][static_cast<std::size_t>(idx[n])] == r;
        if (!inside) {
            mass2 += std::norm(d[lin]);
            return;
        }
        for (std::size_t k = 0; k < idx.size(); ++k)
            local[k] = k < nparts ? idx[k] - offset[k][static_cast<std::size_t>(r)] : idx[k];
        out.blocks[static_cast<std::size_t>(r)](local) = d[lin];
    });
    out.off_block_mass = std::sqrt(mass2);
    return out;
}

} // namespace tensim
