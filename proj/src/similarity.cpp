#include "tensim/similarity.hpp"

#include "tensim/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tensim {

namespace {

Index resolve_modes(const DenseTensor& a, Index modes) {
    const Index n = modes == 0 ? a.order() : modes;
    if (n < 2 || n > a.order())
        throw InvalidArgument("number of analyzed modes must lie in [2, " + std::to_string(a.order()) +
                              "], got " + std::to_string(n));
    return n;
}

Matrix kron(const Matrix& x, const Matrix& y) {
    Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.cols(); ++j)
            out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return out;
}

// Linking spectra matched across modes: global eigenvalue clusters and one
// primary decomposition per mode whose blocks follow the global order.
struct AlignedSpectra {
    double eig_tol = 0.0;
    std::vector<Complex> lambdas;
    std::vector<PrimaryDecomposition> per_mode;
    std::vector<std::vector<Index>> multiplicities;
    bool complete = true; // every term present in every mode
};

AlignedSpectra align_spectra(const std::vector<LinkingMatrix>& links, const SimilarityConfig& cfg) {
    AlignedSpectra out;
    out.eig_tol = cfg.eig_tol;
    if (!(out.eig_tol > 0.0)) {
        out.eig_tol = 0.0;
        for (const auto& l : links) out.eig_tol = std::max(out.eig_tol, default_eig_tol(l.m));
    }

    std::vector<Complex> all;
    for (const auto& l : links) {
        Eigen::ComplexSchur<Matrix> schur(l.m, false);
        const Vector d = schur.matrixT().diagonal();
        all.insert(all.end(), d.data(), d.data() + d.size());
    }
    const auto global = cluster_eigenvalues(all, out.eig_tol);
    std::vector<Complex> centers;
    for (const auto& c : global) centers.push_back(c.lambda);

    for (const auto& l : links) {
        auto pd = primary_decomposition(l.m, centers, out.eig_tol);
        std::vector<Index> mult;
        for (const auto& c : pd.clusters) {
            mult.push_back(c.multiplicity);
            if (c.multiplicity == 0) out.complete = false;
        }
        out.multiplicities.push_back(std::move(mult));
        out.per_mode.push_back(std::move(pd));
    }

    out.lambdas.assign(centers.size(), Complex(0.0));
    for (std::size_t r = 0; r < centers.size(); ++r) {
        Index seen = 0;
        for (const auto& pd : out.per_mode) {
            if (pd.clusters[r].multiplicity == 0) continue;
            out.lambdas[r] += pd.clusters[r].lambda;
            ++seen;
        }
        out.lambdas[r] = seen > 0 ? out.lambdas[r] / static_cast<double>(seen) : centers[r];
    }
    return out;
}

DenseTensor transform_core(const DenseTensor& a, const std::vector<PrimaryDecomposition>& pds) {
    DenseTensor d = a;
    for (std::size_t n = 0; n < pds.size(); ++n)
        d = mode_product(d, pds[n].s.transpose(), static_cast<Index>(n));
    return d;
}

struct Analysis {
    SimilarityReport report;
    std::optional<CompressedPair> pair;
    LinkingResult linking;
};

Analysis analyze(const DenseTensor& a_full, const DenseTensor& b_full, const SimilarityConfig& cfg) {
    if (a_full.dims() != b_full.dims()) throw DimensionMismatch("tensors to compare have different shapes");
    const Index modes = resolve_modes(a_full, cfg.modes);
    if (a_full.norm() == 0.0) throw InvalidArgument("reference tensor is zero");

    Analysis out;
    auto& rep = out.report;
    rep.modes = modes;
    rep.original_dims = a_full.dims();

    out.pair = compress_pair(a_full, b_full, modes, cfg.compression, cfg.inclusion_thresh);
    const auto& pair = *out.pair;
    rep.compressed_dims = pair.a.dims();
    rep.row_inclusion_ok = pair.row_inclusion_ok;
    rep.row_inclusion_residual = pair.row_inclusion_residual;
    for (Index n = 0; n < modes; ++n) {
        if (!pair.row_inclusion_ok[static_cast<std::size_t>(n)]) {
            rep.verdict = Verdict::InclusionFailed;
            rep.failure = InclusionFailure{n, pair.row_inclusion_residual[static_cast<std::size_t>(n)]};
            rep.message = "row space of mode-" + std::to_string(n + 1) +
                          " unfolding of B is not contained in that of A";
            return out;
        }
    }

    try {
        out.linking = linking_matrices(pair.a, pair.b, modes, cfg.residual_tol);
    } catch (const NumericalError& e) {
        rep.verdict = Verdict::Unreliable;
        rep.message = e.what();
        return out;
    }
    for (const auto& l : out.linking.matrices) rep.linking_residuals.push_back(l.residual);
    if (!out.linking.ok()) {
        rep.verdict = Verdict::InclusionFailed;
        rep.failure = out.linking.failure;
        rep.linking_residuals.push_back(out.linking.failure->residual);
        rep.message = "B cannot be generated by terms of A: mode-" +
                      std::to_string(out.linking.failure->mode + 1) + " linking system has no solution";
        return out;
    }

    const auto spectra = align_spectra(out.linking.matrices, cfg);
    rep.eig_tol = spectra.eig_tol;
    rep.terms = static_cast<Index>(spectra.lambdas.size());
    rep.lambdas = spectra.lambdas;
    rep.multiplicities = spectra.multiplicities;

    bool reliable = true;
    rep.spectra_agree = spectra.complete;
    for (std::size_t n = 0; n < spectra.per_mode.size(); ++n) {
        const auto& pd = spectra.per_mode[n];
        std::vector<Index> nil;
        std::vector<bool> scalar;
        std::vector<double> dev;
        for (std::size_t r = 0; r < pd.clusters.size(); ++r) {
            const auto& c = pd.clusters[r];
            nil.push_back(c.multiplicity > 0 ? c.nilpotency : 0);
            scalar.push_back(c.multiplicity > 0 && is_scalar_block(pd.blocks[r], c.lambda, cfg.scalar_tol));
            const double d = c.multiplicity > 0 ? std::abs(c.lambda - spectra.lambdas[r])
                                                : std::numeric_limits<double>::infinity();
            if (d > spectra.eig_tol) rep.spectra_agree = false;
            dev.push_back(d);
        }
        rep.nilpotency.push_back(std::move(nil));
        rep.scalar_block.push_back(std::move(scalar));
        rep.eig_deviation.push_back(std::move(dev));
        rep.cond_s.push_back(pd.cond_s);
        rep.decomposition_residuals.push_back(pd.residual);
        if (pd.cond_s > cfg.cond_ceiling) {
            reliable = false;
            rep.message = "primary decomposition of mode-" + std::to_string(n + 1) +
                          " linking matrix is ill-conditioned";
        }
    }
    if (!rep.spectra_agree) {
        reliable = false;
        rep.message = "linking matrices of different modes do not share their spectrum";
    }

    for (std::size_t r = 0; r < rep.lambdas.size(); ++r)
        if (std::abs(rep.lambdas[r]) <= spectra.eig_tol) rep.zero_scalings.push_back(static_cast<Index>(r));

    if (spectra.complete) {
        const DenseTensor d = transform_core(pair.a, spectra.per_mode);
        const auto blocks = extract_diag_blocks(d, spectra.multiplicities);
        const double dn = d.norm();
        rep.off_block_mass = dn > 0.0 ? blocks.off_block_mass / dn : blocks.off_block_mass;
        if (rep.off_block_mass > cfg.block_tol) {
            reliable = false;
            rep.message = "transformed core is not block diagonal";
        }
    }

    if (!reliable) {
        rep.verdict = Verdict::Unreliable;
        return out;
    }

    bool all_scaled = true;
    for (std::size_t r = 0; r < rep.lambdas.size(); ++r) {
        bool any = false;
        for (const auto& row : rep.scalar_block) any = any || row[r];
        all_scaled = all_scaled && any;
    }
    rep.verdict = all_scaled ? Verdict::SameScaledTerms : Verdict::SharedStructureNonScalar;
    return out;
}

} // namespace

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::SameScaledTerms: return "SameScaledTerms";
    case Verdict::SharedStructureNonScalar: return "SharedStructureNonScalar";
    case Verdict::InclusionFailed: return "InclusionFailed";
    case Verdict::Unreliable: return "Unreliable";
    }
    return "Unknown";
}

CompressedPair compress_pair(const DenseTensor& a_full, const DenseTensor& b_full, Index modes,
                             const RankRule& rule, double inclusion_thresh) {
    if (a_full.dims() != b_full.dims()) throw DimensionMismatch("tensors to compress have different shapes");
    modes = resolve_modes(a_full, modes);

    CompressedPair out;
    for (Index n = 0; n < modes; ++n) {
        const Matrix a_unf = unfold_mode(a_full, n);
        Eigen::BDCSVD<Matrix> svd(a_unf, Eigen::ComputeThinV);
        const Eigen::VectorXd sv = svd.singularValues();
        const double floor = sv.size() > 0 ? rule.rel_floor * sv[0] : 0.0;
        Index r = estimate_rank({sv.data(), static_cast<std::size_t>(sv.size())}, rule.gap_ratio, floor);
        if (r == 0) throw InvalidArgument("reference tensor has a zero unfolding");
        const Matrix v = svd.matrixV().leftCols(r);
        out.u.push_back(v.adjoint());

        const Matrix b_unf = unfold_mode(b_full, n);
        const double bn = b_unf.norm();
        const double res = (b_unf - b_unf * v * v.adjoint()).norm();
        const double rel = bn > 0.0 ? res / bn : 0.0;
        out.row_inclusion_residual.push_back(rel);
        out.row_inclusion_ok.push_back(rel <= inclusion_thresh);
    }

    out.a = a_full;
    out.b = b_full;
    for (Index n = 0; n < modes; ++n) {
        const Matrix w = out.u[static_cast<std::size_t>(n)].conjugate();
        out.a = mode_product(out.a, w, n);
        out.b = mode_product(out.b, w, n);
    }
    return out;
}

DenseTensor decompress(const DenseTensor& compressed, const std::vector<Matrix>& u) {
    DenseTensor t = compressed;
    for (std::size_t n = 0; n < u.size(); ++n) t = mode_product(t, u[n].transpose(), static_cast<Index>(n));
    return t;
}

LinkingResult linking_matrices(const DenseTensor& a, const DenseTensor& b, Index modes, double residual_tol) {
    if (a.dims() != b.dims()) throw DimensionMismatch("linking_matrices: tensors have different shapes");
    modes = resolve_modes(a, modes);
    LinkingResult out;
    for (Index n = 0; n < modes; ++n) {
        auto link = solve_linking(unfold_mode(a, n), unfold_mode(b, n), n);
        if (!(link.residual <= residual_tol)) {
            out.failure = InclusionFailure{n, link.residual};
            return out;
        }
        out.matrices.push_back(std::move(link));
    }
    return out;
}

SimilarityReport analyze_similarity(const DenseTensor& a_full, const DenseTensor& b_full,
                                    const SimilarityConfig& config) {
    return analyze(a_full, b_full, config).report;
}

Matrix TermDecomposition::factor(Index n, Index r) const {
    const auto& mult = multiplicities.at(static_cast<std::size_t>(n));
    Index off = 0;
    for (Index k = 0; k < r; ++k) off += mult[static_cast<std::size_t>(k)];
    return factors[static_cast<std::size_t>(n)].middleCols(off, mult.at(static_cast<std::size_t>(r)));
}

DenseTensor TermDecomposition::term_a(Index r) const {
    DenseTensor t = cores.at(static_cast<std::size_t>(r));
    for (Index n = 0; n < static_cast<Index>(factors.size()); ++n) t = mode_product(t, factor(n, r), n);
    return t;
}

DenseTensor TermDecomposition::term_b(Index r) const {
    DenseTensor t = mode_product(cores.at(static_cast<std::size_t>(r)),
                                 blocks[0][static_cast<std::size_t>(r)].transpose(), 0);
    for (Index n = 0; n < static_cast<Index>(factors.size()); ++n) t = mode_product(t, factor(n, r), n);
    return t;
}

DenseTensor TermDecomposition::full_term_a(Index r) const {
    return compression.empty() ? term_a(r) : decompress(term_a(r), compression);
}

DenseTensor TermDecomposition::full_term_b(Index r) const {
    return compression.empty() ? term_b(r) : decompress(term_b(r), compression);
}

TermDecomposition recover_terms(const DenseTensor& a, const DenseTensor& b,
                                const std::vector<LinkingMatrix>& linking, const SimilarityConfig& config) {
    if (a.dims() != b.dims()) throw DimensionMismatch("recover_terms: tensors have different shapes");
    if (linking.size() < 2) throw InvalidArgument("recover_terms: need linking matrices for at least two modes");
    const auto spectra = align_spectra(linking, config);
    if (!spectra.complete)
        throw NumericalError("recover_terms: some term is missing from the spectrum of a linking matrix");

    TermDecomposition td;
    td.terms = static_cast<Index>(spectra.lambdas.size());
    td.lambdas = spectra.lambdas;
    td.multiplicities = spectra.multiplicities;

    const DenseTensor d = transform_core(a, spectra.per_mode);
    auto blocks = extract_diag_blocks(d, spectra.multiplicities);
    const double dn = d.norm();
    td.off_block_mass = dn > 0.0 ? blocks.off_block_mass / dn : blocks.off_block_mass;
    if (td.off_block_mass > config.block_tol)
        throw NumericalError("recover_terms: transformed core is not block diagonal (relative off-block mass " +
                             std::to_string(td.off_block_mass) + ")");
    td.cores = std::move(blocks.blocks);

    for (const auto& pd : spectra.per_mode) {
        td.factors.push_back(pd.s.transpose().partialPivLu().inverse());
        td.blocks.push_back(pd.blocks);
    }

    DenseTensor a_rec(a.dims()), b_rec(b.dims());
    for (Index r = 0; r < td.terms; ++r) {
        a_rec += td.term_a(r);
        b_rec += td.term_b(r);
    }
    const double an = a.norm(), bn = b.norm();
    td.a_reconstruction_error = an > 0.0 ? (a_rec - a).norm() / an : (a_rec - a).norm();
    td.b_reconstruction_error = bn > 0.0 ? (b_rec - b).norm() / bn : (b_rec - b).norm();

    const Index modes = static_cast<Index>(td.factors.size());
    for (Index r = 0; r < td.terms; ++r) {
        const auto& core = td.cores[static_cast<std::size_t>(r)];
        const double cn = core.norm();
        for (Index p = 0; p < modes; ++p)
            for (Index q = p + 1; q < modes; ++q) {
                const auto lhs = mode_product(core, td.blocks[static_cast<std::size_t>(p)][static_cast<std::size_t>(r)].transpose(), p);
                const auto rhs = mode_product(core, td.blocks[static_cast<std::size_t>(q)][static_cast<std::size_t>(r)].transpose(), q);
                const double diff = (lhs - rhs).norm();
                td.intertwining.push_back({r, p, q, cn > 0.0 ? diff / cn : diff});
            }
    }
    return td;
}

Matrix modeset_linking_matrix(const std::vector<Index>& dims, const Matrix& m_n, Index n, const ModeSet& s) {
    if (!s.contains(n)) throw InvalidArgument("mode " + std::to_string(n + 1) + " is not in the mode set");
    if (m_n.rows() != dims.at(static_cast<std::size_t>(n)) || m_n.cols() != m_n.rows())
        throw DimensionMismatch("linking matrix does not match the mode dimension");
    // Columns of unfold_modeset run first-index-fastest over S, so the modes of
    // S before n vary fastest (inner factor) and those after n slowest.
    Index before = 1, after = 1;
    for (Index k : s.modes()) {
        if (k < n) before *= dims[static_cast<std::size_t>(k)];
        if (k > n) after *= dims[static_cast<std::size_t>(k)];
    }
    return kron(Matrix::Identity(after, after), kron(m_n, Matrix::Identity(before, before)));
}

double check_redundant_inclusions(const DenseTensor& a, const DenseTensor& b, const LinkingMatrix& link,
                                  const ModeSet& s) {
    if (a.dims() != b.dims()) throw DimensionMismatch("check_redundant_inclusions: tensors have different shapes");
    const Matrix ms = modeset_linking_matrix(a.dims(), link.m, link.mode, s);
    const Matrix as = unfold_modeset(a, s);
    const Matrix bs = unfold_modeset(b, s);
    const double bn = bs.norm();
    const double res = (as * ms - bs).norm();
    return bn > 0.0 ? res / bn : res;
}

SimilarityRun run_similarity(const DenseTensor& a_full, const DenseTensor& b_full, const SimilarityConfig& config) {
    auto analysis = analyze(a_full, b_full, config);
    SimilarityRun run;
    run.report = std::move(analysis.report);
    const auto v = run.report.verdict;
    if (v == Verdict::SameScaledTerms || v == Verdict::SharedStructureNonScalar) {
        try {
            run.terms = recover_terms(analysis.pair->a, analysis.pair->b, analysis.linking.matrices, config);
            run.terms->compression = analysis.pair->u;
        } catch (const NumericalError& e) {
            run.terms_error = e.what();
            run.report.verdict = Verdict::Unreliable;
            run.report.message = e.what();
        }
    }
    return run;
}

} // namespace tensim
