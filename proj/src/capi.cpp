#include "tensim/tensim.h"

#include "tensim/error.hpp"
#include "tensim/io.hpp"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

struct tensim_tensor {
    tensim::DenseTensor t;
};

struct tensim_report {
    tensim::SimilarityRun run;
};

struct tensim_signals {
    tensim::SignalTable table;
};

struct tensim_bss_config {
    tensim::BssConfig config;
};

struct tensim_bss_result {
    tensim::BssRun run;
};

namespace {

thread_local std::string last_error;

tensim_status fail(tensim_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

template <class F>
tensim_status guard(F&& f) {
    try {
        f();
        last_error.clear();
        return TENSIM_OK;
    } catch (const tensim::DimensionMismatch& e) {
        return fail(TENSIM_ERR_DIMENSION_MISMATCH, e.what());
    } catch (const tensim::InvalidArgument& e) {
        return fail(TENSIM_ERR_INVALID_ARGUMENT, e.what());
    } catch (const tensim::NumericalError& e) {
        return fail(TENSIM_ERR_NUMERICAL, e.what());
    } catch (const tensim::ParseError& e) {
        return fail(TENSIM_ERR_PARSE, e.what());
    } catch (const tensim::IoError& e) {
        return fail(TENSIM_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(TENSIM_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(TENSIM_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(TENSIM_ERR_INTERNAL, "unknown error");
    }
}

void require(const void* p, const char* what) {
    if (!p) throw tensim::InvalidArgument(std::string(what) + " is null");
}

char* dup(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

const char* tensim_last_error(void) { return last_error.c_str(); }

const char* tensim_status_string(tensim_status status) {
    switch (status) {
    case TENSIM_OK: return "ok";
    case TENSIM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TENSIM_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case TENSIM_ERR_NUMERICAL: return "numerical error";
    case TENSIM_ERR_PARSE: return "parse error";
    case TENSIM_ERR_IO: return "I/O error";
    case TENSIM_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void tensim_string_free(char* s) { delete[] s; }

tensim_status tensim_tensor_create(size_t order, const size_t* dims, const double* re, const double* im,
                                   tensim_tensor** out) {
    return guard([&] {
        require(dims, "dims");
        require(re, "re");
        require(out, "out");
        std::vector<tensim::Index> d(dims, dims + order);
        tensim::DenseTensor t(d);
        for (tensim::Index i = 0; i < t.size(); ++i) t[i] = {re[i], im ? im[i] : 0.0};
        *out = new tensim_tensor{std::move(t)};
    });
}

tensim_status tensim_tensor_read(const char* path, tensim_tensor** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new tensim_tensor{tensim::read_tnsr_file(path)};
    });
}

tensim_status tensim_tensor_write(const tensim_tensor* t, const char* path) {
    return guard([&] {
        require(t, "tensor");
        require(path, "path");
        tensim::write_tnsr_file(path, t->t);
    });
}

tensim_status tensim_tensor_order(const tensim_tensor* t, size_t* order) {
    return guard([&] {
        require(t, "tensor");
        require(order, "order");
        *order = static_cast<size_t>(t->t.order());
    });
}

tensim_status tensim_tensor_dims(const tensim_tensor* t, size_t* dims, size_t capacity) {
    return guard([&] {
        require(t, "tensor");
        require(dims, "dims");
        for (size_t n = 0; n < capacity && n < t->t.dims().size(); ++n) dims[n] = static_cast<size_t>(t->t.dims()[n]);
    });
}

tensim_status tensim_tensor_get(const tensim_tensor* t, const size_t* index, double* re, double* im) {
    return guard([&] {
        require(t, "tensor");
        require(index, "index");
        std::vector<tensim::Index> idx(index, index + t->t.order());
        for (std::size_t n = 0; n < idx.size(); ++n)
            if (idx[n] >= t->t.dims()[n]) throw tensim::InvalidArgument("index out of range in mode " + std::to_string(n + 1));
        const tensim::Complex z = t->t(idx);
        if (re) *re = z.real();
        if (im) *im = z.imag();
    });
}

void tensim_tensor_free(tensim_tensor* t) { delete t; }

tensim_status tensim_unfold_csv(const tensim_tensor* t, const size_t* modes, size_t count, const char* path) {
    return guard([&] {
        require(t, "tensor");
        require(modes, "modes");
        require(path, "path");
        std::vector<tensim::Index> zero_based;
        for (size_t k = 0; k < count; ++k) {
            if (modes[k] < 1) throw tensim::InvalidArgument("modes are one-based");
            zero_based.push_back(static_cast<tensim::Index>(modes[k] - 1));
        }
        const tensim::ModeSet s(t->t.order(), zero_based);
        const tensim::Matrix m = tensim::unfold_modeset(t->t, s);
        std::ofstream f(path);
        if (!f) throw tensim::IoError(std::string("cannot open '") + path + "' for writing");
        tensim::write_matrix_csv(f, m);
        if (!f) throw tensim::IoError(std::string("write to '") + path + "' failed");
    });
}

void tensim_similarity_config_default(tensim_similarity_config* config) {
    if (!config) return;
    const tensim::SimilarityConfig d;
    config->modes = static_cast<size_t>(d.modes);
    config->residual_tol = d.residual_tol;
    config->eig_tol = d.eig_tol;
    config->scalar_tol = d.scalar_tol;
    config->inclusion_thresh = d.inclusion_thresh;
    config->cond_ceiling = d.cond_ceiling;
    config->block_tol = d.block_tol;
}

tensim_status tensim_similar(const tensim_tensor* a, const tensim_tensor* b, const tensim_similarity_config* config,
                             tensim_report** out) {
    return guard([&] {
        require(a, "a");
        require(b, "b");
        require(out, "out");
        tensim::SimilarityConfig c;
        if (config) {
            c.modes = static_cast<tensim::Index>(config->modes);
            c.residual_tol = config->residual_tol;
            c.eig_tol = config->eig_tol;
            c.scalar_tol = config->scalar_tol;
            c.inclusion_thresh = config->inclusion_thresh;
            c.cond_ceiling = config->cond_ceiling;
            c.block_tol = config->block_tol;
        }
        *out = new tensim_report{tensim::run_similarity(a->t, b->t, c)};
    });
}

tensim_status tensim_report_verdict(const tensim_report* r, tensim_verdict* verdict) {
    return guard([&] {
        require(r, "report");
        require(verdict, "verdict");
        switch (r->run.report.verdict) {
        case tensim::Verdict::SameScaledTerms: *verdict = TENSIM_SAME_SCALED_TERMS; break;
        case tensim::Verdict::SharedStructureNonScalar: *verdict = TENSIM_SHARED_STRUCTURE_NON_SCALAR; break;
        case tensim::Verdict::InclusionFailed: *verdict = TENSIM_INCLUSION_FAILED; break;
        case tensim::Verdict::Unreliable: *verdict = TENSIM_UNRELIABLE; break;
        }
    });
}

tensim_status tensim_report_terms(const tensim_report* r, size_t* terms) {
    return guard([&] {
        require(r, "report");
        require(terms, "terms");
        *terms = static_cast<size_t>(r->run.report.terms);
    });
}

tensim_status tensim_report_modes(const tensim_report* r, size_t* modes) {
    return guard([&] {
        require(r, "report");
        require(modes, "modes");
        *modes = static_cast<size_t>(r->run.report.modes);
    });
}

tensim_status tensim_report_lambda(const tensim_report* r, size_t term, double* re, double* im) {
    return guard([&] {
        require(r, "report");
        const auto& l = r->run.report.lambdas;
        if (term >= l.size()) throw tensim::InvalidArgument("term index out of range");
        if (re) *re = l[term].real();
        if (im) *im = l[term].imag();
    });
}

tensim_status tensim_report_multiplicity(const tensim_report* r, size_t mode, size_t term, size_t* l) {
    return guard([&] {
        require(r, "report");
        require(l, "l");
        const auto& m = r->run.report.multiplicities;
        if (mode >= m.size() || term >= m[mode].size()) throw tensim::InvalidArgument("mode or term index out of range");
        *l = static_cast<size_t>(m[mode][term]);
    });
}

tensim_status tensim_report_json(const tensim_report* r, char** json) {
    return guard([&] {
        require(r, "report");
        require(json, "json");
        const auto* terms = r->run.terms ? &*r->run.terms : nullptr;
        *json = dup(tensim::report_to_json(r->run.report, terms));
    });
}

void tensim_report_free(tensim_report* r) { delete r; }

tensim_status tensim_signals_read(const char* path, tensim_signals** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new tensim_signals{tensim::read_signals_csv_file(path)};
    });
}

tensim_status tensim_signals_shape(const tensim_signals* s, size_t* samples, size_t* columns) {
    return guard([&] {
        require(s, "signals");
        if (samples) *samples = static_cast<size_t>(s->table.values.rows());
        if (columns) *columns = static_cast<size_t>(s->table.values.cols());
    });
}

tensim_status tensim_hankelize(const tensim_signals* s, size_t column, size_t i1, size_t i2, size_t i3,
                               tensim_tensor** out) {
    return guard([&] {
        require(s, "signals");
        require(out, "out");
        const auto cols = static_cast<size_t>(s->table.values.cols());
        if (column < 1 || column > cols)
            throw tensim::InvalidArgument("column " + std::to_string(column) + " outside 1.." + std::to_string(cols));
        const tensim::Vector v = s->table.values.col(static_cast<tensim::Index>(column - 1));
        *out = new tensim_tensor{tensim::hankelize(v, static_cast<tensim::Index>(i1), static_cast<tensim::Index>(i2),
                                                   static_cast<tensim::Index>(i3))};
    });
}

void tensim_signals_free(tensim_signals* s) { delete s; }

tensim_status tensim_bss_config_default(tensim_bss_config** out) {
    return guard([&] {
        require(out, "out");
        *out = new tensim_bss_config{};
    });
}

tensim_status tensim_bss_config_read(const char* path, tensim_bss_config** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new tensim_bss_config{tensim::read_bss_config_file(path)};
    });
}

tensim_status tensim_bss_config_set_seed(tensim_bss_config* c, uint64_t seed) {
    return guard([&] {
        require(c, "config");
        c->config.params.seed = seed;
    });
}

tensim_status tensim_bss_config_set_sigma_rel(tensim_bss_config* c, double sigma_rel) {
    return guard([&] {
        require(c, "config");
        if (!(sigma_rel >= 0.0)) throw tensim::InvalidArgument("sigma_rel must be nonnegative");
        c->config.params.sigma_rel = sigma_rel;
    });
}

tensim_status tensim_bss_config_set_tau(tensim_bss_config* c, double tau) {
    return guard([&] {
        require(c, "config");
        if (!(tau > 1.0)) throw tensim::InvalidArgument("gap ratio must exceed 1");
        c->config.params.tau = tau;
    });
}

tensim_status tensim_bss_config_set_thresh(tensim_bss_config* c, double thresh) {
    return guard([&] {
        require(c, "config");
        if (!(thresh > 0.0)) throw tensim::InvalidArgument("inclusion threshold must be positive");
        c->config.params.thresh = thresh;
    });
}

void tensim_bss_config_free(tensim_bss_config* c) { delete c; }

tensim_status tensim_bss_run(const tensim_bss_config* c, tensim_bss_result** out) {
    return guard([&] {
        require(c, "config");
        require(out, "out");
        *out = new tensim_bss_result{tensim::run_bss(tensim::select_sources(c->config), c->config.params)};
    });
}

tensim_status tensim_bss_result_dot(const tensim_bss_result* r, char** dot) {
    return guard([&] {
        require(r, "result");
        require(dot, "dot");
        *dot = dup(tensim::graph_to_dot(r->run.classification.graph));
    });
}

tensim_status tensim_bss_result_json(const tensim_bss_result* r, char** json) {
    return guard([&] {
        require(r, "result");
        require(json, "json");
        *json = dup(tensim::graph_to_json(r->run.classification.graph, &r->run.score));
    });
}

tensim_status tensim_bss_result_score(const tensim_bss_result* r, double* precision, double* recall) {
    return guard([&] {
        require(r, "result");
        if (precision) *precision = r->run.score.precision;
        if (recall) *recall = r->run.score.recall;
    });
}

tensim_status tensim_bss_result_edges(const tensim_bss_result* r, size_t* predicted, size_t* truth) {
    return guard([&] {
        require(r, "result");
        if (predicted) *predicted = r->run.classification.graph.edges.size();
        if (truth) *truth = r->run.truth.edges.size();
    });
}

void tensim_bss_result_free(tensim_bss_result* r) { delete r; }

} // extern "C"
