#include "tensim/tensim.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Failure {
    std::string message;
};

void check(tensim_status s, const std::string& what) {
    if (s != TENSIM_OK) throw Failure{what + ": " + tensim_last_error()};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw Failure{"cannot open '" + path + "' for writing"};
    f << text;
    if (!f) throw Failure{"write to '" + path + "' failed"};
}

// Owns a char* returned by the library.
std::string take(char* s) {
    std::string out = s ? s : "";
    tensim_string_free(s);
    return out;
}

const char* verdict_name(tensim_verdict v) {
    switch (v) {
    case TENSIM_SAME_SCALED_TERMS: return "SameScaledTerms";
    case TENSIM_SHARED_STRUCTURE_NON_SCALAR: return "SharedStructureNonScalar";
    case TENSIM_INCLUSION_FAILED: return "InclusionFailed";
    case TENSIM_UNRELIABLE: return "Unreliable";
    }
    return "?";
}

std::vector<size_t> parse_modes(const std::string& text) {
    std::vector<size_t> modes;
    std::stringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t used = 0;
            const long v = std::stol(tok, &used);
            if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
            modes.push_back(static_cast<size_t>(v));
        } catch (const std::exception&) {
            throw Failure{"bad mode '" + tok + "' in --modes (expected one-based list like 1,3)"};
        }
    }
    if (modes.empty()) throw Failure{"--modes is empty"};
    return modes;
}

struct SimilarArgs {
    std::string a, b, json;
    size_t modes = 0;
    tensim_similarity_config config{};
};

int cmd_similar(const SimilarArgs& args) {
    tensim_tensor* a = nullptr;
    tensim_tensor* b = nullptr;
    tensim_report* r = nullptr;
    int code = 1;
    try {
        check(tensim_tensor_read(args.a.c_str(), &a), args.a);
        check(tensim_tensor_read(args.b.c_str(), &b), args.b);
        tensim_similarity_config cfg = args.config;
        cfg.modes = args.modes;
        check(tensim_similar(a, b, &cfg, &r), "similar");
        tensim_verdict v;
        size_t terms = 0, modes = 0;
        check(tensim_report_verdict(r, &v), "report");
        tensim_report_terms(r, &terms);
        tensim_report_modes(r, &modes);
        std::printf("verdict: %s\nR: %zu\n", verdict_name(v), terms);
        for (size_t t = 0; t < terms; ++t) {
            double re = 0, im = 0;
            tensim_report_lambda(r, t, &re, &im);
            std::printf("term %zu: lambda = %.12g%+.12gi, L =", t + 1, re, im);
            for (size_t n = 0; n < modes; ++n) {
                size_t l = 0;
                if (tensim_report_multiplicity(r, n, t, &l) == TENSIM_OK) std::printf(" %zu", l);
            }
            std::printf("\n");
        }
        if (!args.json.empty()) {
            char* json = nullptr;
            check(tensim_report_json(r, &json), "report");
            write_text(args.json, take(json));
        }
        code = static_cast<int>(v);
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: %s\n", f.message.c_str());
    }
    tensim_report_free(r);
    tensim_tensor_free(a);
    tensim_tensor_free(b);
    return code;
}

struct HankelizeArgs {
    std::string input, output;
    std::vector<size_t> dims;
    size_t col = 1;
};

int cmd_hankelize(const HankelizeArgs& args) {
    tensim_signals* s = nullptr;
    tensim_tensor* t = nullptr;
    int code = 1;
    try {
        check(tensim_signals_read(args.input.c_str(), &s), args.input);
        check(tensim_hankelize(s, args.col, args.dims[0], args.dims[1], args.dims[2], &t), "hankelize");
        check(tensim_tensor_write(t, args.output.c_str()), args.output);
        code = 0;
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: %s\n", f.message.c_str());
    }
    tensim_tensor_free(t);
    tensim_signals_free(s);
    return code;
}

struct BssArgs {
    std::string config, dot, json;
    std::optional<uint64_t> seed;
    std::optional<double> sigma_rel, tau, thresh;
};

int cmd_demo_bss(const BssArgs& args) {
    tensim_bss_config* c = nullptr;
    tensim_bss_result* r = nullptr;
    int code = 1;
    try {
        if (args.config.empty())
            check(tensim_bss_config_default(&c), "config");
        else
            check(tensim_bss_config_read(args.config.c_str(), &c), args.config);
        if (args.seed) check(tensim_bss_config_set_seed(c, *args.seed), "--seed");
        if (args.sigma_rel) check(tensim_bss_config_set_sigma_rel(c, *args.sigma_rel), "--sigma-rel");
        if (args.tau) check(tensim_bss_config_set_tau(c, *args.tau), "--tau");
        if (args.thresh) check(tensim_bss_config_set_thresh(c, *args.thresh), "--thresh");
        check(tensim_bss_run(c, &r), "demo-bss");
        double p = 0, rec = 0;
        size_t predicted = 0, truth = 0;
        tensim_bss_result_score(r, &p, &rec);
        tensim_bss_result_edges(r, &predicted, &truth);
        std::printf("edges: %zu predicted, %zu true\nprecision: %.6f\nrecall: %.6f\n", predicted, truth, p, rec);
        if (!args.dot.empty()) {
            char* dot = nullptr;
            check(tensim_bss_result_dot(r, &dot), "dot");
            write_text(args.dot, take(dot));
        }
        if (!args.json.empty()) {
            char* json = nullptr;
            check(tensim_bss_result_json(r, &json), "json");
            write_text(args.json, take(json));
        }
        code = 0;
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: %s\n", f.message.c_str());
    }
    tensim_bss_result_free(r);
    tensim_bss_config_free(c);
    return code;
}

struct UnfoldArgs {
    std::string input, output, modes;
};

int cmd_unfold(const UnfoldArgs& args) {
    tensim_tensor* t = nullptr;
    int code = 1;
    try {
        const auto modes = parse_modes(args.modes);
        check(tensim_tensor_read(args.input.c_str(), &t), args.input);
        check(tensim_unfold_csv(t, modes.data(), modes.size(), args.output.c_str()), "unfold");
        code = 0;
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: %s\n", f.message.c_str());
    }
    tensim_tensor_free(t);
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tensor similarity analysis and mixture classification"};
    app.require_subcommand(1);

    SimilarArgs sim;
    tensim_similarity_config_default(&sim.config);
    auto* similar = app.add_subcommand("similar", "Decide whether B consists of scaled terms of A.\n"
                                                  "Exit 0 SameScaledTerms, 2 SharedStructureNonScalar, "
                                                  "3 InclusionFailed, 4 Unreliable, 1 error.");
    similar->add_option("a", sim.a, "TNSR file of A")->required();
    similar->add_option("b", sim.b, "TNSR file of B")->required();
    similar->add_option("--modes", sim.modes, "number of leading modes to analyze (0 = all)")->capture_default_str();
    similar->add_option("--json", sim.json, "write the JSON report here");
    similar->add_option("--residual-tol", sim.config.residual_tol, "largest accepted linking residual")
        ->capture_default_str()->check(CLI::PositiveNumber);
    similar->add_option("--eig-tol", sim.config.eig_tol, "eigenvalue clustering tolerance (0 = automatic)")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    similar->add_option("--scalar-tol", sim.config.scalar_tol, "tolerance for scalar blocks")
        ->capture_default_str()->check(CLI::PositiveNumber);
    similar->add_option("--inclusion-thresh", sim.config.inclusion_thresh, "row-space inclusion threshold")
        ->capture_default_str()->check(CLI::PositiveNumber);
    similar->add_option("--cond-ceiling", sim.config.cond_ceiling, "largest accepted condition number of S_n")
        ->capture_default_str()->check(CLI::PositiveNumber);
    similar->add_option("--block-tol", sim.config.block_tol, "largest accepted off-block mass")
        ->capture_default_str()->check(CLI::PositiveNumber);

    HankelizeArgs hk;
    auto* hankelize = app.add_subcommand("hankelize", "Hankelize one signal column into a third-order tensor");
    hankelize->add_option("signals", hk.input, "signals CSV (header row, one column per signal)")->required();
    hankelize->add_option("output", hk.output, "output TNSR file")->required();
    hankelize->add_option("--dims", hk.dims, "I1 I2 I3 with I1+I2+I3 = samples+2")->expected(3)->required()
        ->check(CLI::PositiveNumber);
    hankelize->add_option("--col", hk.col, "one-based signal column")->capture_default_str()->check(CLI::PositiveNumber);

    BssArgs bss;
    auto* demo = app.add_subcommand("demo-bss", "Run the seeded mixture classification experiment");
    demo->add_option("--config", bss.config, "key = value experiment config");
    demo->add_option("--seed", bss.seed, "generator seed (overrides config)");
    demo->add_option("--sigma-rel", bss.sigma_rel, "relative noise level, default 0.1 (overrides config)")
        ->check(CLI::NonNegativeNumber);
    demo->add_option("--tau", bss.tau, "rank gap ratio, default 2.3 (overrides config)");
    demo->add_option("--thresh", bss.thresh, "inclusion threshold, default 0.1 (overrides config)");
    demo->add_option("--dot", bss.dot, "write the predicted graph as DOT");
    demo->add_option("--json", bss.json, "write the predicted edges and score as JSON");

    UnfoldArgs uf;
    auto* unfold = app.add_subcommand("unfold", "Write a mode-set matricization as CSV");
    unfold->add_option("tensor", uf.input, "TNSR file")->required();
    unfold->add_option("output", uf.output, "output CSV")->required();
    unfold->add_option("--modes", uf.modes, "one-based column modes, e.g. \"1,3\"")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (*similar) return cmd_similar(sim);
    if (*hankelize) return cmd_hankelize(hk);
    if (*demo) return cmd_demo_bss(bss);
    return cmd_unfold(uf);
}
