#pragma once

#include "tensim/bss.hpp"
#include "tensim/similarity.hpp"
#include "tensim/tensor.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tensim {

// TNSR/1 text format:
//   tnsr 1 <real|complex>
//   I1 I2 ... IN
//   values, first index fastest; complex values as "re im" pairs.
DenseTensor read_tnsr(std::istream& in);
DenseTensor read_tnsr_file(const std::string& path);
// Writes the real variant when every imaginary part is exactly zero.
void write_tnsr(std::ostream& out, const DenseTensor& t);
void write_tnsr_file(const std::string& path, const DenseTensor& t);

// "1.5", "-2e-3", "1+2j", "-0.5-1.25j", "3j".
Complex parse_complex(const std::string& cell);
std::string format_complex(Complex z);

// Signals as CSV: header row of names, one column per signal.
struct SignalTable {
    std::vector<std::string> names;
    Matrix values; // samples x signals
};

SignalTable read_signals_csv(std::istream& in);
SignalTable read_signals_csv_file(const std::string& path);
void write_signals_csv(std::ostream& out, const SignalTable& table);

// Plain matrix CSV, no header.
void write_matrix_csv(std::ostream& out, const Matrix& m);

// One-based vertex labels.
std::string graph_to_dot(const MixtureGraph& g);
std::string graph_to_json(const MixtureGraph& g, const GraphScore* score = nullptr);

// Flat "key = value" experiment config; '#' starts a comment. Keys:
// sources (one-based ids into the reference bank), J, zeros (min max),
// magnitude (min max), sigma_rel, seed, Ts, N, dims (I1 I2 I3), tau, thresh.
struct BssConfig {
    BssParams params;
    std::vector<Index> sources{0, 1, 2, 3, 4, 5, 6, 7}; // zero-based
};

BssConfig parse_bss_config(std::istream& in);
BssConfig read_bss_config_file(const std::string& path);
std::vector<ExpPolySignal> select_sources(const BssConfig& config);

// JSON report, schema "tensim-report/1"; see docs/report-schema.md.
std::string report_to_json(const SimilarityReport& report, const TermDecomposition* terms = nullptr);

} // namespace tensim
