#include "tensim/io.hpp"

#include "tensim/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace tensim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) throw ParseError("not a number: '" + tok + "'");
    return v;
}

long long parse_int(const std::string& tok) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty())
        throw ParseError("not an integer: '" + tok + "'");
    return v;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open '" + path + "'");
    return f;
}

using nlohmann::json;

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json complex_pair(Complex z) { return json::array({finite_or_null(z.real()), finite_or_null(z.imag())}); }

double max_or_zero(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

} // namespace

DenseTensor read_tnsr(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty tensor file");
    const auto head = split_ws(line);
    if (head.size() != 3 || head[0] != "tnsr" || head[1] != "1" || (head[2] != "real" && head[2] != "complex"))
        throw ParseError("bad header '" + trim(line) + "', expected 'tnsr 1 <real|complex>'");
    const bool complex = head[2] == "complex";
    if (!std::getline(in, line)) throw ParseError("missing dimension line");
    std::vector<Index> dims;
    for (const auto& tok : split_ws(line)) {
        const long long d = parse_int(tok);
        if (d < 1) throw ParseError("dimensions must be positive");
        dims.push_back(static_cast<Index>(d));
    }
    if (dims.size() < 2) throw ParseError("tensor order must be at least 2");
    const Index n = product(dims);
    const Index want = complex ? 2 * n : n;
    std::vector<double> raw;
    raw.reserve(static_cast<std::size_t>(want));
    std::string tok;
    while (in >> tok) raw.push_back(parse_double(tok));
    if (static_cast<Index>(raw.size()) != want)
        throw ParseError("expected " + std::to_string(want) + " values, found " + std::to_string(raw.size()));
    Vector data(n);
    for (Index i = 0; i < n; ++i)
        data[i] = complex ? Complex(raw[static_cast<std::size_t>(2 * i)], raw[static_cast<std::size_t>(2 * i + 1)])
                          : Complex(raw[static_cast<std::size_t>(i)], 0.0);
    return DenseTensor(std::move(dims), std::move(data));
}

DenseTensor read_tnsr_file(const std::string& path) {
    auto f = open_in(path);
    return read_tnsr(f);
}

void write_tnsr(std::ostream& out, const DenseTensor& t) {
    const auto& d = t.data();
    const bool real = (d.imag().array() == 0.0).all();
    out << "tnsr 1 " << (real ? "real" : "complex") << '\n';
    for (std::size_t i = 0; i < t.dims().size(); ++i) out << (i ? " " : "") << t.dims()[i];
    out << '\n';
    for (Index i = 0; i < d.size(); ++i) {
        if (real)
            out << fmt(d[i].real()) << '\n';
        else
            out << fmt(d[i].real()) << ' ' << fmt(d[i].imag()) << '\n';
    }
}

void write_tnsr_file(const std::string& path, const DenseTensor& t) {
    auto f = open_out(path);
    write_tnsr(f, t);
    if (!f) throw IoError("write to '" + path + "' failed");
}

Complex parse_complex(const std::string& cell) {
    std::string s = trim(cell);
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = trim(s.substr(1, s.size() - 2));
    if (s.empty()) throw ParseError("empty value");
    if (s.back() != 'j' && s.back() != 'i') return {parse_double(s), 0.0};
    s.pop_back();
    // Split at the last sign that is not part of an exponent.
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;)
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    const std::string re = split == std::string::npos ? "" : s.substr(0, split);
    std::string im = split == std::string::npos ? s : s.substr(split);
    if (im.empty() || im == "+" || im == "-") im += "1";
    return {re.empty() ? 0.0 : parse_double(re), parse_double(im)};
}

std::string format_complex(Complex z) {
    if (z.imag() == 0.0) return fmt(z.real());
    const std::string im = fmt(z.imag());
    return fmt(z.real()) + (im.front() == '-' ? "" : "+") + im + "j";
}

SignalTable read_signals_csv(std::istream& in) {
    SignalTable t;
    std::string line;
    while (std::getline(in, line) && trim(line).empty()) {}
    if (trim(line).empty()) throw ParseError("missing CSV header");
    t.names = split_csv(trim(line));
    const std::size_t cols = t.names.size();
    std::vector<std::vector<Complex>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(trim(line));
        if (cells.size() != cols)
            throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(cols) + " fields, found " +
                             std::to_string(cells.size()));
        std::vector<Complex> row;
        for (const auto& c : cells) {
            try {
                row.push_back(parse_complex(c));
            } catch (const ParseError& e) {
                throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        rows.push_back(std::move(row));
    }
    t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) t.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return t;
}

SignalTable read_signals_csv_file(const std::string& path) {
    auto f = open_in(path);
    return read_signals_csv(f);
}

void write_signals_csv(std::ostream& out, const SignalTable& table) {
    if (static_cast<Index>(table.names.size()) != table.values.cols())
        throw DimensionMismatch("header has " + std::to_string(table.names.size()) + " names for " +
                                std::to_string(table.values.cols()) + " columns");
    for (std::size_t j = 0; j < table.names.size(); ++j) out << (j ? "," : "") << table.names[j];
    out << '\n';
    write_matrix_csv(out, table.values);
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_complex(m(i, j));
        out << '\n';
    }
}

std::string graph_to_dot(const MixtureGraph& g) {
    std::ostringstream out;
    out << "digraph {\n";
    for (Index v = 0; v < g.vertices; ++v) out << "  " << v + 1 << ";\n";
    for (const auto& [a, b] : g.edges) out << "  " << a + 1 << " -> " << b + 1 << ";\n";
    out << "}\n";
    return out.str();
}

std::string graph_to_json(const MixtureGraph& g, const GraphScore* score) {
    json doc;
    doc["vertices"] = g.vertices;
    json edges = json::array();
    for (const auto& [a, b] : g.edges) edges.push_back({a + 1, b + 1});
    doc["edges"] = std::move(edges);
    if (score)
        doc["score"] = {{"true_positives", score->true_positives},
                        {"false_positives", score->false_positives},
                        {"false_negatives", score->false_negatives},
                        {"precision", score->precision},
                        {"recall", score->recall}};
    return doc.dump(2) + "\n";
}

BssConfig parse_bss_config(std::istream& in) {
    BssConfig c;
    auto& p = c.params;
    std::string line;
    std::size_t lineno = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw ParseError(where + "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = line.substr(eq + 1);
        std::replace(value.begin(), value.end(), ',', ' ');
        const auto vals = split_ws(value);
        if (!seen.insert(key).second) throw ParseError(where + "duplicate key '" + key + "'");
        auto need = [&](std::size_t n) {
            if (vals.size() != n)
                throw ParseError(where + "'" + key + "' takes " + std::to_string(n) + " value" + (n > 1 ? "s" : ""));
        };
        try {
            if (key == "sources") {
                if (vals.empty()) throw ParseError(where + "'sources' needs at least one id");
                c.sources.clear();
                for (const auto& v : vals) {
                    const long long id = parse_int(v);
                    if (id < 1 || id > 8) throw ParseError(where + "source id " + v + " outside 1..8");
                    if (std::find(c.sources.begin(), c.sources.end(), id - 1) != c.sources.end())
                        throw ParseError(where + "repeated source id " + v);
                    c.sources.push_back(static_cast<Index>(id - 1));
                }
            } else if (key == "J") {
                need(1);
                p.mixtures = static_cast<Index>(parse_int(vals[0]));
            } else if (key == "zeros") {
                need(2);
                p.min_zeros = static_cast<Index>(parse_int(vals[0]));
                p.max_zeros = static_cast<Index>(parse_int(vals[1]));
            } else if (key == "magnitude") {
                need(2);
                p.min_magnitude = parse_double(vals[0]);
                p.max_magnitude = parse_double(vals[1]);
            } else if (key == "sigma_rel") {
                need(1);
                p.sigma_rel = parse_double(vals[0]);
            } else if (key == "seed") {
                need(1);
                const long long s = parse_int(vals[0]);
                if (s < 0) throw ParseError(where + "seed must be nonnegative");
                p.seed = static_cast<std::uint64_t>(s);
            } else if (key == "Ts") {
                need(1);
                p.ts = parse_double(vals[0]);
            } else if (key == "N") {
                need(1);
                p.samples = static_cast<Index>(parse_int(vals[0]));
            } else if (key == "dims") {
                need(3);
                for (std::size_t k = 0; k < 3; ++k) p.dims[k] = static_cast<Index>(parse_int(vals[k]));
            } else if (key == "tau") {
                need(1);
                p.tau = parse_double(vals[0]);
            } else if (key == "thresh") {
                need(1);
                p.thresh = parse_double(vals[0]);
            } else {
                throw ParseError(where + "unknown key '" + key + "'");
            }
        } catch (const ParseError& e) {
            const std::string msg = e.what();
            throw ParseError(msg.rfind("line ", 0) == 0 ? msg : where + msg);
        }
    }
    try {
        p.validate(static_cast<Index>(c.sources.size()));
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("invalid config: ") + e.what());
    }
    return c;
}

BssConfig read_bss_config_file(const std::string& path) {
    auto f = open_in(path);
    return parse_bss_config(f);
}

std::vector<ExpPolySignal> select_sources(const BssConfig& config) {
    const auto bank = reference_sources();
    std::vector<ExpPolySignal> out;
    for (Index id : config.sources) {
        if (id < 0 || id >= static_cast<Index>(bank.size()))
            throw InvalidArgument("source id " + std::to_string(id + 1) + " is not in the reference bank");
        out.push_back(bank[static_cast<std::size_t>(id)]);
    }
    return out;
}

std::string report_to_json(const SimilarityReport& r, const TermDecomposition* terms) {
    json doc;
    doc["schema"] = "tensim-report/1";
    doc["verdict"] = to_string(r.verdict);
    doc["R"] = r.terms;
    doc["modes"] = r.modes;
    json lambdas = json::array();
    for (Complex z : r.lambdas) lambdas.push_back(complex_pair(z));
    doc["lambdas"] = std::move(lambdas);
    doc["L"] = r.multiplicities;

    json res;
    json lin = json::array(), inc = json::array(), dec = json::array();
    for (double v : r.linking_residuals) lin.push_back(finite_or_null(v));
    for (double v : r.row_inclusion_residual) inc.push_back(finite_or_null(v));
    for (double v : r.decomposition_residuals) dec.push_back(finite_or_null(v));
    res["linking"] = std::move(lin);
    res["row_inclusion"] = std::move(inc);
    res["decomposition"] = std::move(dec);
    res["off_block_mass"] = finite_or_null(r.off_block_mass);
    if (terms) {
        res["reconstruction"] = {{"a", finite_or_null(terms->a_reconstruction_error)},
                                 {"b", finite_or_null(terms->b_reconstruction_error)}};
        double worst = 0.0;
        for (const auto& t : terms->intertwining) worst = std::max(worst, t.residual);
        res["intertwining_max"] = finite_or_null(worst);
    } else {
        res["reconstruction"] = nullptr;
        res["intertwining_max"] = nullptr;
    }
    doc["residuals"] = std::move(res);

    json diag;
    diag["eig_tol"] = finite_or_null(r.eig_tol);
    json cond = json::array();
    for (double v : r.cond_s) cond.push_back(finite_or_null(v));
    diag["cond_s"] = std::move(cond);
    json dev = json::array();
    for (const auto& row : r.eig_deviation) {
        json jr = json::array();
        for (double v : row) jr.push_back(finite_or_null(v));
        dev.push_back(std::move(jr));
    }
    diag["eig_deviation"] = std::move(dev);
    diag["eig_deviation_max"] = [&] {
        double m = 0.0;
        for (const auto& row : r.eig_deviation) m = std::max(m, max_or_zero(row));
        return m;
    }();
    diag["nilpotency"] = r.nilpotency;
    diag["scalar_block"] = r.scalar_block;
    diag["row_inclusion_ok"] = r.row_inclusion_ok;
    diag["spectra_agree"] = r.spectra_agree;
    json zs = json::array();
    for (Index z : r.zero_scalings) zs.push_back(z + 1);
    diag["zero_scalings"] = std::move(zs);
    diag["dims"] = {{"original", r.original_dims}, {"compressed", r.compressed_dims}};
    if (r.failure)
        diag["failure"] = {{"mode", r.failure->mode + 1}, {"residual", finite_or_null(r.failure->residual)}};
    else
        diag["failure"] = nullptr;
    diag["message"] = r.message;
    doc["diagnostics"] = std::move(diag);
    return doc.dump(2) + "\n";
}

} // namespace tensim
