#include "tensim/hankel.hpp"

#include "tensim/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tensim {

ExpPolyTerm ExpPolyTerm::from_base(std::vector<Complex> poly, Complex base) {
    if (base == Complex(0.0)) throw InvalidArgument("exponential base must be nonzero");
    return {std::move(poly), std::log(base)};
}

Complex ExpPolyTerm::base() const { return std::exp(rate); }

Index ExpPolyTerm::degree() const { return static_cast<Index>(poly.size()) - 1; }

Complex ExpPolyTerm::operator()(double t) const {
    Complex p = 0.0;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) p = p * t + *it;
    return p * std::exp(rate * t);
}

void ExpPolySignal::validate() const {
    if (terms.empty()) throw InvalidArgument("signal needs at least one term");
    for (std::size_t f = 0; f < terms.size(); ++f) {
        if (terms[f].poly.empty() || terms[f].poly.back() == Complex(0.0))
            throw InvalidArgument("term " + std::to_string(f + 1) + " has a zero leading coefficient");
        for (std::size_t g = 0; g < f; ++g)
            if (terms[g].rate == terms[f].rate)
                throw InvalidArgument("terms " + std::to_string(g + 1) + " and " + std::to_string(f + 1) +
                                      " share the same exponential");
    }
}

Complex ExpPolySignal::operator()(double t) const {
    Complex v = 0.0;
    for (const auto& term : terms) v += term(t);
    return v;
}

ExpPolySignal cosine_signal(const std::vector<double>& amplitude, double omega, double phase) {
    std::vector<Complex> up, down;
    const Complex eu = 0.5 * std::exp(Complex(0.0, phase));
    for (double c : amplitude) {
        up.push_back(c * eu);
        down.push_back(c * std::conj(eu));
    }
    return {{{up, Complex(0.0, omega)}, {down, Complex(0.0, -omega)}}};
}

SampledSignal sample(const ExpPolySignal& s, double ts, Index n) {
    if (n < 1) throw InvalidArgument("sample count must be positive");
    SampledSignal out;
    out.ts = ts;
    out.values.resize(n);
    for (Index k = 0; k < n; ++k) out.values[k] = s(static_cast<double>(k) * ts);
    return out;
}

Index theoretical_L(const ExpPolySignal& s) {
    s.validate();
    Index l = 0;
    for (const auto& t : s.terms) l += 1 + t.degree();
    return l;
}

DenseTensor hankelize(const Vector& values, Index i1, Index i2, Index i3) {
    if (i1 < 1 || i2 < 1 || i3 < 1) throw InvalidArgument("Hankel dimensions must be positive");
    if (i1 + i2 + i3 != values.size() + 2)
        throw InvalidArgument("Hankel dimensions must sum to the sample count + 2 (" +
                              std::to_string(values.size() + 2) + "), got " + std::to_string(i1 + i2 + i3));
    DenseTensor t({i1, i2, i3});
    Index k = 0;
    for (Index c = 0; c < i3; ++c)
        for (Index b = 0; b < i2; ++b)
            for (Index a = 0; a < i1; ++a) t[k++] = values[a + b + c];
    return t;
}

DenseTensor hankelize(const SampledSignal& s, Index i1, Index i2, Index i3) {
    return hankelize(s.values, i1, i2, i3);
}

std::array<Index, 3> balanced_dims(Index n, Index l) {
    const Index total = n + 2;
    if (l < 1 || 3 * l > total)
        throw InvalidArgument("no Hankel shape with " + std::to_string(n) + " samples and minimum dimension " +
                              std::to_string(l));
    const Index base = total / 3;
    const Index extra = total % 3;
    return {base + (extra > 0 ? 1 : 0), base + (extra > 1 ? 1 : 0), base};
}

std::vector<ExpPolySignal> reference_sources() {
    using std::numbers::pi;
    std::vector<ExpPolySignal> s;
    s.push_back({{ExpPolyTerm::from_base({3.0}, std::pow(2.0, -0.2))}});
    s.push_back(cosine_signal({3.0}, pi, 0.5));
    s.push_back(cosine_signal({3.0}, 2 * pi, 2.0));
    s.push_back(cosine_signal({3.0}, 3 * pi, -2.0));
    s.push_back(cosine_signal({5.0, -1.0}, 10 * pi, 0.5));
    s.push_back(cosine_signal({5.0, -1.0}, 12 * pi, -1.5));
    s.push_back(cosine_signal({0.0, 1.0}, 8 * pi, 1.0));
    s.push_back(cosine_signal({0.0, 1.0}, 14 * pi, -0.5));
    return s;
}

} // namespace tensim
