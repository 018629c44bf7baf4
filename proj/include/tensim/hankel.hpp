#pragma once

#include "tensim/tensor.hpp"

#include <array>
#include <vector>

namespace tensim {

// One term p(t) e^{rate t}. The base of the term is a = e^{rate}; storing the
// rate keeps high-frequency terms distinct even when their bases coincide
// (e^{i 2 pi k} = 1).
struct ExpPolyTerm {
    std::vector<Complex> poly; // ascending degree, nonzero leading coefficient
    Complex rate;

    static ExpPolyTerm from_base(std::vector<Complex> poly, Complex base);
    Complex base() const;
    Index degree() const;
    Complex operator()(double t) const;
};

struct ExpPolySignal {
    std::vector<ExpPolyTerm> terms;

    // Throws InvalidArgument on an empty term list, a zero leading coefficient
    // or repeated rates.
    void validate() const;
    Complex operator()(double t) const;
};

struct SampledSignal {
    Vector values;
    double ts = 1.0;

    Index size() const { return values.size(); }
};

// amplitude(t) * cos(omega t + phase) as two conjugate exponential terms.
ExpPolySignal cosine_signal(const std::vector<double>& amplitude, double omega, double phase);

// values[k] = s(k ts), k = 0..n-1.
SampledSignal sample(const ExpPolySignal& s, double ts, Index n);

// F + sum_f deg p_f.
Index theoretical_L(const ExpPolySignal& s);

// Entry (i1,i2,i3) (zero-based) is values[i1+i2+i3]. Requires
// i1+i2+i3 = n+2 and every dimension >= 1.
DenseTensor hankelize(const Vector& values, Index i1, Index i2, Index i3);
DenseTensor hankelize(const SampledSignal& s, Index i1, Index i2, Index i3);

// Most balanced (I1, I2, I3) with I1+I2+I3 = n+2 and min >= l, sorted
// nonincreasing. Throws InvalidArgument when no such triple exists.
std::array<Index, 3> balanced_dims(Index n, Index l = 1);

// The eight reference sources:
//   s1 = 3 * 2^{-t/5}
//   s2 = 3 cos(pi t + 1/2),      s3 = 3 cos(2 pi t + 2),     s4 = 3 cos(3 pi t - 2)
//   s5 = (5 - t) cos(10 pi t + 1/2),  s6 = (5 - t) cos(12 pi t - 3/2)
//   s7 = t cos(8 pi t + 1),           s8 = t cos(14 pi t - 1/2)
std::vector<ExpPolySignal> reference_sources();

} // namespace tensim
