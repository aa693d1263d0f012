// Shared helpers for the test suites: random generators for scalars, forms
// and fields, plus a numeric evaluator used as an independent oracle for
// operator identities.
#ifndef PFAFFKIT_TEST_SUPPORT_HPP
#define PFAFFKIT_TEST_SUPPORT_HPP

#include <pfaffkit/forms.hpp>
#include <pfaffkit/scalar.hpp>

#include <cmath>
#include <random>
#include <vector>

namespace pfaffkit::testing {

struct Gen {
    std::mt19937 rng;
    explicit Gen(unsigned seed) : rng(seed) {}

    ScalarExpr scalar(const ChartPtr& chart, int max_terms = 2, int max_exp = 2,
                      int max_freq = 2) {
        std::uniform_int_distribution<int> nt(1, max_terms);
        std::uniform_int_distribution<int> coeff(-3, 3);
        std::uniform_int_distribution<int> expo(0, max_exp);
        std::uniform_int_distribution<int> freq(0, max_freq);
        std::uniform_int_distribution<int> kind(0, 1);
        ScalarExpr out = ScalarExpr::zero(chart);
        const int terms = nt(rng);
        for (int t = 0; t < terms; ++t) {
            int c = coeff(rng);
            if (c == 0) c = 1;
            ScalarExpr term = ScalarExpr::constant(chart, c);
            for (size_t i = 0; i < chart->dimension(); ++i) {
                const auto& co = chart->coord(i);
                if (co.kind == CoordKind::Flat) {
                    int e = expo(rng);
                    if (e) term = term * ScalarExpr::coordinate(chart, co.name).pow(unsigned(e));
                } else {
                    int k = freq(rng);
                    if (k) term = term * ScalarExpr::trig(chart, co.name, unsigned(k),
                                                          kind(rng) == 1);
                }
            }
            out = out + term;
        }
        return out;
    }

    DifferentialForm form(const ChartPtr& chart, unsigned degree, int max_terms = 2) {
        DifferentialForm w(chart, degree);
        if (degree > chart->dimension()) return w;
        std::uniform_int_distribution<int> nt(1, max_terms);
        std::uniform_int_distribution<unsigned> pick(0, unsigned(chart->dimension()) - 1);
        const int terms = nt(rng);
        for (int t = 0; t < terms; ++t) {
            IndexTuple idx(degree);
            for (auto& i : idx) i = pick(rng);
            w.add_term(std::move(idx), scalar(chart));
        }
        return w;
    }

    VectorField field(const ChartPtr& chart) {
        std::vector<ScalarExpr> comps;
        comps.reserve(chart->dimension());
        for (size_t i = 0; i < chart->dimension(); ++i) comps.push_back(scalar(chart, 1, 1, 1));
        return VectorField(chart, std::move(comps));
    }

    std::vector<double> point(const ChartPtr& chart, double lo = -2.0, double hi = 2.0) {
        std::uniform_real_distribution<double> u(lo, hi);
        std::vector<double> pt(chart->dimension());
        for (auto& v : pt) v = u(rng);
        return pt;
    }
};

/// Numeric value of a form on constant tangent vectors at a point: an
/// implementation-independent evaluation route (determinant expansion).
inline double eval_form(const DifferentialForm& w, const std::vector<double>& pt,
                        const std::vector<std::vector<double>>& vectors) {
    if (vectors.size() != w.degree()) return std::nan("");
    if (w.degree() == 0) {
        double v = 0;
        for (const auto& [k, c] : w.terms()) v += c.eval(pt);
        return v;
    }
    const unsigned r = w.degree();
    double total = 0;
    for (const auto& [k, c] : w.terms()) {
        // det of pairings dx^{k_a}(v_b) = v_b[k_a]
        std::vector<std::vector<double>> m(r, std::vector<double>(r));
        for (unsigned a = 0; a < r; ++a)
            for (unsigned b = 0; b < r; ++b) m[a][b] = vectors[b][k[a]];
        // Laplace by elimination
        double det = 1;
        for (unsigned col = 0; col < r; ++col) {
            unsigned piv = col;
            for (unsigned row = col; row < r; ++row)
                if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
            if (std::abs(m[piv][col]) < 1e-14) { det = 0; break; }
            if (piv != col) { std::swap(m[piv], m[col]); det = -det; }
            det *= m[col][col];
            for (unsigned row = col + 1; row < r; ++row) {
                double f = m[row][col] / m[col][col];
                for (unsigned cc = col; cc < r; ++cc) m[row][cc] -= f * m[col][cc];
            }
        }
        total += c.eval(pt) * det;
    }
    return total;
}

}  // namespace pfaffkit::testing

#endif
