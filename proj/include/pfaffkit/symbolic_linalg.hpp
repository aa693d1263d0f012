#ifndef PFAFFKIT_SYMBOLIC_LINALG_HPP
#define PFAFFKIT_SYMBOLIC_LINALG_HPP

#include <optional>
#include <vector>

#include "scalar.hpp"

namespace pfaffkit {

/// Linear algebra over the fraction field of the scalar ring.  Rank,
/// kernel and span-membership decisions are "generic point" decisions:
/// a symbolic expression is treated as invertible iff it is not
/// identically zero.  Fractions are carried explicitly so no division
/// inside the ring is ever needed.
namespace symlin {

struct Frac {
    ScalarExpr num;
    ScalarExpr den;  // never zero

    static Frac of(const ScalarExpr& s) { return {s, ScalarExpr::one(s.chart())}; }
    bool is_zero() const { return num.is_zero(); }

    friend Frac operator+(const Frac& a, const Frac& b) {
        return {a.num * b.den + b.num * a.den, a.den * b.den};
    }
    friend Frac operator-(const Frac& a, const Frac& b) {
        return {a.num * b.den - b.num * a.den, a.den * b.den};
    }
    friend Frac operator*(const Frac& a, const Frac& b) { return {a.num * b.num, a.den * b.den}; }
    friend Frac operator/(const Frac& a, const Frac& b) {
        if (b.num.is_zero()) throw Error("symbolic division by zero");
        return {a.num * b.den, a.den * b.num};
    }
    Frac operator-() const { return {-num, den}; }
};

using SymMatrix = std::vector<std::vector<ScalarExpr>>;

struct Echelon {
    std::vector<std::vector<Frac>> rows;  // reduced rows (not normalized)
    std::vector<size_t> pivot_cols;
    size_t cols = 0;
};

inline Echelon echelon(const SymMatrix& m) {
    Echelon e;
    if (m.empty()) return e;
    e.cols = m[0].size();
    std::vector<std::vector<Frac>> work;
    for (const auto& row : m) {
        std::vector<Frac> r;
        r.reserve(row.size());
        for (const auto& s : row) r.push_back(Frac::of(s));
        work.push_back(std::move(r));
    }
    size_t rank = 0;
    for (size_t col = 0; col < e.cols && rank < work.size(); ++col) {
        // pick the structurally simplest nonzero pivot
        size_t best = work.size();
        size_t best_terms = SIZE_MAX;
        for (size_t r = rank; r < work.size(); ++r) {
            if (work[r][col].is_zero()) continue;
            const size_t terms = work[r][col].num.numerator().size();
            if (terms < best_terms) { best = r; best_terms = terms; }
        }
        if (best == work.size()) continue;
        std::swap(work[rank], work[best]);
        const Frac piv = work[rank][col];
        for (size_t r = 0; r < work.size(); ++r) {
            if (r == rank || work[r][col].is_zero()) continue;
            const Frac f = work[r][col] / piv;
            for (size_t c = col; c < e.cols; ++c)
                work[r][c] = work[r][c] - f * work[rank][c];
        }
        e.pivot_cols.push_back(col);
        ++rank;
    }
    work.resize(rank);
    e.rows = std::move(work);
    return e;
}

inline size_t rank(const SymMatrix& m) { return echelon(m).pivot_cols.size(); }

/// Kernel basis with ring-element entries (each vector cleared of
/// denominators; scaling by a nonzero ring element keeps it in the kernel).
inline std::vector<std::vector<ScalarExpr>> kernel_basis(const SymMatrix& m, const ChartPtr& chart) {
    const size_t cols = m.empty() ? 0 : m[0].size();
    Echelon e = echelon(m);
    std::vector<bool> is_pivot(cols, false);
    for (size_t c : e.pivot_cols) is_pivot[c] = true;

    std::vector<std::vector<ScalarExpr>> basis;
    for (size_t free_col = 0; free_col < cols; ++free_col) {
        if (is_pivot[free_col]) continue;
        std::vector<Frac> v(cols, Frac::of(ScalarExpr::zero(chart)));
        v[free_col] = Frac::of(ScalarExpr::one(chart));
        // rows are fully reduced (Gauss-Jordan): pivot row i gives
        // pivot_col value directly from the free column entry.
        for (size_t i = 0; i < e.pivot_cols.size(); ++i) {
            const Frac& entry = e.rows[i][free_col];
            if (!entry.is_zero())
                v[e.pivot_cols[i]] = -(entry / e.rows[i][e.pivot_cols[i]]);
        }
        // clear denominators
        ScalarExpr common = ScalarExpr::one(chart);
        for (const auto& f : v)
            if (!f.is_zero()) common = common * f.den;
        std::vector<ScalarExpr> cleared;
        cleared.reserve(cols);
        for (const auto& f : v) {
            if (f.is_zero()) {
                cleared.push_back(ScalarExpr::zero(chart));
            } else {
                // common / f.den is exact by construction
                auto inv = f.den.try_inverse();
                if (inv) {
                    cleared.push_back(f.num * *inv * common);
                } else {
                    // fall back: multiply out all the other denominators
                    ScalarExpr others = ScalarExpr::one(chart);
                    for (const auto& g : v)
                        if (!g.is_zero() && &g != &f) others = others * g.den;
                    cleared.push_back(f.num * others);
                }
            }
        }
        basis.push_back(std::move(cleared));
    }
    return basis;
}

/// Is v in the row span of m (generic-point decision)?
inline bool in_row_span(const SymMatrix& m, const std::vector<ScalarExpr>& v) {
    bool all_zero = true;
    for (const auto& s : v)
        if (!s.is_zero()) { all_zero = false; break; }
    if (all_zero) return true;
    SymMatrix ext = m;
    ext.push_back(v);
    return rank(m) == rank(ext);
}

inline ScalarExpr determinant(const SymMatrix& m, const ChartPtr& chart) {
    const size_t n = m.size();
    if (n == 0) return ScalarExpr::one(chart);
    if (n == 1) return m[0][0];
    // Laplace expansion along the first row; fine at chart dimensions <= 6.
    ScalarExpr det = ScalarExpr::zero(chart);
    for (size_t j = 0; j < n; ++j) {
        if (m[0][j].is_zero()) continue;
        SymMatrix minor;
        minor.reserve(n - 1);
        for (size_t r = 1; r < n; ++r) {
            std::vector<ScalarExpr> row;
            row.reserve(n - 1);
            for (size_t c = 0; c < n; ++c)
                if (c != j) row.push_back(m[r][c]);
            minor.push_back(std::move(row));
        }
        ScalarExpr term = m[0][j] * determinant(minor, chart);
        det = (j % 2) ? det - term : det + term;
    }
    return det;
}

struct InverseResult {
    ScalarExpr det;
    std::optional<SymMatrix> inverse;  // present iff det is a unit
};

/// Adjugate inverse.  The inverse exists in the localized ring iff the
/// determinant is a unit; otherwise only the determinant is reported so
/// callers can name the denominator that would need declaring.
inline InverseResult inverse(const SymMatrix& m, const ChartPtr& chart) {
    const size_t n = m.size();
    InverseResult res{determinant(m, chart), std::nullopt};
    auto dinv = res.det.try_inverse();
    if (!dinv) return res;
    SymMatrix inv(n, std::vector<ScalarExpr>(n, ScalarExpr::zero(chart)));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            SymMatrix minor;
            minor.reserve(n - 1);
            for (size_t r = 0; r < n; ++r) {
                if (r == i) continue;
                std::vector<ScalarExpr> row;
                row.reserve(n - 1);
                for (size_t c = 0; c < n; ++c)
                    if (c != j) row.push_back(m[r][c]);
                minor.push_back(std::move(row));
            }
            ScalarExpr cof = determinant(minor, chart);
            if ((i + j) % 2) cof = -cof;
            inv[j][i] = cof * *dinv;  // adjugate transposes
        }
    }
    res.inverse = std::move(inv);
    return res;
}

}  // namespace symlin
}  // namespace pfaffkit

#endif
