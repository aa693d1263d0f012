#ifndef PFAFFKIT_EXACT_LINALG_HPP
#define PFAFFKIT_EXACT_LINALG_HPP

#include <map>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace pfaffkit {

/// Sparse matrix over the rationals; never stores zeros.
class RationalMatrix {
public:
    RationalMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols) {}

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }

    void set(size_t r, size_t c, const Rational& v) {
        if (r >= rows_ || c >= cols_) throw Error("matrix index out of range");
        if (v == 0)
            entries_.erase({r, c});
        else
            entries_[{r, c}] = v;
    }
    void add(size_t r, size_t c, const Rational& v) {
        if (r >= rows_ || c >= cols_) throw Error("matrix index out of range");
        auto it = entries_.find({r, c});
        if (it == entries_.end()) {
            if (v != 0) entries_[{r, c}] = v;
        } else {
            it->second += v;
            if (it->second == 0) entries_.erase(it);
        }
    }
    Rational get(size_t r, size_t c) const {
        auto it = entries_.find({r, c});
        return it == entries_.end() ? Rational(0) : it->second;
    }
    const std::map<std::pair<size_t, size_t>, Rational>& entries() const { return entries_; }

    std::vector<Rational> apply(const std::vector<Rational>& v) const {
        if (v.size() != cols_) throw Error("matrix-vector size mismatch");
        std::vector<Rational> out(rows_, 0);
        for (const auto& [rc, val] : entries_) out[rc.first] += val * v[rc.second];
        return out;
    }

private:
    size_t rows_, cols_;
    std::map<std::pair<size_t, size_t>, Rational> entries_;
};

namespace detail {

// Dense integer rows after clearing denominators; the workhorse behind
// rank/kernel/image.  Bareiss condensation keeps entries as exact division
// results, avoiding coefficient blowup from naive cross-multiplication.
struct IntEchelon {
    std::vector<std::vector<Integer>> rows;  // echelon rows (row echelon, not reduced)
    std::vector<size_t> pivot_cols;
};

inline IntEchelon int_echelon(const RationalMatrix& m) {
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    const size_t R = m.rows(), C = m.cols();
    std::vector<std::vector<Integer>> w(R, std::vector<Integer>(C, 0));
    std::vector<Integer> lcm(R, 1);
    for (const auto& [rc, v] : m.entries())
        lcm[rc.first] = boost::multiprecision::lcm(lcm[rc.first], Integer(denominator(v)));
    for (const auto& [rc, v] : m.entries())
        w[rc.first][rc.second] = Integer(numerator(v)) * (lcm[rc.first] / Integer(denominator(v)));

    IntEchelon e;
    Integer prev = 1;
    size_t rank = 0;
    for (size_t col = 0; col < C && rank < R; ++col) {
        size_t piv = R;
        for (size_t r = rank; r < R; ++r)
            if (w[r][col] != 0) { piv = r; break; }
        if (piv == R) continue;
        std::swap(w[rank], w[piv]);
        for (size_t r = rank + 1; r < R; ++r) {
            for (size_t c = col + 1; c < C; ++c)
                w[r][c] = (w[rank][col] * w[r][c] - w[r][col] * w[rank][c]) / prev;
            w[r][col] = 0;
        }
        prev = w[rank][col];
        e.pivot_cols.push_back(col);
        ++rank;
    }
    w.resize(rank);
    e.rows = std::move(w);
    return e;
}

}  // namespace detail

inline size_t rank(const RationalMatrix& m) { return detail::int_echelon(m).pivot_cols.size(); }

/// Exact kernel basis; dim = cols - rank.
inline std::vector<std::vector<Rational>> kernel_basis(const RationalMatrix& m) {
    const size_t C = m.cols();
    auto e = detail::int_echelon(m);
    std::vector<bool> is_pivot(C, false);
    for (size_t c : e.pivot_cols) is_pivot[c] = true;

    std::vector<std::vector<Rational>> basis;
    for (size_t fc = 0; fc < C; ++fc) {
        if (is_pivot[fc]) continue;
        std::vector<Rational> v(C, 0);
        v[fc] = 1;
        // back substitution through the echelon rows
        for (size_t i = e.pivot_cols.size(); i-- > 0;) {
            const auto& row = e.rows[i];
            const size_t pc = e.pivot_cols[i];
            Rational s = 0;
            for (size_t c = pc + 1; c < C; ++c)
                if (row[c] != 0 && v[c] != 0) s += Rational(row[c]) * v[c];
            v[pc] = -s / Rational(row[pc]);
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Column-space basis: the original columns at the pivot positions.
inline std::vector<std::vector<Rational>> image_basis(const RationalMatrix& m) {
    auto e = detail::int_echelon(m);
    std::vector<std::vector<Rational>> basis;
    for (size_t c : e.pivot_cols) {
        std::vector<Rational> col(m.rows(), 0);
        for (size_t r = 0; r < m.rows(); ++r) col[r] = m.get(r, c);
        basis.push_back(std::move(col));
    }
    return basis;
}

/// dim ker(d_out) - rank(d_in) at the middle position of
///   . --d_in--> V --d_out--> .
/// The composition must vanish exactly.
inline size_t cohomology_dim(const RationalMatrix& d_in, const RationalMatrix& d_out) {
    if (d_in.cols() != 0 && d_out.cols() != d_in.rows())
        throw Error("complex positions do not line up");
    // d_out * d_in = 0, checked column by column
    for (size_t c = 0; c < d_in.cols(); ++c) {
        std::vector<Rational> col(d_in.rows(), 0);
        for (size_t r = 0; r < d_in.rows(); ++r) col[r] = d_in.get(r, c);
        for (const auto& v : d_out.apply(col))
            if (v != 0) throw ComplexViolationError("differentials do not compose to zero");
    }
    const size_t ker = d_out.cols() - rank(d_out);
    const size_t im = rank(d_in);
    if (im > ker) throw ComplexViolationError("image exceeds kernel");
    return ker - im;
}

}  // namespace pfaffkit

#endif
