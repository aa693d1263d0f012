#ifndef PFAFFKIT_FORMS_HPP
#define PFAFFKIT_FORMS_HPP

#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "scalar.hpp"

namespace pfaffkit {

using IndexTuple = std::vector<unsigned>;

namespace detail {

/// Sort an index tuple, returning the permutation parity sign, or 0 when an
/// index repeats.
inline int sort_tuple(IndexTuple& idx) {
    int sign = 1;
    for (size_t i = 1; i < idx.size(); ++i) {
        for (size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
            if (idx[j - 1] == idx[j]) return 0;
            std::swap(idx[j - 1], idx[j]);
            sign = -sign;
        }
    }
    return sign;
}

}  // namespace detail

/// Exterior form on a chart, stored sparsely: strictly increasing coordinate
/// index tuples -> ScalarExpr coefficients.  All signs come from sorting
/// permutation parity, so representations are canonical and equality is
/// decidable.
class DifferentialForm {
public:
    DifferentialForm(ChartPtr chart, unsigned degree)
        : chart_(std::move(chart)), degree_(degree) {}

    static DifferentialForm from_scalar(const ScalarExpr& f) {
        DifferentialForm w(f.chart(), 0);
        w.add_term({}, f);
        return w;
    }

    /// dx^i as a 1-form.
    static DifferentialForm coordinate_differential(const ChartPtr& chart,
                                                    const std::string& name) {
        DifferentialForm w(chart, 1);
        w.add_term({unsigned(chart->coord_index(name))}, ScalarExpr::one(chart));
        return w;
    }

    const ChartPtr& chart() const { return chart_; }
    unsigned degree() const { return degree_; }
    const std::map<IndexTuple, ScalarExpr>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// Adds c * dx^{idx}; idx need not be sorted.
    void add_term(IndexTuple idx, const ScalarExpr& c) {
        if (idx.size() != degree_) throw Error("index tuple length != degree");
        if (c.is_zero()) return;
        int sign = detail::sort_tuple(idx);
        if (sign == 0) return;
        for (unsigned i : idx)
            if (i >= chart_->dimension()) throw Error("coordinate index out of range");
        auto it = terms_.find(idx);
        ScalarExpr add = sign > 0 ? c : -c;
        if (it == terms_.end()) {
            terms_.emplace(std::move(idx), std::move(add));
        } else {
            it->second = it->second + add;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    ScalarExpr coefficient(IndexTuple idx) const {
        int sign = detail::sort_tuple(idx);
        if (sign == 0) return ScalarExpr::zero(chart_);
        auto it = terms_.find(idx);
        if (it == terms_.end()) return ScalarExpr::zero(chart_);
        return sign > 0 ? it->second : -it->second;
    }

    friend DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b) {
        require_same_chart(a.chart_, b.chart_);
        if (a.degree_ != b.degree_) {
            // the zero form is degree-agnostic
            if (a.is_zero()) return b;
            if (b.is_zero()) return a;
            throw Error("degree mismatch in form addition");
        }
        DifferentialForm out = a;
        for (const auto& [k, c] : b.terms_) out.add_term(k, c);
        return out;
    }
    friend DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b) {
        return a + (-b);
    }
    DifferentialForm operator-() const {
        DifferentialForm out(chart_, degree_);
        for (const auto& [k, c] : terms_) out.terms_.emplace(k, -c);
        return out;
    }
    friend DifferentialForm operator*(const ScalarExpr& f, const DifferentialForm& a) {
        DifferentialForm out(a.chart_, a.degree_);
        for (const auto& [k, c] : a.terms_) out.add_term(k, f * c);
        return out;
    }
    friend DifferentialForm operator*(const Rational& f, const DifferentialForm& a) {
        return ScalarExpr::constant(a.chart_, f) * a;
    }

    friend bool operator==(const DifferentialForm& a, const DifferentialForm& b) {
        require_same_chart(a.chart_, b.chart_);
        if (a.degree_ != b.degree_) return a.is_zero() && b.is_zero();
        return a.terms_ == b.terms_;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [k, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << "(" << c.str() << ")";
            for (unsigned i : k) os << "*d" << chart_->coord(i).name;
        }
        return os.str();
    }

private:
    ChartPtr chart_;
    unsigned degree_;
    std::map<IndexTuple, ScalarExpr> terms_;
};

/// Vector field with one ScalarExpr component per coordinate.
class VectorField {
public:
    explicit VectorField(const ChartPtr& chart)
        : chart_(chart), components_(chart->dimension(), ScalarExpr::zero(chart)) {}

    VectorField(const ChartPtr& chart, std::vector<ScalarExpr> components)
        : chart_(chart), components_(std::move(components)) {
        if (components_.size() != chart->dimension())
            throw Error("component list length != chart dimension");
        for (const auto& c : components_) require_same_chart(c.chart(), chart);
    }

    /// d/dx^name.
    static VectorField coordinate_field(const ChartPtr& chart, const std::string& name) {
        VectorField v(chart);
        v.components_[chart->coord_index(name)] = ScalarExpr::one(chart);
        return v;
    }

    const ChartPtr& chart() const { return chart_; }
    const std::vector<ScalarExpr>& components() const { return components_; }
    const ScalarExpr& component(size_t i) const { return components_.at(i); }

    bool is_zero() const {
        for (const auto& c : components_)
            if (!c.is_zero()) return false;
        return true;
    }

    /// Directional derivative of a scalar.
    ScalarExpr apply(const ScalarExpr& f) const {
        require_same_chart(f.chart(), chart_);
        ScalarExpr out = ScalarExpr::zero(chart_);
        for (size_t i = 0; i < components_.size(); ++i)
            if (!components_[i].is_zero()) out = out + components_[i] * f.partial(i);
        return out;
    }

    friend VectorField operator+(const VectorField& a, const VectorField& b) {
        require_same_chart(a.chart_, b.chart_);
        VectorField out(a.chart_);
        for (size_t i = 0; i < out.components_.size(); ++i)
            out.components_[i] = a.components_[i] + b.components_[i];
        return out;
    }
    friend VectorField operator-(const VectorField& a, const VectorField& b) {
        return a + (ScalarExpr::constant(a.chart_, -1) * b);
    }
    friend VectorField operator*(const ScalarExpr& f, const VectorField& a) {
        VectorField out(a.chart_);
        for (size_t i = 0; i < out.components_.size(); ++i) out.components_[i] = f * a.components_[i];
        return out;
    }

    friend bool operator==(const VectorField& a, const VectorField& b) {
        require_same_chart(a.chart_, b.chart_);
        return a.components_ == b.components_;
    }

    std::string str() const {
        std::ostringstream os;
        bool first = true;
        for (size_t i = 0; i < components_.size(); ++i) {
            if (components_[i].is_zero()) continue;
            if (!first) os << " + ";
            first = false;
            os << "(" << components_[i].str() << ")*d/d" << chart_->coord(i).name;
        }
        if (first) return "0";
        return os.str();
    }

private:
    ChartPtr chart_;
    std::vector<ScalarExpr> components_;
};

/// Vector valued 1-form u : TM -> TM in coordinate-matrix presentation.
/// Rows index output components, columns index input coordinate slots:
/// (u(xi))^i = sum_k matrix[i][k] xi^k.
class VectorValuedOneForm {
public:
    explicit VectorValuedOneForm(const ChartPtr& chart)
        : chart_(chart),
          matrix_(chart->dimension(),
                  std::vector<ScalarExpr>(chart->dimension(), ScalarExpr::zero(chart))) {}

    static VectorValuedOneForm identity(const ChartPtr& chart) {
        VectorValuedOneForm u(chart);
        for (size_t i = 0; i < chart->dimension(); ++i)
            u.matrix_[i][i] = ScalarExpr::one(chart);
        return u;
    }

    const ChartPtr& chart() const { return chart_; }
    const ScalarExpr& entry(size_t row, size_t col) const { return matrix_.at(row).at(col); }
    void set_entry(size_t row, size_t col, ScalarExpr v) {
        require_same_chart(v.chart(), chart_);
        matrix_.at(row).at(col) = std::move(v);
    }

    VectorField apply(const VectorField& xi) const {
        require_same_chart(xi.chart(), chart_);
        VectorField out(chart_);
        std::vector<ScalarExpr> comps(chart_->dimension(), ScalarExpr::zero(chart_));
        for (size_t i = 0; i < chart_->dimension(); ++i)
            for (size_t k = 0; k < chart_->dimension(); ++k)
                if (!matrix_[i][k].is_zero() && !xi.component(k).is_zero())
                    comps[i] = comps[i] + matrix_[i][k] * xi.component(k);
        return VectorField(chart_, std::move(comps));
    }

    /// Transpose action on coordinate differentials: u* dx^i = sum_k u[i][k] dx^k.
    DifferentialForm pullback_basis(unsigned i) const {
        DifferentialForm w(chart_, 1);
        for (unsigned k = 0; k < chart_->dimension(); ++k) w.add_term({k}, matrix_[i][k]);
        return w;
    }

    friend VectorValuedOneForm operator+(const VectorValuedOneForm& a,
                                         const VectorValuedOneForm& b) {
        require_same_chart(a.chart_, b.chart_);
        VectorValuedOneForm out(a.chart_);
        for (size_t i = 0; i < a.matrix_.size(); ++i)
            for (size_t j = 0; j < a.matrix_.size(); ++j)
                out.matrix_[i][j] = a.matrix_[i][j] + b.matrix_[i][j];
        return out;
    }
    friend VectorValuedOneForm operator-(const VectorValuedOneForm& a,
                                         const VectorValuedOneForm& b) {
        VectorValuedOneForm out(a.chart_);
        for (size_t i = 0; i < a.matrix_.size(); ++i)
            for (size_t j = 0; j < a.matrix_.size(); ++j)
                out.matrix_[i][j] = a.matrix_[i][j] - b.matrix_[i][j];
        return out;
    }
    friend VectorValuedOneForm operator*(const VectorValuedOneForm& a,
                                         const VectorValuedOneForm& b) {
        require_same_chart(a.chart_, b.chart_);
        VectorValuedOneForm out(a.chart_);
        const size_t n = a.matrix_.size();
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                ScalarExpr s = ScalarExpr::zero(a.chart_);
                for (size_t k = 0; k < n; ++k) s = s + a.matrix_[i][k] * b.matrix_[k][j];
                out.matrix_[i][j] = std::move(s);
            }
        return out;
    }

    friend bool operator==(const VectorValuedOneForm& a, const VectorValuedOneForm& b) {
        require_same_chart(a.chart_, b.chart_);
        return a.matrix_ == b.matrix_;
    }

private:
    ChartPtr chart_;
    std::vector<std::vector<ScalarExpr>> matrix_;
};

// ---------------------------------------------------------------------------
// Operations

inline DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
    require_same_chart(a.chart(), b.chart());
    const unsigned deg = a.degree() + b.degree();
    DifferentialForm out(a.chart(), deg);
    if (deg > a.chart()->dimension()) return out;  // zero form, not an error
    for (const auto& [ka, ca] : a.terms()) {
        for (const auto& [kb, cb] : b.terms()) {
            IndexTuple idx = ka;
            idx.insert(idx.end(), kb.begin(), kb.end());
            out.add_term(std::move(idx), ca * cb);
        }
    }
    return out;
}

inline DifferentialForm exterior_d(const DifferentialForm& w) {
    DifferentialForm out(w.chart(), w.degree() + 1);
    if (out.degree() > w.chart()->dimension()) return out;
    for (const auto& [k, c] : w.terms()) {
        for (unsigned i = 0; i < w.chart()->dimension(); ++i) {
            ScalarExpr dc = c.partial(i);
            if (dc.is_zero()) continue;
            IndexTuple idx;
            idx.reserve(k.size() + 1);
            idx.push_back(i);
            idx.insert(idx.end(), k.begin(), k.end());
            out.add_term(std::move(idx), dc);
        }
    }
    return out;
}

inline DifferentialForm interior(const VectorField& xi, const DifferentialForm& w) {
    require_same_chart(xi.chart(), w.chart());
    if (w.degree() == 0) return DifferentialForm(w.chart(), 0);  // vanishes on functions
    DifferentialForm out(w.chart(), w.degree() - 1);
    for (const auto& [k, c] : w.terms()) {
        for (size_t m = 0; m < k.size(); ++m) {
            const ScalarExpr& comp = xi.component(k[m]);
            if (comp.is_zero()) continue;
            IndexTuple idx;
            idx.reserve(k.size() - 1);
            for (size_t j = 0; j < k.size(); ++j)
                if (j != m) idx.push_back(k[j]);
            ScalarExpr coef = comp * c;
            if (m % 2) coef = -coef;
            out.add_term(std::move(idx), coef);
        }
    }
    return out;
}

inline VectorField lie_bracket(const VectorField& a, const VectorField& b) {
    require_same_chart(a.chart(), b.chart());
    const auto& chart = a.chart();
    std::vector<ScalarExpr> comps(chart->dimension(), ScalarExpr::zero(chart));
    for (size_t i = 0; i < chart->dimension(); ++i)
        comps[i] = a.apply(b.component(i)) - b.apply(a.component(i));
    return VectorField(chart, std::move(comps));
}

/// Cartan formula: theta(xi) = i(xi) d + d i(xi).
inline DifferentialForm lie_derivative(const VectorField& xi, const DifferentialForm& w) {
    return interior(xi, exterior_d(w)) + exterior_d(interior(xi, w));
}

/// Degree-zero interior derivation i_u attached to a vector valued 1-form:
/// i_u w(xi_1,...,xi_r) = sum_j w(xi_1,...,u(xi_j),...,xi_r).
inline DifferentialForm insert_vv(const VectorValuedOneForm& u, const DifferentialForm& w) {
    require_same_chart(u.chart(), w.chart());
    DifferentialForm out(w.chart(), w.degree());
    if (w.degree() == 0) return out;  // vanishes on functions
    for (const auto& [k, c] : w.terms()) {
        for (size_t m = 0; m < k.size(); ++m) {
            const DifferentialForm sub = u.pullback_basis(k[m]);
            for (const auto& [k1, c1] : sub.terms()) {
                IndexTuple idx = k;
                idx[m] = k1[0];
                out.add_term(std::move(idx), c * c1);
            }
        }
    }
    return out;
}

/// Froelicher-Nijenhuis derivation of type d: d_u = [i_u, d] = i_u d - d i_u.
inline DifferentialForm fn_derivation(const VectorValuedOneForm& u, const DifferentialForm& w) {
    return insert_vv(u, exterior_d(w)) - exterior_d(insert_vv(u, w));
}

/// <xi, w> for a 1-form w.
inline ScalarExpr pairing(const VectorField& xi, const DifferentialForm& w) {
    if (w.degree() != 1) throw Error("pairing needs a 1-form");
    DifferentialForm p = interior(xi, w);
    return p.coefficient(IndexTuple{});
}

}  // namespace pfaffkit

#endif
