#ifndef PFAFFKIT_PFAFFIAN_HPP
#define PFAFFKIT_PFAFFIAN_HPP

#include <string>
#include <vector>

#include "forms.hpp"
#include "symbolic_linalg.hpp"

namespace pfaffkit {

namespace detail {

// q x n coefficient matrix of a family of 1-forms.
inline symlin::SymMatrix one_form_matrix(const ChartPtr& chart,
                                         const std::vector<DifferentialForm>& forms) {
    const size_t n = chart->dimension();
    symlin::SymMatrix m;
    m.reserve(forms.size());
    for (const auto& w : forms) {
        if (w.degree() != 1 && !w.is_zero())
            throw Error("expected a 1-form");
        std::vector<ScalarExpr> row(n, ScalarExpr::zero(chart));
        for (const auto& [idx, coef] : w.terms()) row[idx[0]] = coef;
        m.push_back(std::move(row));
    }
    return m;
}

}  // namespace detail

/// A distribution given by a spanning family of vector fields.
struct Distribution {
    ChartPtr chart;
    std::vector<VectorField> fields;

    size_t rank() const {
        symlin::SymMatrix m;
        for (const auto& f : fields) m.push_back(f.components());
        return symlin::rank(m);
    }
};

/// A Pfaffian system: finitely generated module of 1-forms, represented by
/// generators that are independent at generic points.  Identically-zero
/// generators are dropped; a generic rank drop among the rest is an error.
class PfaffianSystem {
public:
    PfaffianSystem(ChartPtr chart, std::vector<DifferentialForm> generators)
        : chart_(std::move(chart)) {
        for (auto& w : generators) {
            require_same_chart(chart_, w.chart());
            if (w.is_zero()) continue;
            if (w.degree() != 1) throw Error("Pfaffian system generators must be 1-forms");
            generators_.push_back(std::move(w));
        }
        const auto m = detail::one_form_matrix(chart_, generators_);
        if (symlin::rank(m) != generators_.size())
            throw DegenerateSystemError("generators are dependent at generic points");
    }

    const ChartPtr& chart() const { return chart_; }
    const std::vector<DifferentialForm>& generators() const { return generators_; }
    size_t rank() const { return generators_.size(); }

    symlin::SymMatrix coefficient_matrix() const {
        return detail::one_form_matrix(chart_, generators_);
    }

private:
    ChartPtr chart_;
    std::vector<DifferentialForm> generators_;
};

/// The annihilator distribution: all fields eta with <eta, w> = 0 for every
/// generator w.  Basis fields have ring-element components.
inline Distribution annihilator(const PfaffianSystem& S) {
    const auto kern = symlin::kernel_basis(S.coefficient_matrix(), S.chart());
    Distribution d{S.chart(), {}};
    d.fields.reserve(kern.size());
    for (auto& v : kern) d.fields.emplace_back(S.chart(), v);
    return d;
}

/// Frobenius in exterior form: dw ^ w^1 ^ ... ^ w^q = 0 for each generator.
inline bool is_integrable(const PfaffianSystem& S) {
    DifferentialForm all = DifferentialForm::from_scalar(ScalarExpr::one(S.chart()));
    for (const auto& w : S.generators()) all = wedge(all, w);
    for (const auto& w : S.generators())
        if (!wedge(exterior_d(w), all).is_zero()) return false;
    return true;
}

/// w is invariant for S when i(eta)w = 0 and i(eta)dw = 0 for every eta
/// annihilating S.
inline bool is_invariant_form(const DifferentialForm& w, const PfaffianSystem& S) {
    require_same_chart(w.chart(), S.chart());
    const auto dw = exterior_d(w);
    for (const auto& eta : annihilator(S).fields) {
        if (!interior(eta, w).is_zero()) return false;
        if (!interior(eta, dw).is_zero()) return false;
    }
    return true;
}

/// f is a first integral when df lies in the module generated by S.
inline bool is_first_integral(const ScalarExpr& f, const PfaffianSystem& S) {
    require_same_chart(f.chart(), S.chart());
    const auto df = exterior_d(DifferentialForm::from_scalar(f));
    std::vector<ScalarExpr> row(S.chart()->dimension(), ScalarExpr::zero(S.chart()));
    for (const auto& [idx, coef] : df.terms()) row[idx[0]] = coef;
    return symlin::in_row_span(S.coefficient_matrix(), row);
}

/// xi is an (infinitesimal) symmetry when theta(xi) maps the module into
/// itself, i.e. theta(xi)w lies in the span of the generators for each w.
inline bool is_symmetry(const VectorField& xi, const PfaffianSystem& S) {
    require_same_chart(xi.chart(), S.chart());
    const auto m = S.coefficient_matrix();
    for (const auto& w : S.generators()) {
        const auto lw = lie_derivative(xi, w);
        std::vector<ScalarExpr> row(S.chart()->dimension(), ScalarExpr::zero(S.chart()));
        for (const auto& [idx, coef] : lw.terms()) row[idx[0]] = coef;
        if (!symlin::in_row_span(m, row)) return false;
    }
    return true;
}

/// A splitting TM = V (+) H encoded by the two projection-valued 1-forms.
struct Splitting {
    VectorValuedOneForm vertical;
    VectorValuedOneForm horizontal;
};

/// Build the complementary projections determined by two distributions
/// whose spanning fields together frame the tangent space.  The frame
/// matrix must be invertible in the ring; a non-unit determinant names the
/// missing denominator.
inline Splitting make_splitting(const Distribution& vert, const Distribution& horiz) {
    require_same_chart(vert.chart, horiz.chart);
    const auto& chart = vert.chart;
    const size_t n = chart->dimension();
    std::vector<const VectorField*> frame;
    for (const auto& f : vert.fields) frame.push_back(&f);
    for (const auto& f : horiz.fields) frame.push_back(&f);
    if (frame.size() != n)
        throw DegenerateSystemError("distributions do not frame the tangent space: " +
                                    std::to_string(frame.size()) + " fields on a " +
                                    std::to_string(n) + "-dimensional chart");
    // columns of B are the frame fields
    symlin::SymMatrix B(n, std::vector<ScalarExpr>(n, ScalarExpr::zero(chart)));
    for (size_t j = 0; j < n; ++j)
        for (size_t i = 0; i < n; ++i) B[i][j] = frame[j]->components()[i];
    auto inv = symlin::inverse(B, chart);
    if (inv.det.is_zero())
        throw DegenerateSystemError("distributions are not complementary at generic points");
    if (!inv.inverse)
        throw NotInvertibleError("frame determinant " + inv.det.str() +
                                 " is not a unit; localization needed");
    // V = B diag(1..1,0..0) B^{-1}; H = Id - V
    VectorValuedOneForm V(chart), H(chart);
    const size_t rv = vert.fields.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            ScalarExpr vij = ScalarExpr::zero(chart);
            for (size_t k = 0; k < rv; ++k) vij = vij + B[i][k] * (*inv.inverse)[k][j];
            V.set_entry(i, j, vij);
            ScalarExpr hij = -vij;
            if (i == j) hij = hij + ScalarExpr::one(chart);
            H.set_entry(i, j, hij);
        }
    }
    return {std::move(V), std::move(H)};
}

/// The annihilator basis normalized against chosen transverse coordinates:
/// fields eta_i in the annihilator of S with <eta_i, dx^{c_j}> = delta_ij.
struct DualHorizontalBasis {
    std::vector<VectorField> fields;
    bool brackets_vanish;  // all [eta_i, eta_j] = 0 (holds when S is integrable)
};

inline DualHorizontalBasis dual_horizontal_basis(const PfaffianSystem& S,
                                                 const std::vector<std::string>& coords) {
    const auto& chart = S.chart();
    auto ann = annihilator(S);
    const size_t p = ann.fields.size();
    if (coords.size() != p)
        throw Error("expected " + std::to_string(p) + " transverse coordinates, got " +
                    std::to_string(coords.size()));
    // P[a][j] = <B_a, dx^{c_j}>
    symlin::SymMatrix P(p, std::vector<ScalarExpr>(p, ScalarExpr::zero(chart)));
    for (size_t a = 0; a < p; ++a)
        for (size_t j = 0; j < p; ++j)
            P[a][j] = ann.fields[a].components()[chart->coord_index(coords[j])];
    auto inv = symlin::inverse(P, chart);
    if (inv.det.is_zero())
        throw DegenerateSystemError("coordinates are not transverse to the system");
    if (!inv.inverse)
        throw NotInvertibleError("transversality determinant " + inv.det.str() +
                                 " is not a unit; localization needed");
    // eta_i = sum_a C[i][a] B_a with C P = Id, so C = P^{-1}.
    DualHorizontalBasis out{{}, true};
    for (size_t i = 0; i < p; ++i) {
        std::vector<ScalarExpr> comps(chart->dimension(), ScalarExpr::zero(chart));
        for (size_t a = 0; a < p; ++a) {
            const ScalarExpr& c = (*inv.inverse)[i][a];
            if (c.is_zero()) continue;
            for (size_t k = 0; k < chart->dimension(); ++k)
                comps[k] = comps[k] + c * ann.fields[a].components()[k];
        }
        out.fields.emplace_back(chart, std::move(comps));
    }
    for (size_t i = 0; i < p && out.brackets_vanish; ++i)
        for (size_t j = i + 1; j < p; ++j)
            if (!lie_bracket(out.fields[i], out.fields[j]).is_zero()) {
                out.brackets_vanish = false;
                break;
            }
    return out;
}

}  // namespace pfaffkit

#endif
