#ifndef PFAFFKIT_GROUP_ACTION_HPP
#define PFAFFKIT_GROUP_ACTION_HPP

#include <string>
#include <vector>

#include "pfaffian.hpp"

namespace pfaffkit {

/// A finite-dimensional real Lie algebra given by rational structure
/// constants: [e_i, e_j] = sum_k C^k_{ij} e_k.  Antisymmetry and the
/// Jacobi identity are enforced at construction.
class LieAlgebraSpec {
public:
    LieAlgebraSpec(std::vector<std::string> basis,
                   std::vector<std::vector<std::vector<Rational>>> constants)
        : basis_(std::move(basis)), c_(std::move(constants)) {
        const size_t q = basis_.size();
        if (c_.size() != q) throw Error("structure constants: wrong outer dimension");
        for (const auto& ci : c_) {
            if (ci.size() != q) throw Error("structure constants: wrong middle dimension");
            for (const auto& cij : ci)
                if (cij.size() != q) throw Error("structure constants: wrong inner dimension");
        }
        for (size_t i = 0; i < q; ++i)
            for (size_t j = 0; j < q; ++j)
                for (size_t k = 0; k < q; ++k)
                    if (c_[i][j][k] != -c_[j][i][k])
                        throw Error("structure constants are not antisymmetric");
        if (!jacobi_holds()) throw Error("structure constants violate the Jacobi identity");
    }

    static LieAlgebraSpec abelian(std::vector<std::string> basis) {
        const size_t q = basis.size();
        return LieAlgebraSpec(std::move(basis),
                              std::vector(q, std::vector(q, std::vector<Rational>(q, 0))));
    }

    size_t dimension() const { return basis_.size(); }
    const std::vector<std::string>& basis() const { return basis_; }
    /// coefficient of e_k in [e_i, e_j]
    const Rational& c(size_t i, size_t j, size_t k) const { return c_[i][j][k]; }

    bool jacobi_holds() const {
        const size_t q = basis_.size();
        for (size_t i = 0; i < q; ++i)
            for (size_t j = i + 1; j < q; ++j)
                for (size_t k = j + 1; k < q; ++k)
                    for (size_t l = 0; l < q; ++l) {
                        Rational s = 0;
                        for (size_t m = 0; m < q; ++m)
                            s += c_[i][j][m] * c_[m][k][l] + c_[j][k][m] * c_[m][i][l] +
                                 c_[k][i][m] * c_[m][j][l];
                        if (s != 0) return false;
                    }
        return true;
    }

private:
    std::vector<std::string> basis_;
    std::vector<std::vector<std::vector<Rational>>> c_;
};

/// An infinitesimal action on the chart carrying a Pfaffian system: one
/// vector field per algebra basis element.
struct ActionSpec {
    LieAlgebraSpec algebra;
    std::vector<VectorField> fields;  // Phi(e_i)
    PfaffianSystem system;

    ActionSpec(LieAlgebraSpec alg, std::vector<VectorField> flds, PfaffianSystem sys)
        : algebra(std::move(alg)), fields(std::move(flds)), system(std::move(sys)) {
        if (fields.size() != algebra.dimension())
            throw Error("action needs one field per algebra basis element");
        for (const auto& f : fields) require_same_chart(f.chart(), system.chart());
    }
};

struct ActionReport {
    bool bracket_compatible = false;
    std::vector<bool> field_is_symmetry;  // per basis element
    bool jacobi_holds = false;

    bool ok() const {
        if (!bracket_compatible || !jacobi_holds) return false;
        for (bool b : field_is_symmetry)
            if (!b) return false;
        return true;
    }
};

/// Exact checks that Phi is a Lie algebra morphism into the symmetries of
/// the system: [Phi(e_i), Phi(e_j)] = sum_k C^k_{ij} Phi(e_k), and every
/// Phi(e_i) preserves the module of generators.
inline ActionReport check_action(const ActionSpec& A) {
    const auto& chart = A.system.chart();
    const size_t q = A.algebra.dimension();
    ActionReport rep;
    rep.jacobi_holds = A.algebra.jacobi_holds();
    rep.bracket_compatible = true;
    for (size_t i = 0; i < q && rep.bracket_compatible; ++i)
        for (size_t j = i + 1; j < q; ++j) {
            VectorField expect(chart,
                               std::vector<ScalarExpr>(chart->dimension(), ScalarExpr::zero(chart)));
            for (size_t k = 0; k < q; ++k) {
                const auto& c = A.algebra.c(i, j, k);
                if (c != 0) expect = expect + ScalarExpr::constant(chart, c) * A.fields[k];
            }
            if (!(lie_bracket(A.fields[i], A.fields[j]) == expect)) {
                rep.bracket_compatible = false;
                break;
            }
        }
    rep.field_is_symmetry.reserve(q);
    for (const auto& f : A.fields) rep.field_is_symmetry.push_back(is_symmetry(f, A.system));
    return rep;
}

struct TransversalityReport {
    bool ok = false;
    bool fields_independent = false;   // condition (i), at generic points
    bool complements_annihilator = false;  // condition (ii), at generic points
    std::string diagnostic;
    ScalarExpr frame_determinant;  // vanishing locus of the combined frame
};

/// Conditions for a transversally free action, decided at generic points:
/// (i) the q action fields are independent, (ii) together with the
/// annihilator they frame the tangent space.  The frame determinant is
/// reported so a failing locus can be excluded from the chart.
inline TransversalityReport check_transversally_free(const ActionSpec& A) {
    const auto& chart = A.system.chart();
    const size_t n = chart->dimension();
    const size_t q = A.algebra.dimension();
    TransversalityReport rep{false, false, false, "", ScalarExpr::zero(chart)};

    symlin::SymMatrix act;
    for (const auto& f : A.fields) act.push_back(f.components());
    rep.fields_independent = symlin::rank(act) == q;

    auto ann = annihilator(A.system);
    if (ann.fields.size() + q != n) {
        rep.diagnostic = "condition (ii) fails: annihilator rank " +
                         std::to_string(ann.fields.size()) + " + dim g " + std::to_string(q) +
                         " != chart dimension " + std::to_string(n);
        return rep;
    }
    symlin::SymMatrix frame(n, std::vector<ScalarExpr>(n, ScalarExpr::zero(chart)));
    for (size_t j = 0; j < ann.fields.size(); ++j)
        for (size_t i = 0; i < n; ++i) frame[i][j] = ann.fields[j].components()[i];
    for (size_t j = 0; j < q; ++j)
        for (size_t i = 0; i < n; ++i)
            frame[i][ann.fields.size() + j] = A.fields[j].components()[i];
    rep.frame_determinant = symlin::determinant(frame, chart);
    rep.complements_annihilator = !rep.frame_determinant.is_zero();

    if (!rep.fields_independent)
        rep.diagnostic = "condition (i) fails: action fields are dependent at generic points";
    else if (!rep.complements_annihilator)
        rep.diagnostic = "condition (ii) fails: action span does not complement the annihilator";
    rep.ok = rep.fields_independent && rep.complements_annihilator;
    return rep;
}

/// The coframe dual to the action fields inside the system: forms
/// w^1..w^q in the generator span with <Phi(e_i), w^j> = delta_i^j.
struct CartanBasis {
    std::vector<DifferentialForm> forms;
};

inline CartanBasis cartan_basis(const ActionSpec& A) {
    const auto& chart = A.system.chart();
    const size_t q = A.algebra.dimension();
    if (A.system.rank() != q)
        throw DegenerateSystemError("system rank " + std::to_string(A.system.rank()) +
                                    " does not match dim g " + std::to_string(q));
    // M[i][l] = <Phi(e_i), generator_l>
    symlin::SymMatrix M(q, std::vector<ScalarExpr>(q, ScalarExpr::zero(chart)));
    for (size_t i = 0; i < q; ++i)
        for (size_t l = 0; l < q; ++l) M[i][l] = pairing(A.fields[i], A.system.generators()[l]);
    auto inv = symlin::inverse(M, chart);
    if (inv.det.is_zero())
        throw DegenerateSystemError("action is not transverse to the system generators");
    if (!inv.inverse)
        throw NotInvertibleError("transversality determinant " + inv.det.str() +
                                 " is not a unit; localization needed");
    // w^j = sum_l A[j][l] generator_l with A = (M^{-1})^T
    CartanBasis B;
    for (size_t j = 0; j < q; ++j) {
        DifferentialForm w(chart, 1);
        for (size_t l = 0; l < q; ++l) {
            const ScalarExpr& a = (*inv.inverse)[l][j];
            if (!a.is_zero()) w = w + a * A.system.generators()[l];
        }
        B.forms.push_back(std::move(w));
    }
    return B;
}

/// Structure equation for a Cartan basis:
///   dw^i = sum_{j<k} c^i_{jk} w^j ^ w^k
/// with c = -C for the stored bracket constants.  `flip_sign` verifies the
/// opposite convention instead.
inline bool verify_structure_equation(const CartanBasis& B, const LieAlgebraSpec& g,
                                      bool flip_sign = false) {
    const size_t q = g.dimension();
    if (B.forms.size() != q) return false;
    const auto& chart = B.forms.empty() ? ChartPtr{} : B.forms[0].chart();
    for (size_t i = 0; i < q; ++i) {
        DifferentialForm rhs(chart, 2);
        for (size_t j = 0; j < q; ++j)
            for (size_t k = j + 1; k < q; ++k) {
                Rational c = -g.c(j, k, i);
                if (flip_sign) c = -c;
                if (c != 0) rhs = rhs + c * wedge(B.forms[j], B.forms[k]);
            }
        if (!(exterior_d(B.forms[i]) == rhs)) return false;
    }
    return true;
}

/// Decomposition of a symmetry against the Cartan basis:
///   xi = sum_i f_i Phi(e_i) + eta,  f_i = <xi, w^i>,  eta tangent to Sigma.
struct Lemma2Decomposition {
    std::vector<ScalarExpr> coefficients;  // f_i
    VectorField remainder;                 // eta
    std::vector<bool> coefficient_is_first_integral;
    bool remainder_tangent = false;
    bool exact = false;  // reassembly reproduces xi (holds by construction)

    bool ok() const {
        if (!remainder_tangent || !exact) return false;
        for (bool b : coefficient_is_first_integral)
            if (!b) return false;
        return true;
    }
};

inline Lemma2Decomposition verify_lemma2_generation(const ActionSpec& A, const VectorField& xi) {
    const auto& chart = A.system.chart();
    require_same_chart(xi.chart(), chart);
    auto B = cartan_basis(A);
    Lemma2Decomposition dec{{},
                            VectorField(chart, std::vector<ScalarExpr>(chart->dimension(),
                                                                       ScalarExpr::zero(chart))),
                            {},
                            false,
                            false};
    VectorField assembled(chart,
                          std::vector<ScalarExpr>(chart->dimension(), ScalarExpr::zero(chart)));
    for (size_t i = 0; i < B.forms.size(); ++i) {
        ScalarExpr f = pairing(xi, B.forms[i]);
        dec.coefficient_is_first_integral.push_back(is_first_integral(f, A.system));
        assembled = assembled + f * A.fields[i];
        dec.coefficients.push_back(std::move(f));
    }
    dec.remainder = xi - assembled;
    dec.remainder_tangent = true;
    for (const auto& w : A.system.generators())
        if (!pairing(dec.remainder, w).is_zero()) {
            dec.remainder_tangent = false;
            break;
        }
    dec.exact = (assembled + dec.remainder == xi);
    return dec;
}

}  // namespace pfaffkit

#endif
