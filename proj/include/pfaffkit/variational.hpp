#ifndef PFAFFKIT_VARIATIONAL_HPP
#define PFAFFKIT_VARIATIONAL_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "exact_linalg.hpp"
#include "group_action.hpp"

namespace pfaffkit {

/// Coefficient truncation: polynomial total degree at most `degree`,
/// Fourier frequency at most `freq` per periodic coordinate.
struct Truncation {
    unsigned degree = 3;
    unsigned freq = 3;
};

class FoliatedModel;
using ModelPtr = std::shared_ptr<const FoliatedModel>;

/// A chart split into horizontal coordinates x^1..x^p (spanning the
/// distribution) and vertical coordinates y^1..y^q (cutting out the leaves
/// y = const); the Pfaffian system is <dy^1..dy^q>.  An attached action
/// must be transversally free with fields tangent to the vertical
/// directions.  Declared denominators may only involve vertical
/// coordinates, so horizontal antiderivatives always stay in the ring.
class FoliatedModel : public std::enable_shared_from_this<FoliatedModel> {
public:
    static ModelPtr make(const ChartPtr& chart, const std::vector<std::string>& horizontal,
                         const std::vector<std::string>& vertical) {
        return ModelPtr(new FoliatedModel(chart, horizontal, vertical, std::nullopt));
    }
    static ModelPtr make(const ChartPtr& chart, const std::vector<std::string>& horizontal,
                         const std::vector<std::string>& vertical, LieAlgebraSpec algebra,
                         std::vector<VectorField> fields) {
        auto m = ModelPtr(new FoliatedModel(chart, horizontal, vertical, std::nullopt));
        ActionSpec action(std::move(algebra), std::move(fields), m->system());
        for (const auto& f : action.fields)
            for (size_t i : m->horizontal_)
                if (!f.components()[i].is_zero())
                    throw Error("action fields must be tangent to the vertical directions");
        if (!check_action(action).ok()) throw Error("action is not a Lie algebra action on the system");
        if (!check_transversally_free(action).ok)
            throw DegenerateSystemError("attached action is not transversally free");
        return ModelPtr(new FoliatedModel(chart, horizontal, vertical, std::move(action)));
    }

    const ChartPtr& chart() const { return chart_; }
    const std::vector<size_t>& horizontal() const { return horizontal_; }
    const std::vector<size_t>& vertical() const { return vertical_; }
    size_t p() const { return horizontal_.size(); }
    size_t q() const { return vertical_.size(); }
    bool is_vertical(size_t i) const { return vertical_mask_[i]; }
    const PfaffianSystem& system() const { return system_; }
    bool has_action() const { return action_.has_value(); }
    const ActionSpec& action() const {
        if (!action_) throw Error("no action attached to the model");
        return *action_;
    }

private:
    FoliatedModel(const ChartPtr& chart, const std::vector<std::string>& horizontal,
                  const std::vector<std::string>& vertical, std::optional<ActionSpec> action)
        : chart_(chart), system_(chart, vertical_differentials(chart, vertical)),
          action_(std::move(action)) {
        vertical_mask_.assign(chart->dimension(), 0);
        for (const auto& n : vertical) {
            const size_t i = chart->coord_index(n);
            if (vertical_mask_[i]) throw Error("duplicate vertical coordinate " + n);
            vertical_mask_[i] = 1;
            vertical_.push_back(i);
        }
        for (const auto& n : horizontal) {
            const size_t i = chart->coord_index(n);
            if (vertical_mask_[i]) throw Error("coordinate " + n + " is both horizontal and vertical");
            horizontal_.push_back(i);
        }
        if (horizontal_.size() + vertical_.size() != chart->dimension())
            throw Error("horizontal and vertical coordinates must partition the chart");
        for (const auto& den : chart->denominators())
            for (size_t i : horizontal_)
                for (const auto& [key, c] : den)
                    if (key.exp[i] != 0)
                        throw Error("declared denominators may not involve horizontal coordinates");
    }

    static std::vector<DifferentialForm> vertical_differentials(
        const ChartPtr& chart, const std::vector<std::string>& vertical) {
        std::vector<DifferentialForm> gens;
        gens.reserve(vertical.size());
        for (const auto& n : vertical)
            gens.push_back(DifferentialForm::coordinate_differential(chart, n));
        return gens;
    }

    ChartPtr chart_;
    std::vector<size_t> horizontal_, vertical_;
    std::vector<char> vertical_mask_;
    PfaffianSystem system_;
    std::optional<ActionSpec> action_;
};

/// An element of Phi^{r,s}: contact factor in the dy's, horizontal factor
/// in the dx's.  Terms are keyed by the pair of strictly increasing index
/// tuples (vertical, horizontal).
class BigradedForm {
public:
    using Key = std::pair<IndexTuple, IndexTuple>;

    BigradedForm(ModelPtr model, unsigned r, unsigned s)
        : model_(std::move(model)), r_(r), s_(s) {}

    const ModelPtr& model() const { return model_; }
    unsigned contact_degree() const { return r_; }
    unsigned horizontal_degree() const { return s_; }
    const std::map<Key, ScalarExpr>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(IndexTuple vert, IndexTuple horiz, const ScalarExpr& coeff) {
        if (vert.size() != r_ || horiz.size() != s_) throw Error("bidegree mismatch in term");
        int sign = detail::sort_tuple(vert) * detail::sort_tuple(horiz);
        if (sign == 0 || coeff.is_zero()) return;
        for (unsigned i : vert)
            if (!model_->is_vertical(i)) throw Error("contact factor must use vertical indices");
        for (unsigned i : horiz)
            if (model_->is_vertical(i)) throw Error("horizontal factor must use horizontal indices");
        Key key{std::move(vert), std::move(horiz)};
        auto it = terms_.find(key);
        const ScalarExpr add = sign < 0 ? -coeff : coeff;
        if (it == terms_.end()) {
            terms_.emplace(std::move(key), add);
        } else {
            it->second = it->second + add;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    DifferentialForm to_form() const {
        DifferentialForm w(model_->chart(), r_ + s_);
        for (const auto& [key, c] : terms_) {
            IndexTuple idx = key.first;
            idx.insert(idx.end(), key.second.begin(), key.second.end());
            w.add_term(std::move(idx), c);
        }
        return w;
    }

    friend BigradedForm operator+(const BigradedForm& a, const BigradedForm& b) {
        require_compatible(a, b);
        BigradedForm out = a;
        for (const auto& [key, c] : b.terms_) out.add_term(key.first, key.second, c);
        return out;
    }
    friend BigradedForm operator-(const BigradedForm& a, const BigradedForm& b) {
        require_compatible(a, b);
        BigradedForm out = a;
        for (const auto& [key, c] : b.terms_) out.add_term(key.first, key.second, -c);
        return out;
    }
    BigradedForm operator-() const {
        BigradedForm out(model_, r_, s_);
        for (const auto& [key, c] : terms_) out.terms_.emplace(key, -c);
        return out;
    }
    friend BigradedForm operator*(const ScalarExpr& f, const BigradedForm& w) {
        BigradedForm out(w.model_, w.r_, w.s_);
        if (f.is_zero()) return out;
        for (const auto& [key, c] : w.terms_) {
            ScalarExpr fc = f * c;
            if (!fc.is_zero()) out.terms_.emplace(key, std::move(fc));
        }
        return out;
    }
    friend bool operator==(const BigradedForm& a, const BigradedForm& b) {
        if (a.is_zero() && b.is_zero()) return true;
        require_compatible(a, b);
        return (a - b).is_zero();
    }

private:
    static void require_compatible(const BigradedForm& a, const BigradedForm& b) {
        if (a.model_ != b.model_) throw ChartMismatchError();
        if ((a.r_ != b.r_ || a.s_ != b.s_) && !a.is_zero() && !b.is_zero())
            throw Error("bidegree mismatch");
    }

    ModelPtr model_;
    unsigned r_, s_;
    std::map<Key, ScalarExpr> terms_;
};

/// Component of type (r,s) of an arbitrary form, with the sign of moving
/// the contact differentials in front of the horizontal ones.
inline BigradedForm bidegree_component(const ModelPtr& model, const DifferentialForm& w,
                                       unsigned r, unsigned s) {
    require_same_chart(model->chart(), w.chart());
    BigradedForm out(model, r, s);
    for (const auto& [idx, c] : w.terms()) {
        IndexTuple vert, horiz;
        int inversions = 0;
        for (unsigned i : idx) {
            if (model->is_vertical(i)) {
                inversions += int(horiz.size());
                vert.push_back(i);
            } else {
                horiz.push_back(i);
            }
        }
        if (vert.size() != r || horiz.size() != s) continue;
        out.add_term(std::move(vert), std::move(horiz),
                     (inversions % 2) ? -c : c);
    }
    return out;
}

/// Horizontal differential (foliated-chart formula): differentiate the
/// coefficient along each x^i and wedge dx^i in front of the horizontal
/// factor.
inline BigradedForm d_H(const BigradedForm& w) {
    const auto& model = w.model();
    BigradedForm out(model, w.contact_degree(), w.horizontal_degree() + 1);
    if (w.horizontal_degree() >= model->p()) return out;
    for (const auto& [key, c] : w.terms()) {
        for (size_t i : model->horizontal()) {
            ScalarExpr dc = c.partial(i);
            if (dc.is_zero()) continue;
            IndexTuple horiz = key.second;
            horiz.insert(horiz.begin(), unsigned(i));
            out.add_term(key.first, std::move(horiz), dc);
        }
    }
    return out;
}

/// Bicomplex vertical differential on Phi^{r,s} (the column operator of
/// the double complex): differentiate along each y and wedge dy in front
/// of the contact factor.  The full exterior differential decomposes as
/// d = d_V_phi + (-1)^r d_H on a type-(r,s) component.
inline BigradedForm d_V_phi(const BigradedForm& w) {
    const auto& model = w.model();
    BigradedForm out(model, w.contact_degree() + 1, w.horizontal_degree());
    for (const auto& [key, c] : w.terms()) {
        for (size_t i : model->vertical()) {
            ScalarExpr dc = c.partial(i);
            if (dc.is_zero()) continue;
            IndexTuple vert = key.first;
            vert.insert(vert.begin(), unsigned(i));
            out.add_term(std::move(vert), key.second, dc);
        }
    }
    return out;
}

namespace detail {

// interior product with d/dx^i inside the horizontal factor only
inline BigradedForm contract_horizontal(const BigradedForm& w, size_t i) {
    const auto& model = w.model();
    BigradedForm out(model, w.contact_degree(), w.horizontal_degree() - 1);
    for (const auto& [key, c] : w.terms()) {
        const auto& horiz = key.second;
        for (size_t pos = 0; pos < horiz.size(); ++pos) {
            if (horiz[pos] != i) continue;
            IndexTuple rest;
            rest.reserve(horiz.size() - 1);
            for (size_t t = 0; t < horiz.size(); ++t)
                if (t != pos) rest.push_back(horiz[t]);
            out.add_term(key.first, std::move(rest), (pos % 2) ? -c : c);
            break;
        }
    }
    return out;
}

}  // namespace detail

/// Coordinate-wise homotopy along the horizontal directions: returns
/// (primitive, remainder) with w = d_H(primitive) + remainder.  Valid at
/// top horizontal degree for any w, and below top degree for d_H-cocycles.
/// The remainder is the canonical reduced form: flat horizontal dependence
/// is integrated away entirely; periodic horizontal coordinates retain
/// exactly their zero-frequency modes.
struct HorizontalReduction {
    BigradedForm primitive;
    BigradedForm remainder;
};

inline HorizontalReduction horizontal_reduce(const BigradedForm& w) {
    const auto& model = w.model();
    const unsigned s = w.horizontal_degree();
    if (s == 0) return {BigradedForm(model, w.contact_degree(), 0), w};
    if (s < model->p() && !d_H(w).is_zero())
        throw Error("horizontal reduction below top degree needs a d_H-cocycle");
    BigradedForm rem = w;
    BigradedForm prim(model, w.contact_degree(), s - 1);
    for (size_t i : model->horizontal()) {
        BigradedForm alpha = detail::contract_horizontal(rem, i);
        BigradedForm K(model, w.contact_degree(), s - 1);
        const bool periodic = model->chart()->coord(i).kind == CoordKind::Periodic;
        for (const auto& [key, c] : alpha.terms()) {
            ScalarExpr b = periodic ? c - c.zero_mode(i) : c;
            auto A = b.antiderivative(i);
            if (!A) throw Error("horizontal antiderivative unexpectedly missing");
            if (!A->is_zero()) K.add_term(key.first, key.second, *A);
        }
        prim = prim + K;
        rem = rem - d_H(K);
    }
    return {std::move(prim), std::move(rem)};
}

/// A class in Xi^r = Phi^{r,p} / d_H Phi^{r,p-1}, held by its canonical
/// reduced representative.
struct XiClass {
    ModelPtr model;
    unsigned degree = 0;
    BigradedForm rep;

    bool is_zero() const { return rep.is_zero(); }
    friend bool operator==(const XiClass& a, const XiClass& b) {
        return a.degree == b.degree && a.rep == b.rep;
    }
};

/// Quotient map q_r at top horizontal degree.
inline XiClass q_reduce(const BigradedForm& w) {
    if (w.horizontal_degree() != w.model()->p())
        throw Error("q_r applies at top horizontal degree only");
    auto red = horizontal_reduce(w);
    return {w.model(), w.contact_degree(), std::move(red.remainder)};
}

/// Primitive at top horizontal degree: exact() when the obstruction (the
/// canonical zero-mode remainder) vanishes.
struct PrimitiveResult {
    BigradedForm primitive;
    BigradedForm obstruction;
    bool exact() const { return obstruction.is_zero(); }
};

inline PrimitiveResult horizontal_primitive(const BigradedForm& w) {
    if (w.horizontal_degree() != w.model()->p())
        throw Error("horizontal_primitive applies at top horizontal degree");
    auto red = horizontal_reduce(w);
    return {std::move(red.primitive), std::move(red.remainder)};
}

/// Evaluation of the contact factor on vector fields: (w (x) mu)(xi_1..xi_r)
/// as a horizontal form.  Entries tangent to the leaves contribute zero
/// automatically.
inline BigradedForm contact_evaluate(const BigradedForm& w,
                                     const std::vector<VectorField>& fields) {
    const auto& model = w.model();
    const unsigned r = w.contact_degree();
    if (fields.size() != r) throw Error("contact evaluation needs one field per contact slot");
    BigradedForm out(model, 0, w.horizontal_degree());
    const auto& chart = model->chart();
    for (const auto& [key, c] : w.terms()) {
        symlin::SymMatrix m(r, std::vector<ScalarExpr>(r, ScalarExpr::zero(chart)));
        for (size_t a = 0; a < r; ++a)
            for (size_t b = 0; b < r; ++b) m[a][b] = fields[b].components()[key.first[a]];
        ScalarExpr det = symlin::determinant(m, chart);
        if (det.is_zero()) continue;
        out.add_term({}, key.second, c * det);
    }
    return out;
}

/// Vertical differential on Xi^r via the multilinear-form formula: evaluate
/// on tuples of action fields with Lie-derivative and bracket terms, reduce
/// each value to Xi^0, and reassemble the resulting cochain through the
/// Cartan coframe.
inline XiClass vertical_d(const XiClass& tau) {
    const auto& model = tau.model;
    const auto& A = model->action();
    const auto& chart = model->chart();
    const size_t qg = A.algebra.dimension();
    const unsigned r = tau.degree;
    const unsigned p = unsigned(model->p());

    BigradedForm zero_out(model, r + 1, p);
    if (r + 1 > qg) return {model, r + 1, zero_out};

    const CartanBasis B = cartan_basis(A);

    // enumerate increasing (r+1)-tuples of algebra indices
    std::vector<size_t> T(r + 1);
    for (size_t i = 0; i <= r; ++i) T[i] = i;
    DifferentialForm total(chart, r + 1 + p);
    while (true) {
        BigradedForm val(model, 0, p);
        // Lie-derivative terms
        for (size_t t = 0; t <= r; ++t) {
            std::vector<VectorField> rest;
            rest.reserve(r);
            for (size_t u = 0; u <= r; ++u)
                if (u != t) rest.push_back(A.fields[T[u]]);
            BigradedForm mu = contact_evaluate(tau.rep, rest);
            DifferentialForm lied = lie_derivative(A.fields[T[t]], mu.to_form());
            BigradedForm proj = bidegree_component(model, lied, 0, p);
            val = (t % 2) ? val - proj : val + proj;
        }
        // bracket terms
        for (size_t s = 0; s <= r; ++s) {
            for (size_t t = s + 1; t <= r; ++t) {
                std::vector<VectorField> args;
                args.reserve(r);
                args.push_back(lie_bracket(A.fields[T[s]], A.fields[T[t]]));
                for (size_t u = 0; u <= r; ++u)
                    if (u != s && u != t) args.push_back(A.fields[T[u]]);
                BigradedForm ev = contact_evaluate(tau.rep, args);
                val = ((s + t) % 2) ? val - ev : val + ev;
            }
        }
        XiClass val0 = q_reduce(val);
        if (!val0.is_zero()) {
            DifferentialForm wT = B.forms[T[0]];
            for (size_t u = 1; u <= r; ++u) wT = wedge(wT, B.forms[T[u]]);
            total = total + wedge(wT, val0.rep.to_form());
        }
        // next combination
        size_t pos = r + 1;
        while (pos > 0 && T[pos - 1] == qg - (r + 1) + (pos - 1)) --pos;
        if (pos == 0) break;
        ++T[pos - 1];
        for (size_t u = pos; u <= r; ++u) T[u] = T[u - 1] + 1;
    }
    return q_reduce(bidegree_component(model, total, r + 1, p));
}

/// Euler operator: Phi^{0,p} -> Xi^0 -> Xi^1.
inline XiClass euler(const BigradedForm& mu) {
    if (mu.contact_degree() != 0 || mu.horizontal_degree() != mu.model()->p())
        throw Error("the Euler operator applies to horizontal top-degree forms");
    return vertical_d(q_reduce(mu));
}

// ---------------------------------------------------------------------------
// Truncated bases of the canonical Xi representatives.

namespace detail {

inline std::vector<size_t> sorted_coords(std::vector<size_t> v) {
    std::sort(v.begin(), v.end());
    return v;
}

inline ScalarExpr monomial_to_scalar(const ChartPtr& chart, const TermKey& key) {
    ScalarExpr out = ScalarExpr::one(chart);
    for (size_t i = 0; i < chart->dimension(); ++i) {
        if (key.exp[i]) out = out * ScalarExpr::coordinate(chart, chart->coord(i).name).pow(key.exp[i]);
        const auto& tf = key.trig[i];
        if (tf.freq != 0 || tf.is_sin)
            out = out * ScalarExpr::trig(chart, chart->coord(i).name, tf.freq, tf.is_sin);
    }
    return out;
}

// all monomials over the given coordinates within (degree, freq) bounds;
// other coordinates stay at exponent 0 / zero frequency
inline std::vector<TermKey> enumerate_monomials(const ChartPtr& chart,
                                                const std::vector<size_t>& coords,
                                                const Truncation& t) {
    std::vector<TermKey> out;
    TermKey key{std::vector<unsigned>(chart->dimension(), 0),
                std::vector<TrigFactor>(chart->dimension())};
    std::function<void(size_t, unsigned)> rec = [&](size_t pos, unsigned used_deg) {
        if (pos == coords.size()) {
            out.push_back(key);
            return;
        }
        const size_t i = coords[pos];
        if (chart->coord(i).kind == CoordKind::Flat) {
            for (unsigned e = 0; used_deg + e <= t.degree; ++e) {
                key.exp[i] = e;
                rec(pos + 1, used_deg + e);
            }
            key.exp[i] = 0;
        } else {
            rec(pos + 1, used_deg);  // zero mode
            for (unsigned k = 1; k <= t.freq; ++k) {
                key.trig[i] = TrigFactor{k, false};
                rec(pos + 1, used_deg);
                key.trig[i] = TrigFactor{k, true};
                rec(pos + 1, used_deg);
            }
            key.trig[i] = TrigFactor{};
        }
    };
    rec(0, 0);
    return out;
}

inline void increasing_tuples(size_t n, size_t k,
                              const std::function<void(const IndexTuple&)>& fn) {
    IndexTuple T(k);
    std::function<void(size_t, size_t)> rec = [&](size_t pos, size_t start) {
        if (pos == k) {
            fn(T);
            return;
        }
        for (size_t i = start; i + (k - pos) <= n; ++i) {
            T[pos] = unsigned(i);
            rec(pos + 1, i + 1);
        }
    };
    rec(0, 0);
}

}  // namespace detail

/// Finite-dimensional model of the spaces Xi^r: canonical representatives
/// with vertical-coordinate monomials within the truncation.  Empty when
/// some horizontal coordinate is flat (every class then reduces to zero).
class TruncatedXi {
public:
    TruncatedXi(ModelPtr model, Truncation t) : model_(std::move(model)), trunc_(t) {
        bool flat_horizontal = false;
        for (size_t i : model_->horizontal())
            if (model_->chart()->coord(i).kind == CoordKind::Flat) flat_horizontal = true;
        std::vector<TermKey> monomials;
        if (!flat_horizontal)
            monomials = detail::enumerate_monomials(model_->chart(), model_->vertical(), trunc_);
        const size_t q = model_->q();
        const auto vert = detail::sorted_coords(model_->vertical());
        bases_.resize(q + 1);
        index_.resize(q + 1);
        for (unsigned r = 0; r <= q; ++r) {
            detail::increasing_tuples(q, r, [&](const IndexTuple& sel) {
                IndexTuple J;
                J.reserve(r);
                for (unsigned u : sel) J.push_back(unsigned(vert[u]));
                for (const auto& m : monomials) {
                    index_[r][{J, m}] = bases_[r].size();
                    bases_[r].push_back({J, m});
                }
            });
        }
    }

    const ModelPtr& model() const { return model_; }
    const Truncation& truncation() const { return trunc_; }
    size_t dim(unsigned r) const { return bases_.at(r).size(); }

    XiClass element(unsigned r, size_t idx) const {
        const auto& [J, key] = bases_.at(r).at(idx);
        BigradedForm rep(model_, r, unsigned(model_->p()));
        IndexTuple horiz;
        for (size_t i : detail::sorted_coords(model_->horizontal())) horiz.push_back(unsigned(i));
        rep.add_term(J, horiz, detail::monomial_to_scalar(model_->chart(), key));
        return {model_, r, std::move(rep)};
    }

    /// Coordinates of a canonical class in the degree-r basis.
    std::vector<Rational> expand(const XiClass& c) const {
        std::vector<Rational> out(dim(c.degree), 0);
        IndexTuple sorted_horiz;
        for (size_t i : detail::sorted_coords(model_->horizontal()))
            sorted_horiz.push_back(unsigned(i));
        for (const auto& [key, coeff] : c.rep.terms()) {
            if (key.second != sorted_horiz) throw Error("representative is not at top degree");
            for (unsigned e : coeff.denominator_exponents())
                if (e)
                    throw TruncationError(
                        "class has denominator content outside the truncated basis");
            for (const auto& [mon, rat] : coeff.numerator()) {
                auto it = index_.at(c.degree).find({key.first, mon});
                if (it == index_.at(c.degree).end())
                    throw TruncationError("differential left the truncated subspace");
                out[it->second] += rat;
            }
        }
        return out;
    }

    /// Matrix of the vertical differential Xi^r -> Xi^{r+1}.
    RationalMatrix vertical_matrix(unsigned r) const {
        const size_t cols = dim(r);
        const size_t rows = r + 1 <= model_->q() ? dim(r + 1) : 0;
        RationalMatrix m(rows, cols);
        for (size_t c = 0; c < cols; ++c) {
            XiClass img = vertical_d(element(r, c));
            if (rows == 0) {
                if (!img.is_zero()) throw TruncationError("differential left the truncated subspace");
                continue;
            }
            auto coords = expand(img);
            for (size_t rr = 0; rr < rows; ++rr)
                if (coords[rr] != 0) m.set(rr, c, coords[rr]);
        }
        return m;
    }

private:
    ModelPtr model_;
    Truncation trunc_;
    std::vector<std::vector<std::pair<IndexTuple, TermKey>>> bases_;
    std::vector<std::map<std::pair<IndexTuple, TermKey>, size_t>> index_;
};

// ---------------------------------------------------------------------------
// The invariant and equivariant complexes (finite truncated models).

struct ComplexReport {
    std::vector<size_t> space_dims;
    std::vector<size_t> cohomology;
};

/// Complex of invariant forms of the system: at position l, truncated
/// l-forms in the vertical differentials with leaf-constant coefficients,
/// under the plain exterior differential.  The polynomial budget steps
/// down by one per position so the differential stays inside the
/// truncation.
inline ComplexReport invariant_complex(const ModelPtr& model, const Truncation& t) {
    const auto& chart = model->chart();
    const size_t q = model->q();
    const auto vert = detail::sorted_coords(model->vertical());
    std::vector<std::vector<std::pair<IndexTuple, TermKey>>> bases(q + 1);
    std::vector<std::map<std::pair<IndexTuple, TermKey>, size_t>> index(q + 1);
    for (unsigned l = 0; l <= q; ++l) {
        if (t.degree + 1 < l + 1) continue;  // budget exhausted
        Truncation ladder{t.degree - l, t.freq};
        auto monomials = detail::enumerate_monomials(chart, vert, ladder);
        detail::increasing_tuples(q, l, [&](const IndexTuple& sel) {
            IndexTuple J;
            for (unsigned u : sel) J.push_back(unsigned(vert[u]));
            for (const auto& m : monomials) {
                index[l][{J, m}] = bases[l].size();
                bases[l].push_back({J, m});
            }
        });
    }
    // invariance sanity check on the degree <= 1 bases
    for (unsigned l = 0; l <= std::min<size_t>(q, 1); ++l)
        for (const auto& [J, m] : bases[l]) {
            DifferentialForm w(chart, l);
            IndexTuple J2 = J;
            w.add_term(std::move(J2), detail::monomial_to_scalar(chart, m));
            if (!is_invariant_form(w, model->system()))
                throw Error("constructed basis form is not invariant");
        }

    std::vector<RationalMatrix> diffs;
    for (unsigned l = 0; l <= q; ++l) {
        const size_t rows = l + 1 <= q ? bases[l + 1].size() : 0;
        RationalMatrix m(rows, bases[l].size());
        for (size_t c = 0; c < bases[l].size(); ++c) {
            const auto& [J, key] = bases[l][c];
            DifferentialForm w(chart, l);
            IndexTuple J2 = J;
            w.add_term(std::move(J2), detail::monomial_to_scalar(chart, key));
            DifferentialForm dw = exterior_d(w);
            for (const auto& [idx, coeff] : dw.terms()) {
                for (unsigned e : coeff.denominator_exponents())
                    if (e) throw TruncationError("invariant complex left the truncation");
                for (const auto& [mon, rat] : coeff.numerator()) {
                    auto it = index[l + 1].find({idx, mon});
                    if (it == index[l + 1].end())
                        throw TruncationError("invariant complex left the truncation");
                    m.add(it->second, c, rat);
                }
            }
        }
        diffs.push_back(std::move(m));
    }
    ComplexReport rep;
    for (unsigned l = 0; l <= q; ++l) {
        rep.space_dims.push_back(bases[l].size());
        const RationalMatrix in = l == 0 ? RationalMatrix(bases[0].size(), 0) : diffs[l - 1];
        rep.cohomology.push_back(cohomology_dim(in, diffs[l]));
    }
    return rep;
}

/// Complex of action-invariant horizontal forms (the equivariant complex):
/// at position l, the kernel of all Lie derivatives along the action
/// fields inside the truncated horizontal l-forms, under the exterior
/// differential.  Top position is the space of null Lagrangians.
inline ComplexReport equivariant_complex(const ModelPtr& model, const Truncation& t) {
    const auto& chart = model->chart();
    const auto& A = model->action();
    const size_t p = model->p();
    std::vector<size_t> all_coords;
    for (size_t i = 0; i < chart->dimension(); ++i) all_coords.push_back(i);

    struct Ambient {
        std::vector<std::pair<IndexTuple, TermKey>> basis;
        std::map<std::pair<IndexTuple, TermKey>, size_t> index;
    };
    std::vector<Ambient> amb(p + 1);
    for (unsigned l = 0; l <= p; ++l) {
        if (t.degree + 1 < l + 1) continue;
        Truncation ladder{t.degree - l, t.freq};
        auto monomials = detail::enumerate_monomials(chart, all_coords, ladder);
        const auto horiz = detail::sorted_coords(model->horizontal());
        detail::increasing_tuples(p, l, [&](const IndexTuple& sel) {
            IndexTuple I;
            for (unsigned u : sel) I.push_back(unsigned(horiz[u]));
            for (const auto& m : monomials) {
                amb[l].index[{I, m}] = amb[l].basis.size();
                amb[l].basis.push_back({I, m});
            }
        });
    }

    auto make_form = [&](unsigned l, size_t idx) {
        const auto& [I, key] = amb[l].basis[idx];
        DifferentialForm w(chart, l);
        IndexTuple I2 = I;
        w.add_term(std::move(I2), detail::monomial_to_scalar(chart, key));
        return w;
    };
    auto expand_horizontal = [&](unsigned l, const DifferentialForm& w,
                                 const char* what) {
        std::vector<Rational> out(amb[l].basis.size(), 0);
        for (const auto& [idx, coeff] : w.terms()) {
            for (unsigned i : idx)
                if (model->is_vertical(i)) throw Error(std::string(what) + ": form is not horizontal");
            for (unsigned e : coeff.denominator_exponents())
                if (e) throw TruncationError(std::string(what) + " left the truncation");
            for (const auto& [mon, rat] : coeff.numerator()) {
                auto it = amb[l].index.find({idx, mon});
                if (it == amb[l].index.end())
                    throw TruncationError(std::string(what) + " left the truncation");
                out[it->second] += rat;
            }
        }
        return out;
    };

    // invariant subspaces: kernels of the stacked Lie-derivative maps
    std::vector<std::vector<std::vector<Rational>>> inv(p + 1);
    for (unsigned l = 0; l <= p; ++l) {
        const size_t n = amb[l].basis.size();
        RationalMatrix theta(n * A.fields.size(), n);
        for (size_t c = 0; c < n; ++c) {
            auto w = make_form(l, c);
            for (size_t f = 0; f < A.fields.size(); ++f) {
                auto coords = expand_horizontal(l, lie_derivative(A.fields[f], w),
                                                "action derivative");
                for (size_t rr = 0; rr < n; ++rr)
                    if (coords[rr] != 0) theta.set(f * n + rr, c, coords[rr]);
            }
        }
        inv[l] = kernel_basis(theta);
    }

    // exterior differential in invariant coordinates, via the ambient spaces
    std::vector<RationalMatrix> amb_d;  // ambient l -> ambient l+1 applied to inv basis
    for (unsigned l = 0; l <= p; ++l) {
        const size_t rows = l + 1 <= p ? amb[l + 1].basis.size() : 0;
        RationalMatrix m(rows, inv[l].size());
        for (size_t c = 0; c < inv[l].size(); ++c) {
            DifferentialForm w(chart, l);
            bool started = false;
            for (size_t b = 0; b < inv[l][c].size(); ++b) {
                if (inv[l][c][b] == 0) continue;
                auto piece = ScalarExpr::constant(chart, inv[l][c][b]) * make_form(l, b);
                w = started ? w + piece : piece;
                started = true;
            }
            DifferentialForm dw = exterior_d(w);
            if (rows == 0) {
                if (!dw.is_zero()) throw TruncationError("equivariant complex left the truncation");
                continue;
            }
            auto coords = expand_horizontal(l + 1, dw, "equivariant differential");
            for (size_t rr = 0; rr < rows; ++rr)
                if (coords[rr] != 0) m.set(rr, c, coords[rr]);
        }
        amb_d.push_back(std::move(m));
    }

    // verify d(J^l) lies in the invariant subspace at l+1, then take ranks
    ComplexReport rep;
    for (unsigned l = 0; l <= p; ++l) {
        rep.space_dims.push_back(inv[l].size());
        if (l + 1 <= p) {
            RationalMatrix span(amb[l + 1].basis.size(), inv[l + 1].size() + 1);
            for (size_t c = 0; c < inv[l + 1].size(); ++c)
                for (size_t rr = 0; rr < inv[l + 1][c].size(); ++rr)
                    if (inv[l + 1][c][rr] != 0) span.set(rr, c, inv[l + 1][c][rr]);
            RationalMatrix base(amb[l + 1].basis.size(), inv[l + 1].size());
            for (size_t c = 0; c < inv[l + 1].size(); ++c)
                for (size_t rr = 0; rr < inv[l + 1][c].size(); ++rr)
                    if (inv[l + 1][c][rr] != 0) base.set(rr, c, inv[l + 1][c][rr]);
            const size_t base_rank = rank(base);
            for (size_t c = 0; c < inv[l].size(); ++c) {
                for (size_t rr = 0; rr < amb[l + 1].basis.size(); ++rr)
                    span.set(rr, inv[l + 1].size(), amb_d[l].get(rr, c));
                if (rank(span) != base_rank)
                    throw ComplexViolationError(
                        "differential does not preserve the invariant subspace");
            }
        }
        const size_t ker = inv[l].size() - rank(amb_d[l]);
        const size_t im = l == 0 ? 0 : rank(amb_d[l - 1]);
        if (im > ker) throw ComplexViolationError("image exceeds kernel in the equivariant complex");
        rep.cohomology.push_back(ker - im);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Relative invariance (cancellation of the mixed components of d-omega).

struct RelativeInvarianceVerdict {
    // conditions[s-1], s = 1..l : the type-(l+1-s, s) components of d-omega
    // cancel; conditions[l] : d_H of the purely horizontal component is zero.
    std::vector<bool> conditions;
    bool all_hold = false;
    bool d_invariant = false;  // cross-check on the assembled differential
};

inline RelativeInvarianceVerdict relative_invariance_check(const DifferentialForm& w,
                                                           const ModelPtr& model) {
    require_same_chart(w.chart(), model->chart());
    const unsigned l = w.degree();
    RelativeInvarianceVerdict v;
    std::vector<BigradedForm> comp;  // comp[s] = component of type (l-s, s)
    for (unsigned s = 0; s <= l; ++s) comp.push_back(bidegree_component(model, w, l - s, s));
    for (unsigned s = 1; s <= l; ++s) {
        // (-1)^{l-s+1} d_H w^{l-s+1,s-1} + d_V w^{l-s,s} = 0
        BigradedForm lhs = d_V_phi(comp[s]);
        BigradedForm dh = d_H(comp[s - 1]);
        lhs = ((l - s + 1) % 2) ? lhs - dh : lhs + dh;
        v.conditions.push_back(lhs.is_zero());
    }
    v.conditions.push_back(d_H(comp[l]).is_zero());
    v.all_hold = true;
    for (bool b : v.conditions)
        if (!b) v.all_hold = false;
    v.d_invariant = is_invariant_form(exterior_d(w), model->system());
    return v;
}

}  // namespace pfaffkit

#endif
