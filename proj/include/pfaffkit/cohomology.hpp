#ifndef PFAFFKIT_COHOMOLOGY_HPP
#define PFAFFKIT_COHOMOLOGY_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "variational.hpp"

namespace pfaffkit {

namespace detail {

inline RationalMatrix matmul(const RationalMatrix& a, const RationalMatrix& b) {
    if (a.cols() != b.rows()) throw Error("matrix product size mismatch");
    RationalMatrix out(a.rows(), b.cols());
    for (const auto& [rc_a, va] : a.entries())
        for (size_t c = 0; c < b.cols(); ++c) {
            const Rational vb = b.get(rc_a.second, c);
            if (vb != 0) out.add(rc_a.first, c, va * vb);
        }
    return out;
}

inline std::vector<IndexTuple> algebra_subsets(size_t q, size_t k) {
    std::vector<IndexTuple> out;
    increasing_tuples(q, k, [&](const IndexTuple& t) { out.push_back(t); });
    return out;
}

// sort a tuple of algebra indices, tracking the sign; nullopt on duplicates
inline std::optional<std::pair<IndexTuple, int>> signed_sort(IndexTuple t) {
    int sign = sort_tuple(t);
    if (sign == 0) return std::nullopt;
    return std::make_pair(std::move(t), sign);
}

}  // namespace detail

/// A finite-dimensional module over a Lie algebra: one rational matrix per
/// basis element, satisfying rho([e_i,e_j]) = rho(e_i)rho(e_j) -
/// rho(e_j)rho(e_i) exactly.
struct CEModule {
    LieAlgebraSpec algebra;
    size_t dim;
    std::vector<RationalMatrix> rho;

    CEModule(LieAlgebraSpec alg, size_t d, std::vector<RationalMatrix> matrices)
        : algebra(std::move(alg)), dim(d), rho(std::move(matrices)) {
        const size_t q = algebra.dimension();
        if (rho.size() != q) throw Error("module needs one matrix per algebra basis element");
        for (const auto& m : rho)
            if (m.rows() != dim || m.cols() != dim) throw Error("module matrix has wrong shape");
        for (size_t i = 0; i < q; ++i)
            for (size_t j = i + 1; j < q; ++j) {
                RationalMatrix lhs(dim, dim);
                for (size_t k = 0; k < q; ++k) {
                    const auto& c = algebra.c(i, j, k);
                    if (c == 0) continue;
                    for (const auto& [rc, v] : rho[k].entries())
                        lhs.add(rc.first, rc.second, c * v);
                }
                auto comm = detail::matmul(rho[i], rho[j]);
                const auto ji = detail::matmul(rho[j], rho[i]);
                for (const auto& [rc, v] : ji.entries()) comm.add(rc.first, rc.second, -v);
                for (size_t r = 0; r < dim; ++r)
                    for (size_t c = 0; c < dim; ++c)
                        if (lhs.get(r, c) != comm.get(r, c))
                            throw Error("matrices do not represent the algebra");
            }
    }

    static CEModule trivial(LieAlgebraSpec alg, size_t d = 1) {
        std::vector<RationalMatrix> zero(alg.dimension(), RationalMatrix(d, d));
        return CEModule(std::move(alg), d, std::move(zero));
    }
};

/// Chevalley-Eilenberg differential on the k-cochains with values in the
/// module; basis element (S, m) is the dual wedge of the subset S tensored
/// with the m-th module basis vector, ordered subset-major.
inline RationalMatrix ce_differential(const CEModule& M, unsigned k) {
    const size_t q = M.algebra.dimension();
    const auto Sk = detail::algebra_subsets(q, k);
    const auto Sk1 = detail::algebra_subsets(q, k + 1);
    std::map<IndexTuple, size_t> src_index, dst_index;
    for (size_t i = 0; i < Sk.size(); ++i) src_index[Sk[i]] = i;
    for (size_t i = 0; i < Sk1.size(); ++i) dst_index[Sk1[i]] = i;

    RationalMatrix out(Sk1.size() * M.dim, Sk.size() * M.dim);
    // action terms: (-1)^t rho(e_{T_t}) applied to the cochain at T minus T_t
    for (size_t sc = 0; sc < Sk.size(); ++sc) {
        const auto& S = Sk[sc];
        for (unsigned i = 0; i < q; ++i) {
            size_t pos = 0;
            bool dup = false;
            for (unsigned e : S) {
                if (e == i) dup = true;
                if (e < i) ++pos;
            }
            if (dup) continue;
            IndexTuple T = S;
            T.insert(T.begin() + long(pos), i);
            const size_t tr = dst_index.at(T);
            const int sign = (pos % 2) ? -1 : 1;
            for (const auto& [rc, v] : M.rho[i].entries())
                out.add(tr * M.dim + rc.first, sc * M.dim + rc.second, sign * v);
        }
    }
    // bracket terms: (-1)^{s+t} cochain at ([e_s,e_t], rest)
    for (size_t tr = 0; tr < Sk1.size(); ++tr) {
        const auto& T = Sk1[tr];
        for (size_t s = 0; s < T.size(); ++s)
            for (size_t t = s + 1; t < T.size(); ++t) {
                IndexTuple rest;
                for (size_t u = 0; u < T.size(); ++u)
                    if (u != s && u != t) rest.push_back(T[u]);
                for (size_t kk = 0; kk < q; ++kk) {
                    const auto& c = M.algebra.c(T[s], T[t], kk);
                    if (c == 0) continue;
                    IndexTuple merged = rest;
                    merged.push_back(unsigned(kk));
                    auto sorted = detail::signed_sort(std::move(merged));
                    if (!sorted) continue;
                    // sign of moving e_kk from the front to its appended slot
                    const int front = (rest.size() % 2) ? -1 : 1;
                    const Rational coeff = (((s + t) % 2) ? -c : c) * sorted->second * front;
                    const size_t sc = src_index.at(sorted->first);
                    for (size_t m = 0; m < M.dim; ++m)
                        out.add(tr * M.dim + m, sc * M.dim + m, coeff);
                }
            }
    }
    return out;
}

/// Cohomology dimensions of (Lambda g* (x) V, ce_differential) in degrees
/// 0..dim g.
inline std::vector<size_t> ce_cohomology(const CEModule& M) {
    const size_t q = M.algebra.dimension();
    std::vector<RationalMatrix> d;
    for (unsigned k = 0; k <= q; ++k) d.push_back(ce_differential(M, k));
    std::vector<size_t> dims;
    for (unsigned k = 0; k <= q; ++k) {
        const RationalMatrix in = k == 0 ? RationalMatrix(d[0].cols(), 0) : d[k - 1];
        dims.push_back(cohomology_dim(in, d[k]));
    }
    return dims;
}

struct CohomologyReport {
    std::string label;
    Truncation truncation;
    std::vector<size_t> dims;  // positive degrees 1, 2, ...
};

/// Cohomology of the reduced vertical complex Xi^0 -> Xi^1 -> ... in
/// positive degrees, over the truncated canonical bases.
inline CohomologyReport vertical_cohomology(const ModelPtr& model, const Truncation& t) {
    CohomologyReport rep{"vertical", t, {}};
    if (model->q() == 0) return rep;
    (void)model->action();  // required for the vertical differential
    TruncatedXi X(model, t);
    std::vector<RationalMatrix> d;
    for (unsigned r = 0; r <= model->q(); ++r) d.push_back(X.vertical_matrix(r));
    for (unsigned k = 1; k <= model->q(); ++k) rep.dims.push_back(cohomology_dim(d[k - 1], d[k]));
    return rep;
}

/// Xi^0 as a module over the acting algebra: rho(e_i) is the matrix of
/// mu -> q_0(theta(Phi(e_i)) mu) on the truncated canonical basis.
inline CEModule xi0_module(const ModelPtr& model, const Truncation& t) {
    const auto& A = model->action();
    TruncatedXi X(model, t);
    const size_t n = X.dim(0);
    std::vector<RationalMatrix> rho;
    for (const auto& f : A.fields) {
        RationalMatrix m(n, n);
        for (size_t b = 0; b < n; ++b) {
            auto mu = X.element(0, b);
            auto lied = lie_derivative(f, mu.rep.to_form());
            auto proj = bidegree_component(model, lied, 0, unsigned(model->p()));
            auto coords = X.expand(q_reduce(proj));
            for (size_t r = 0; r < n; ++r)
                if (coords[r] != 0) m.set(r, b, coords[r]);
        }
        rho.push_back(std::move(m));
    }
    return CEModule(A.algebra, n, std::move(rho));
}

/// Side-by-side comparison of the vertical variational cohomology with the
/// Lie algebra cohomology of the acting algebra valued in Xi^0, in positive
/// degrees.
struct Theorem1Report {
    Truncation truncation;
    std::vector<size_t> vertical_dims;
    std::vector<size_t> ce_dims;
    bool equal = false;
};

inline Theorem1Report theorem1_compare(const ModelPtr& model, const Truncation& t) {
    Theorem1Report rep{t, {}, {}, false};
    rep.vertical_dims = vertical_cohomology(model, t).dims;
    auto ce = ce_cohomology(xi0_module(model, t));
    rep.ce_dims.assign(ce.begin() + 1, ce.end());
    rep.equal = rep.vertical_dims == rep.ce_dims;
    return rep;
}

// ---------------------------------------------------------------------------
// The twisted differential on Lambda g* (x) Xi^0, assembled term by term.

/// Homogeneous element of Lambda g* (x) Xi^0: dual wedge subsets of algebra
/// indices with degree-0 class values.
using TwistedElement = std::map<IndexTuple, XiClass>;

namespace detail {

inline void twisted_add(TwistedElement& out, const IndexTuple& key, XiClass val) {
    if (val.is_zero()) return;
    auto it = out.find(key);
    if (it == out.end()) {
        out.emplace(key, std::move(val));
    } else {
        it->second.rep = it->second.rep + val.rep;
        if (it->second.is_zero()) out.erase(it);
    }
}

inline XiClass scaled(const XiClass& c, int sign) {
    if (sign >= 0) return c;
    return {c.model, c.degree, -c.rep};
}

}  // namespace detail

/// The operator omega (x) q_0(mu) -> d omega (x) q_0(mu) +
/// (-1)^{deg omega} omega wedge d_V(q_0 mu), with d omega expanded from the
/// structure constants and d_V(q_0 mu) read off against the dual basis as
/// e^i -> q_0(theta(Phi(e_i)) mu).
inline TwistedElement twisted_d(const TwistedElement& c, const ModelPtr& model) {
    const auto& A = model->action();
    const size_t q = A.algebra.dimension();
    TwistedElement out;
    for (const auto& [S, mu] : c) {
        // d omega term
        for (size_t t = 0; t < S.size(); ++t) {
            const unsigned i = S[t];
            for (size_t j = 0; j < q; ++j)
                for (size_t k = j + 1; k < q; ++k) {
                    const Rational gamma = -A.algebra.c(j, k, i);
                    if (gamma == 0) continue;
                    IndexTuple key;
                    key.push_back(unsigned(j));
                    key.push_back(unsigned(k));
                    for (size_t u = 0; u < S.size(); ++u)
                        if (u != t) key.push_back(S[u]);
                    auto sorted = detail::signed_sort(std::move(key));
                    if (!sorted) continue;
                    const Rational factor =
                        gamma * sorted->second * ((t % 2) ? -1 : 1);
                    XiClass term{mu.model, mu.degree,
                                 ScalarExpr::constant(model->chart(), factor) * mu.rep};
                    detail::twisted_add(out, sorted->first, std::move(term));
                }
        }
        // omega wedge d_V term: e^i arrives at the trailing wedge slot, so
        // the overall sign is (-1)^{deg omega} times the sort sign
        for (unsigned i = 0; i < q; ++i) {
            bool dup = false;
            for (unsigned e : S)
                if (e == i) dup = true;
            if (dup) continue;
            IndexTuple key = S;
            key.push_back(i);
            auto sorted = detail::signed_sort(std::move(key));
            const int sign = ((S.size() % 2) ? -1 : 1) * sorted->second;
            auto lied = lie_derivative(A.fields[i], mu.rep.to_form());
            auto val = q_reduce(bidegree_component(model, lied, 0, unsigned(model->p())));
            detail::twisted_add(out, sorted->first, detail::scaled(val, sign));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Obstruction scanning: one-sided exclusion of candidate symmetry algebras.

struct ObstructionCandidate {
    std::string label;
    CEModule module;
};

struct ObstructionVerdict {
    std::string label;
    bool excluded = false;
    std::vector<size_t> ce_dims;  // positive degrees
};

/// Compare each candidate's Lie algebra cohomology with the variational
/// dimensions; a mismatch at any degree excludes the candidate as the
/// algebra of a transversally free action.  Agreement never certifies
/// existence.
inline std::vector<ObstructionVerdict> obstruction_scan(
    const CohomologyReport& variational, const std::vector<ObstructionCandidate>& candidates) {
    std::vector<ObstructionVerdict> out;
    for (const auto& cand : candidates) {
        ObstructionVerdict v{cand.label, false, {}};
        auto ce = ce_cohomology(cand.module);
        v.ce_dims.assign(ce.begin() + 1, ce.end());
        const size_t n = std::max(v.ce_dims.size(), variational.dims.size());
        for (size_t k = 0; k < n; ++k) {
            const size_t a = k < variational.dims.size() ? variational.dims[k] : 0;
            const size_t b = k < v.ce_dims.size() ? v.ce_dims[k] : 0;
            if (a != b) v.excluded = true;
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace pfaffkit

#endif
