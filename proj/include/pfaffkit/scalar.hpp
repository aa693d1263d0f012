#ifndef PFAFFKIT_SCALAR_HPP
#define PFAFFKIT_SCALAR_HPP

#include <algorithm>
#include <cmath>
#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace pfaffkit {

enum class CoordKind { Flat, Periodic };

struct Coord {
    std::string name;
    CoordKind kind = CoordKind::Flat;
};

/// One Fourier factor cos(k*theta) / sin(k*theta) attached to a periodic
/// coordinate.  freq == 0 with is_sin == false is the unit (cos 0 = 1);
/// sin(0*theta) is never stored.
struct TrigFactor {
    unsigned freq = 0;
    bool is_sin = false;
    auto operator<=>(const TrigFactor&) const = default;
};

/// Key of one normal-form term: per-coordinate flat exponent and
/// per-coordinate Fourier factor.  Flat coordinates carry the unit trig
/// factor, periodic coordinates carry flat exponent 0.
struct TermKey {
    std::vector<unsigned> exp;
    std::vector<TrigFactor> trig;
    auto operator<=>(const TermKey&) const = default;
};

using PolyTrig = std::map<TermKey, Rational>;

namespace detail {

inline void polytrig_accumulate(PolyTrig& dst, const TermKey& k, const Rational& c) {
    if (c == 0) return;
    auto it = dst.find(k);
    if (it == dst.end()) {
        dst.emplace(k, c);
    } else {
        it->second += c;
        if (it->second == 0) dst.erase(it);
    }
}

/// Product-to-sum rewriting of two Fourier factors on the same coordinate.
inline void trig_combine(const TrigFactor& a, const TrigFactor& b,
                         std::vector<std::pair<Rational, TrigFactor>>& out) {
    out.clear();
    if (a.freq == 0) { out.emplace_back(1, b); return; }
    if (b.freq == 0) { out.emplace_back(1, a); return; }
    const Rational half(1, 2);
    const unsigned sum = a.freq + b.freq;
    const unsigned dif = a.freq > b.freq ? a.freq - b.freq : b.freq - a.freq;
    const int difsign = a.freq > b.freq ? 1 : (a.freq < b.freq ? -1 : 0);
    if (!a.is_sin && !b.is_sin) {            // cos cos
        out.emplace_back(half, TrigFactor{sum, false});
        out.emplace_back(half, TrigFactor{dif, false});
    } else if (a.is_sin && b.is_sin) {       // sin sin
        out.emplace_back(half, TrigFactor{dif, false});
        out.emplace_back(-half, TrigFactor{sum, false});
    } else if (a.is_sin && !b.is_sin) {      // sin a cos b = (sin(a+b)+sin(a-b))/2
        out.emplace_back(half, TrigFactor{sum, true});
        if (dif != 0) out.emplace_back(difsign > 0 ? half : -half, TrigFactor{dif, true});
    } else {                                 // cos a sin b = (sin(a+b)-sin(a-b))/2
        out.emplace_back(half, TrigFactor{sum, true});
        if (dif != 0) out.emplace_back(difsign > 0 ? -half : half, TrigFactor{dif, true});
    }
}

inline PolyTrig polytrig_mul(const PolyTrig& lhs, const PolyTrig& rhs) {
    PolyTrig out;
    if (lhs.empty() || rhs.empty()) return out;
    const size_t n = lhs.begin()->first.exp.size();
    std::vector<std::pair<Rational, TrigFactor>> combo;
    for (const auto& [ka, ca] : lhs) {
        for (const auto& [kb, cb] : rhs) {
            // Expand the per-coordinate trig products one coordinate at a time.
            std::vector<std::pair<Rational, std::vector<TrigFactor>>> partial;
            partial.emplace_back(ca * cb, std::vector<TrigFactor>{});
            bool dead = false;
            for (size_t i = 0; i < n && !dead; ++i) {
                trig_combine(ka.trig[i], kb.trig[i], combo);
                std::vector<std::pair<Rational, std::vector<TrigFactor>>> next;
                for (const auto& [c0, prefix] : partial) {
                    for (const auto& [cm, tf] : combo) {
                        auto pre = prefix;
                        pre.push_back(tf);
                        next.emplace_back(c0 * cm, std::move(pre));
                    }
                }
                partial = std::move(next);
                dead = partial.empty();
            }
            if (dead) continue;
            TermKey key;
            key.exp.resize(n);
            for (size_t i = 0; i < n; ++i) key.exp[i] = ka.exp[i] + kb.exp[i];
            for (auto& [c, trig] : partial) {
                key.trig = trig;
                polytrig_accumulate(out, key, c);
            }
        }
    }
    return out;
}

inline void polytrig_add_scaled(PolyTrig& dst, const PolyTrig& src, const Rational& scale) {
    for (const auto& [k, c] : src) polytrig_accumulate(dst, k, c * scale);
}

/// Exact division of a PolyTrig by a pure flat polynomial divisor.
/// Multivariate fail-fast division: returns nullopt unless the division
/// is exact in the ring.
inline std::optional<PolyTrig> polytrig_divide_exact(const PolyTrig& num, const PolyTrig& div) {
    if (div.empty()) throw Error("division by zero polynomial");
    if (num.empty()) return PolyTrig{};
    // Leading term of the divisor (largest key; divisor has unit trig parts).
    const auto lt_div = std::prev(div.end());
    PolyTrig r = num;
    PolyTrig q;
    while (!r.empty()) {
        const auto lt_r = std::prev(r.end());
        const TermKey& kr = lt_r->first;
        const TermKey& kd = lt_div->first;
        TermKey kq;
        kq.exp.resize(kr.exp.size());
        kq.trig = kr.trig;
        bool ok = true;
        for (size_t i = 0; i < kr.exp.size(); ++i) {
            if (kr.exp[i] < kd.exp[i]) { ok = false; break; }
            kq.exp[i] = kr.exp[i] - kd.exp[i];
        }
        if (!ok) return std::nullopt;
        const Rational cq = lt_r->second / lt_div->second;
        polytrig_accumulate(q, kq, cq);
        PolyTrig t;
        t.emplace(kq, cq);
        polytrig_add_scaled(r, polytrig_mul(t, div), Rational(-1));
    }
    return q;
}

inline PolyTrig polytrig_pow(const PolyTrig& base, unsigned e, size_t n) {
    PolyTrig out;
    out.emplace(TermKey{std::vector<unsigned>(n, 0), std::vector<TrigFactor>(n)}, Rational(1));
    for (unsigned i = 0; i < e; ++i) out = polytrig_mul(out, base);
    return out;
}

}  // namespace detail

/// A chart model: named coordinates, each flat (real line) or periodic
/// (circle), plus a finite list of declared-invertible denominators.
/// Denominators are pure polynomials in the flat coordinates, assumed
/// irreducible over Q and pairwise distinct; canonical normal forms of
/// localized elements rely on this.
class Chart : public std::enable_shared_from_this<Chart> {
public:
    static std::shared_ptr<const Chart> make(std::string name, std::vector<Coord> coords) {
        if (coords.empty()) throw Error("chart needs at least one coordinate");
        for (size_t i = 0; i < coords.size(); ++i)
            for (size_t j = i + 1; j < coords.size(); ++j)
                if (coords[i].name == coords[j].name)
                    throw Error("duplicate coordinate name: " + coords[i].name);
        return std::shared_ptr<const Chart>(new Chart(std::move(name), std::move(coords), {}));
    }

    /// New chart with the given denominators declared invertible.
    std::shared_ptr<const Chart> localized(std::vector<PolyTrig> denominators) const {
        for (const auto& d : denominators) {
            if (d.empty()) throw Error("declared denominator is zero");
            for (const auto& [k, c] : d)
                for (const auto& tf : k.trig)
                    if (tf.freq != 0) throw Error("denominators must be trig-free polynomials");
        }
        return std::shared_ptr<const Chart>(new Chart(name_, coords_, std::move(denominators)));
    }

    const std::string& name() const { return name_; }
    size_t dimension() const { return coords_.size(); }
    const std::vector<Coord>& coords() const { return coords_; }
    const Coord& coord(size_t i) const { return coords_.at(i); }
    const std::vector<PolyTrig>& denominators() const { return denominators_; }

    size_t coord_index(const std::string& name) const {
        for (size_t i = 0; i < coords_.size(); ++i)
            if (coords_[i].name == name) return i;
        throw UnknownCoordinateError(name);
    }
    bool has_coord(const std::string& name) const {
        for (const auto& c : coords_)
            if (c.name == name) return true;
        return false;
    }

private:
    Chart(std::string name, std::vector<Coord> coords, std::vector<PolyTrig> dens)
        : name_(std::move(name)), coords_(std::move(coords)), denominators_(std::move(dens)) {}

    std::string name_;
    std::vector<Coord> coords_;
    std::vector<PolyTrig> denominators_;
};

using ChartPtr = std::shared_ptr<const Chart>;

inline void require_same_chart(const ChartPtr& a, const ChartPtr& b) {
    if (a != b) throw ChartMismatchError();
}

/// Exact coefficient function in canonical normal form:
///   (sum of rational * flat monomial * Fourier factors) / (product of
///   declared denominators).
/// The fraction is kept reduced (no declared denominator divides the
/// numerator while its exponent is positive), which makes the normal form
/// unique and the zero test trivial.  Values are immutable.
class ScalarExpr {
public:
    ScalarExpr() = default;

    static ScalarExpr zero(const ChartPtr& chart) { return ScalarExpr(chart); }

    static ScalarExpr constant(const ChartPtr& chart, Rational c) {
        ScalarExpr s(chart);
        if (c != 0) s.num_.emplace(unit_key(chart), std::move(c));
        return s;
    }
    static ScalarExpr one(const ChartPtr& chart) { return constant(chart, 1); }

    static ScalarExpr coordinate(const ChartPtr& chart, const std::string& name) {
        const size_t i = chart->coord_index(name);
        if (chart->coord(i).kind != CoordKind::Flat)
            throw Error("periodic coordinate '" + name +
                        "' enters only through sin/cos");
        ScalarExpr s(chart);
        TermKey k = unit_key(chart);
        k.exp[i] = 1;
        s.num_.emplace(std::move(k), Rational(1));
        return s;
    }

    static ScalarExpr trig(const ChartPtr& chart, const std::string& name, unsigned freq,
                           bool is_sin) {
        const size_t i = chart->coord_index(name);
        if (chart->coord(i).kind != CoordKind::Periodic)
            throw Error("sin/cos applied to a flat coordinate: " + name);
        ScalarExpr s(chart);
        if (freq == 0) {
            if (is_sin) return s;  // sin 0 = 0
            return one(chart);
        }
        TermKey k = unit_key(chart);
        k.trig[i] = TrigFactor{freq, is_sin};
        s.num_.emplace(std::move(k), Rational(1));
        return s;
    }

    static ScalarExpr denominator_inverse(const ChartPtr& chart, size_t j, unsigned power = 1) {
        if (j >= chart->denominators().size()) throw Error("no such declared denominator");
        ScalarExpr s = one(chart);
        s.den_[j] = power;
        return s;
    }

    const ChartPtr& chart() const { return chart_; }
    const PolyTrig& numerator() const { return num_; }
    const std::vector<unsigned>& denominator_exponents() const { return den_; }

    bool is_zero() const { return num_.empty(); }

    bool is_rational_constant() const {
        if (num_.empty()) return true;
        if (num_.size() != 1) return false;
        return num_.begin()->first == unit_key(chart_) &&
               std::all_of(den_.begin(), den_.end(), [](unsigned e) { return e == 0; });
    }
    Rational rational_value() const {
        if (num_.empty()) return 0;
        if (!is_rational_constant()) throw Error("not a rational constant");
        return num_.begin()->second;
    }

    friend ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
        require_same_chart(a.chart_, b.chart_);
        ScalarExpr out(a.chart_);
        out.den_.resize(a.den_.size());
        for (size_t j = 0; j < out.den_.size(); ++j) out.den_[j] = std::max(a.den_[j], b.den_[j]);
        out.num_ = a.scaled_numerator(out.den_);
        detail::polytrig_add_scaled(out.num_, b.scaled_numerator(out.den_), Rational(1));
        out.reduce();
        return out;
    }
    friend ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) { return a + (-b); }
    ScalarExpr operator-() const {
        ScalarExpr out = *this;
        for (auto& [k, c] : out.num_) c = -c;
        return out;
    }

    friend ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
        require_same_chart(a.chart_, b.chart_);
        ScalarExpr out(a.chart_);
        out.num_ = detail::polytrig_mul(a.num_, b.num_);
        for (size_t j = 0; j < out.den_.size(); ++j) out.den_[j] = a.den_[j] + b.den_[j];
        out.reduce();
        return out;
    }
    friend ScalarExpr operator*(const Rational& c, const ScalarExpr& a) {
        ScalarExpr out = a;
        if (c == 0) return zero(a.chart_);
        for (auto& [k, v] : out.num_) v *= c;
        return out;
    }
    friend ScalarExpr operator*(const ScalarExpr& a, const Rational& c) { return c * a; }

    ScalarExpr pow(unsigned e) const {
        ScalarExpr out = one(chart_);
        for (unsigned i = 0; i < e; ++i) out = out * *this;
        return out;
    }

    /// Inverse when *this is a unit of the localized ring: a nonzero
    /// rational multiple of a product of declared denominators.
    std::optional<ScalarExpr> try_inverse() const {
        if (num_.empty()) return std::nullopt;
        PolyTrig n = num_;
        std::vector<unsigned> stripped(den_.size(), 0);
        const auto& dens = chart_->denominators();
        for (size_t j = 0; j < dens.size(); ++j) {
            while (true) {
                auto q = detail::polytrig_divide_exact(n, dens[j]);
                if (!q) break;
                n = std::move(*q);
                ++stripped[j];
            }
        }
        if (n.size() != 1 || n.begin()->first != unit_key(chart_)) return std::nullopt;
        const Rational c = n.begin()->second;
        ScalarExpr out(chart_);
        out.num_.emplace(unit_key(chart_), Rational(1) / c);
        for (size_t j = 0; j < den_.size(); ++j) {
            // numerator gains d_j^{den_[j]}, denominator gains d_j^{stripped[j]}
            out.num_ = detail::polytrig_mul(
                out.num_, detail::polytrig_pow(dens[j], den_[j], chart_->dimension()));
            out.den_[j] = stripped[j];
        }
        out.reduce();
        return out;
    }

    friend ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
        require_same_chart(a.chart_, b.chart_);
        auto inv = b.try_inverse();
        if (!inv) throw NotInvertibleError(b.str());
        return a * *inv;
    }

    ScalarExpr partial(size_t i) const {
        if (i >= chart_->dimension()) throw Error("coordinate index out of range");
        const auto& dens = chart_->denominators();
        // d(N / prod d^e) = dN / prod d^e - sum_j e_j dd_j N / (d_j prod d^e)
        ScalarExpr out(chart_);
        {
            ScalarExpr t(chart_);
            t.num_ = partial_polytrig(num_, i);
            t.den_ = den_;
            t.reduce();
            out = t;
        }
        for (size_t j = 0; j < den_.size(); ++j) {
            if (den_[j] == 0) continue;
            PolyTrig dd = partial_polytrig(dens[j], i);
            if (dd.empty()) continue;
            ScalarExpr t(chart_);
            t.num_ = detail::polytrig_mul(dd, num_);
            t.den_ = den_;
            t.den_[j] += 1;
            for (auto& [k, c] : t.num_) c *= -Rational(den_[j]);
            t.reduce();
            out = out + t;
        }
        return out;
    }
    ScalarExpr partial(const std::string& coord) const {
        return partial(chart_->coord_index(coord));
    }

    /// Antiderivative along coordinate i, when it exists in the ring.
    /// Flat coordinate: exists iff no declared denominator involves i.
    /// Periodic coordinate: exists iff the zero-frequency mode in i is
    /// absent.  Returns nullopt on obstruction.
    std::optional<ScalarExpr> antiderivative(size_t i) const {
        const auto& dens = chart_->denominators();
        for (size_t j = 0; j < den_.size(); ++j)
            if (den_[j] > 0 && !partial_polytrig(dens[j], i).empty()) return std::nullopt;
        ScalarExpr out(chart_);
        out.den_ = den_;
        if (chart_->coord(i).kind == CoordKind::Flat) {
            for (const auto& [k, c] : num_) {
                TermKey nk = k;
                nk.exp[i] += 1;
                detail::polytrig_accumulate(out.num_, nk, c / Rational(nk.exp[i]));
            }
        } else {
            for (const auto& [k, c] : num_) {
                const TrigFactor tf = k.trig[i];
                if (tf.freq == 0) return std::nullopt;  // zero mode obstructs
                TermKey nk = k;
                nk.trig[i].is_sin = !tf.is_sin;
                const Rational scale =
                    tf.is_sin ? -Rational(1, tf.freq) : Rational(1, tf.freq);
                detail::polytrig_accumulate(out.num_, nk, c * scale);
            }
        }
        out.reduce();
        return out;
    }

    bool depends_on(size_t i) const {
        const auto& dens = chart_->denominators();
        for (size_t j = 0; j < den_.size(); ++j)
            if (den_[j] > 0 && !partial_polytrig(dens[j], i).empty()) return true;
        for (const auto& [k, c] : num_)
            if (k.exp[i] != 0 || k.trig[i].freq != 0) return true;
        return false;
    }

    /// Part of this expression constant in coordinate i (flat exponent 0
    /// and trig frequency 0 in i).  Requires denominators free of i.
    ScalarExpr zero_mode(size_t i) const {
        const auto& dens = chart_->denominators();
        for (size_t j = 0; j < den_.size(); ++j)
            if (den_[j] > 0 && !partial_polytrig(dens[j], i).empty())
                throw Error("zero-mode extraction across a denominator in " +
                            chart_->coord(i).name);
        ScalarExpr out(chart_);
        out.den_ = den_;
        for (const auto& [k, c] : num_)
            if (k.exp[i] == 0 && k.trig[i].freq == 0) out.num_.emplace(k, c);
        out.reduce();
        return out;
    }

    double eval(const std::vector<double>& point) const {
        double v = eval_polytrig(num_, point);
        const auto& dens = chart_->denominators();
        for (size_t j = 0; j < den_.size(); ++j)
            if (den_[j] > 0) v /= std::pow(eval_polytrig(dens[j], point), double(den_[j]));
        return v;
    }

    friend bool operator==(const ScalarExpr& a, const ScalarExpr& b) {
        require_same_chart(a.chart_, b.chart_);
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

    /// DSL-replayable rendering.
    std::string str() const {
        if (num_.empty()) return "0";
        std::ostringstream os;
        const bool has_den =
            std::any_of(den_.begin(), den_.end(), [](unsigned e) { return e != 0; });
        if (has_den) os << "(";
        bool first = true;
        for (const auto& [k, c] : num_) {
            Rational coef = c;
            if (!first) {
                os << (coef < 0 ? " - " : " + ");
                if (coef < 0) coef = -coef;
            } else if (coef < 0) {
                os << "-";
                coef = -coef;
            }
            first = false;
            std::vector<std::string> factors;
            for (size_t i = 0; i < k.exp.size(); ++i) {
                if (k.exp[i] > 0) {
                    std::string f = chart_->coord(i).name;
                    if (k.exp[i] > 1) f += "^" + std::to_string(k.exp[i]);
                    factors.push_back(f);
                }
                if (k.trig[i].freq > 0) {
                    std::string f = k.trig[i].is_sin ? "sin(" : "cos(";
                    if (k.trig[i].freq > 1) f += std::to_string(k.trig[i].freq) + "*";
                    f += chart_->coord(i).name + ")";
                    factors.push_back(f);
                }
            }
            if (coef != 1 || factors.empty()) {
                std::ostringstream cs;
                cs << boost::multiprecision::numerator(coef);
                if (boost::multiprecision::denominator(coef) != 1)
                    cs << "/" << boost::multiprecision::denominator(coef);
                factors.insert(factors.begin(), cs.str());
            }
            for (size_t i = 0; i < factors.size(); ++i) {
                if (i) os << "*";
                os << factors[i];
            }
        }
        if (has_den) {
            os << ")/(";
            bool firstd = true;
            for (size_t j = 0; j < den_.size(); ++j) {
                if (den_[j] == 0) continue;
                if (!firstd) os << "*";
                firstd = false;
                ScalarExpr d(chart_);
                d.num_ = chart_->denominators()[j];
                os << "(" << d.str() << ")";
                if (den_[j] > 1) os << "^" << den_[j];
            }
            os << ")";
        }
        return os.str();
    }

private:
    explicit ScalarExpr(const ChartPtr& chart) : chart_(chart) {
        den_.assign(chart->denominators().size(), 0);
    }

    static TermKey unit_key(const ChartPtr& chart) {
        return TermKey{std::vector<unsigned>(chart->dimension(), 0),
                       std::vector<TrigFactor>(chart->dimension())};
    }

    /// Numerator over the common denominator with exponents target >= den_.
    PolyTrig scaled_numerator(const std::vector<unsigned>& target) const {
        PolyTrig out = num_;
        const auto& dens = chart_->denominators();
        for (size_t j = 0; j < den_.size(); ++j)
            if (target[j] > den_[j])
                out = detail::polytrig_mul(
                    out, detail::polytrig_pow(dens[j], target[j] - den_[j], chart_->dimension()));
        return out;
    }

    PolyTrig partial_polytrig(const PolyTrig& p, size_t i) const {
        PolyTrig out;
        const bool flat = chart_->coord(i).kind == CoordKind::Flat;
        for (const auto& [k, c] : p) {
            if (flat) {
                if (k.exp[i] == 0) continue;
                TermKey nk = k;
                nk.exp[i] -= 1;
                detail::polytrig_accumulate(out, nk, c * Rational(k.exp[i]));
            } else {
                const TrigFactor tf = k.trig[i];
                if (tf.freq == 0) continue;
                TermKey nk = k;
                nk.trig[i].is_sin = !tf.is_sin;
                const Rational scale =
                    tf.is_sin ? Rational(tf.freq) : -Rational(tf.freq);
                detail::polytrig_accumulate(out, nk, c * scale);
            }
        }
        return out;
    }

    double eval_polytrig(const PolyTrig& p, const std::vector<double>& point) const {
        double total = 0;
        for (const auto& [k, c] : p) {
            double t = to_double(c);
            for (size_t i = 0; i < k.exp.size(); ++i) {
                if (k.exp[i]) t *= std::pow(point[i], double(k.exp[i]));
                if (k.trig[i].freq) {
                    const double a = double(k.trig[i].freq) * point[i];
                    t *= k.trig[i].is_sin ? std::sin(a) : std::cos(a);
                }
            }
            total += t;
        }
        return total;
    }

    void reduce() {
        if (num_.empty()) {
            std::fill(den_.begin(), den_.end(), 0u);
            return;
        }
        const auto& dens = chart_->denominators();
        bool progress = true;
        while (progress) {
            progress = false;
            for (size_t j = 0; j < den_.size(); ++j) {
                while (den_[j] > 0) {
                    auto q = detail::polytrig_divide_exact(num_, dens[j]);
                    if (!q) break;
                    num_ = std::move(*q);
                    --den_[j];
                    progress = true;
                }
            }
        }
    }

    ChartPtr chart_;
    PolyTrig num_;
    std::vector<unsigned> den_;
};

/// Chart with the given expressions declared invertible.  Each must be a
/// denominator-free, trig-free polynomial built over `base`.
inline ChartPtr localized(const ChartPtr& base, const std::vector<ScalarExpr>& denominators) {
    std::vector<PolyTrig> dens;
    dens.reserve(denominators.size());
    for (const auto& d : denominators) {
        require_same_chart(d.chart(), base);
        for (unsigned e : d.denominator_exponents())
            if (e) throw Error("denominator must itself be denominator-free");
        dens.push_back(d.numerator());
    }
    return base->localized(std::move(dens));
}

}  // namespace pfaffkit

#endif
