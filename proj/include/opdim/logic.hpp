#pragma once

#include <set>
#include <string>
#include <vector>

#include "opdim/error.hpp"
#include "opdim/eval.hpp"
#include "opdim/formula.hpp"
#include "opdim/pointset.hpp"
#include "opdim/structure.hpp"

namespace opdim {

/// σ ∈ 2^n; bit i selects φ_i (true) or ¬φ_i (false).
using SignVector = std::vector<bool>;

/// A subset of universe^arity of a finite structure: the realization set
/// standing in for a consistent partial type.
struct DefinableSubset {
    const FiniteStructure* structure = nullptr;
    std::size_t arity = 0;
    PointSet points;

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.count(); }
    std::vector<Tuple> tuples() const {
        TupleCoder coder{structure->size(), arity};
        std::vector<Tuple> out;
        for (auto c : points.members()) out.push_back(coder.decode(c));
        return out;
    }
};

inline DefinableSubset define_subset(const FiniteStructure& m, const Formula& f, const std::vector<std::string>& vars) {
    return {&m, vars.size(), solution_set(m, f, vars)};
}

/// Realization set of φ(x, b) inside universe^|x|.
inline PointSet instance_set(const FiniteStructure& m, const PartitionedFormula& phi, const Tuple& b) {
    if (b.size() != phi.param_arity()) throw InputError("parameter tuple has the wrong length");
    std::vector<std::string> slots = phi.object_vars;
    slots.insert(slots.end(), phi.param_vars.begin(), phi.param_vars.end());
    Evaluator ev(m, phi.body, slots);
    TupleCoder coder{m.size(), phi.object_arity()};
    PointSet s(coder.extent());
    Tuple values(slots.size());
    std::copy(b.begin(), b.end(), values.begin() + static_cast<std::ptrdiff_t>(phi.object_arity()));
    for (std::size_t code = 0, e = coder.extent(); code < e; ++code) {
        Tuple x = coder.decode(code);
        std::copy(x.begin(), x.end(), values.begin());
        if (ev(values)) s.insert(code);
    }
    return s;
}

/// Every instance φ(x, b), b ∈ M^|y|, indexed by the code of b.
inline std::vector<PointSet> all_instance_sets(const FiniteStructure& m, const PartitionedFormula& phi) {
    TupleCoder pc{m.size(), phi.param_arity()};
    std::vector<PointSet> out;
    out.reserve(pc.extent());
    for (std::size_t code = 0, e = pc.extent(); code < e; ++code) out.push_back(instance_set(m, phi, pc.decode(code)));
    return out;
}

struct ShatterResult {
    std::size_t dimension = 0;
    std::vector<Tuple> witness; // a shattered parameter set of that size
};

/// Largest |B| <= max_b, B ⊆ M^y, with 2^|B| φ-types over B realized in M.
/// Shattered sets are closed under subsets, so the search grows them level by level.
inline ShatterResult shatter(const FiniteStructure& m, const PartitionedFormula& phi, std::size_t max_b) {
    std::vector<PointSet> inst = all_instance_sets(m, phi);
    TupleCoder pc{m.size(), phi.param_arity()};
    TupleCoder xc{m.size(), phi.object_arity()};
    const PointSet all(xc.extent(), true);

    auto shattered = [&](const std::vector<std::size_t>& b) {
        std::vector<PointSet> cells{all};
        for (auto p : b) {
            std::vector<PointSet> next;
            next.reserve(cells.size() * 2);
            for (const auto& c : cells) {
                PointSet in = c & inst[p];
                PointSet out = c - inst[p];
                if (in.empty() || out.empty()) return false;
                next.push_back(std::move(in));
                next.push_back(std::move(out));
            }
            cells = std::move(next);
        }
        return true;
    };

    ShatterResult result;
    if (all.empty()) return result;
    std::vector<std::vector<std::size_t>> level{{}};
    for (std::size_t k = 1; k <= max_b && !level.empty(); ++k) {
        std::vector<std::vector<std::size_t>> next;
        for (const auto& b : level) {
            std::size_t start = b.empty() ? 0 : b.back() + 1;
            for (std::size_t p = start; p < inst.size(); ++p) {
                auto c = b;
                c.push_back(p);
                if (shattered(c)) next.push_back(std::move(c));
            }
        }
        if (next.empty()) break;
        result.dimension = k;
        result.witness.clear();
        for (auto p : next.front()) result.witness.push_back(pc.decode(p));
        level = std::move(next);
    }
    return result;
}

inline std::size_t independence_dimension(const FiniteStructure& m, const PartitionedFormula& phi, std::size_t max_b) {
    return shatter(m, phi, max_b).dimension;
}

namespace detail {
inline Formula fold_and(const Formula& a, const Formula& b) {
    if (a.op() == Op::falsity || b.op() == Op::falsity) return bottom();
    if (a.op() == Op::truth) return b;
    if (b.op() == Op::truth) return a;
    return conj({a, b});
}
inline Formula fold_or(const Formula& a, const Formula& b) {
    if (a.op() == Op::truth || b.op() == Op::truth) return top();
    if (a.op() == Op::falsity) return b;
    if (b.op() == Op::falsity) return a;
    return disj({a, b});
}
inline Formula fold_not(const Formula& a) {
    if (a.op() == Op::truth) return bottom();
    if (a.op() == Op::falsity) return top();
    return negate(a);
}

inline std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
    std::string name = base;
    for (int i = 0; taken.count(name); ++i) name = base + "_" + std::to_string(i);
    return name;
}
} // namespace detail

/// ψ(x; y_0 ... y_{k-1}) true iff evenly many of φ(x, y_i) hold, written out
/// as an explicit boolean combination of the k renamed copies of φ.
inline PartitionedFormula parity_combine(const PartitionedFormula& phi, std::size_t k) {
    if (k == 0) throw InputError("parity_combine needs k >= 1");
    std::set<std::string> taken(phi.object_vars.begin(), phi.object_vars.end());
    collect_variable_names(phi.body, taken);
    std::vector<Formula> copies;
    std::vector<std::string> params;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<std::string> renamed;
        for (const auto& y : phi.param_vars) {
            renamed.push_back(detail::fresh_name(y + "_" + std::to_string(i), taken));
            taken.insert(renamed.back());
        }
        copies.push_back(rename_variables(phi.body, phi.param_vars, renamed));
        params.insert(params.end(), renamed.begin(), renamed.end());
    }
    Formula even = top(), odd = bottom();
    for (const auto& c : copies) {
        Formula next_even = detail::fold_or(detail::fold_and(odd, c), detail::fold_and(even, detail::fold_not(c)));
        Formula next_odd = detail::fold_or(detail::fold_and(even, c), detail::fold_and(odd, detail::fold_not(c)));
        even = next_even;
        odd = next_odd;
    }
    return make_partitioned(even, phi.object_vars, params);
}

/// Codes a finite Δ as one formula φ_Δ(x; z, w). The selector w is a tuple of
/// ⌈log2 |Δ|⌉ variable pairs; bit j of the code is "w_j0 = w_j1", so the
/// codes are equality patterns over two distinct elements and φ_Δ needs no
/// constants. Parameters of every θ are renamed onto a shared tuple z.
inline PartitionedFormula encode_delta(const FormulaSet& delta, const FiniteStructure& m) {
    if (delta.empty()) throw InputError("encode_delta needs a nonempty formula set");
    for (const auto& th : delta)
        if (th.object_vars != delta.front().object_vars)
            throw InputError("formulas of a set must share their object variables");
    if (delta.size() == 1) return delta.front();
    if (m.size() < 2) throw InsufficientCodes();

    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < delta.size()) ++bits;
    std::size_t zlen = 0;
    for (const auto& th : delta) zlen = std::max(zlen, th.param_arity());

    std::set<std::string> taken(delta.front().object_vars.begin(), delta.front().object_vars.end());
    for (const auto& th : delta) collect_variable_names(th.body, taken);
    std::vector<std::string> z, w;
    for (std::size_t i = 0; i < zlen; ++i) {
        z.push_back(detail::fresh_name("z" + std::to_string(i), taken));
        taken.insert(z.back());
    }
    for (std::size_t j = 0; j < bits; ++j) {
        for (const char* side : {"a", "b"}) {
            w.push_back(detail::fresh_name("w" + std::to_string(j) + side, taken));
            taken.insert(w.back());
        }
    }

    std::vector<Formula> branches;
    for (std::size_t t = 0; t < delta.size(); ++t) {
        const auto& th = delta[t];
        std::vector<Formula> parts;
        for (std::size_t j = 0; j < bits; ++j) {
            Formula same = equal(Term::var(w[2 * j]), Term::var(w[2 * j + 1]));
            parts.push_back(((t >> j) & 1u) ? same : negate(same));
        }
        std::vector<std::string> target(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(th.param_arity()));
        parts.push_back(rename_variables(th.body, th.param_vars, target));
        branches.push_back(conj(std::move(parts)));
    }
    std::vector<std::string> params = z;
    params.insert(params.end(), w.begin(), w.end());
    return make_partitioned(disj(std::move(branches)), delta.front().object_vars, params);
}

} // namespace opdim
