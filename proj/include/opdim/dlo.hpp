#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "opdim/error.hpp"
#include "opdim/formula.hpp"
#include "opdim/rational.hpp"

// Symbolic engine for the dense linear order (Q,<) with rational constants.

namespace opdim::dlo {

// ---------------------------------------------------------------------------
// Literals and consistency of literal sets

enum class Rel { lt, le, eq, ne };

struct Lit {
    Rel rel;
    Term a, b;
};

inline bool term_less(const Term& x, const Term& y) {
    if (x.kind != y.kind) return x.kind < y.kind;
    if (x.kind == Term::Kind::number) return x.value < y.value;
    return x.name < y.name;
}
inline bool term_same(const Term& x, const Term& y) { return !term_less(x, y) && !term_less(y, x); }

inline void check_term(const Term& t) {
    if (t.kind == Term::Kind::constant)
        throw InputError("named constant '" + t.name + "' has no meaning in the dense order");
}

/// True iff the literals have a common solution in Q. Builds the graph of
/// <, <=, = edges (plus the chain of numeric constants) and looks for a
/// strict edge or a disequality inside one strongly connected component.
inline bool consistent(const std::vector<Lit>& lits) {
    std::vector<Term> nodes;
    auto id = [&](const Term& t) {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (term_same(nodes[i], t)) return i;
        nodes.push_back(t);
        return nodes.size() - 1;
    };
    struct Edge {
        std::size_t from, to;
        bool strict;
    };
    std::vector<Edge> edges;
    std::vector<std::pair<std::size_t, std::size_t>> diseq;
    for (const auto& l : lits) {
        std::size_t a = id(l.a), b = id(l.b);
        switch (l.rel) {
        case Rel::lt: edges.push_back({a, b, true}); break;
        case Rel::le: edges.push_back({a, b, false}); break;
        case Rel::eq:
            edges.push_back({a, b, false});
            edges.push_back({b, a, false});
            break;
        case Rel::ne: diseq.emplace_back(a, b); break;
        }
    }
    std::vector<std::size_t> nums;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].is_number()) nums.push_back(i);
    std::sort(nums.begin(), nums.end(), [&](auto x, auto y) { return nodes[x].value < nodes[y].value; });
    for (std::size_t i = 1; i < nums.size(); ++i) edges.push_back({nums[i - 1], nums[i], true});

    const std::size_t n = nodes.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : edges) adj[e.from].push_back(e.to);

    // Tarjan, iterative.
    std::vector<long> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on(n, false);
    std::vector<std::size_t> stack;
    long counter = 0, ncomp = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (index[s] >= 0) continue;
        std::vector<std::pair<std::size_t, std::size_t>> work{{s, 0}};
        index[s] = low[s] = counter++;
        stack.push_back(s);
        on[s] = true;
        while (!work.empty()) {
            auto& [v, k] = work.back();
            if (k < adj[v].size()) {
                std::size_t w = adj[v][k++];
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on[w] = true;
                    work.emplace_back(w, 0);
                } else if (on[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
            } else {
                std::size_t done = v;
                work.pop_back();
                if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
                if (low[done] == index[done]) {
                    std::size_t w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on[w] = false;
                        comp[w] = ncomp;
                    } while (w != done);
                    ++ncomp;
                }
            }
        }
    }
    for (const auto& e : edges)
        if (e.strict && comp[e.from] == comp[e.to]) return false;
    for (const auto& [a, b] : diseq)
        if (comp[a] == comp[b]) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Negation normal form

struct Nnf {
    enum class Kind { lit, all, any, top, bottom } kind = Kind::top;
    Lit lit{Rel::eq, {}, {}};
    std::vector<Nnf> kids;
};

inline Nnf to_nnf(const Formula& f, bool positive = true) {
    using K = Nnf::Kind;
    Nnf out;
    switch (f.op()) {
    case Op::truth:
        out.kind = positive ? K::top : K::bottom;
        return out;
    case Op::falsity:
        out.kind = positive ? K::bottom : K::top;
        return out;
    case Op::atom: {
        if (f.relation() != "<" || f.terms().size() != 2)
            throw InputError("the dense order has only the binary relation '<', got '" + f.relation() + "'");
        const Term &a = f.terms()[0], &b = f.terms()[1];
        check_term(a);
        check_term(b);
        out.kind = K::lit;
        out.lit = positive ? Lit{Rel::lt, a, b} : Lit{Rel::le, b, a};
        return out;
    }
    case Op::equal:
        check_term(f.terms()[0]);
        check_term(f.terms()[1]);
        out.kind = K::lit;
        out.lit = {positive ? Rel::eq : Rel::ne, f.terms()[0], f.terms()[1]};
        return out;
    case Op::negation:
        return to_nnf(f.child(), !positive);
    case Op::conjunction:
    case Op::disjunction:
        out.kind = (f.op() == Op::conjunction) == positive ? K::all : K::any;
        for (const auto& c : f.children()) out.kids.push_back(to_nnf(c, positive));
        return out;
    case Op::implication:
        out.kind = positive ? K::any : K::all;
        out.kids.push_back(to_nnf(f.child(0), !positive));
        out.kids.push_back(to_nnf(f.child(1), positive));
        return out;
    case Op::equivalence: {
        // a <-> b  ==  (a & b) | (~a & ~b);   ~(a <-> b)  ==  (a & ~b) | (~a & b)
        out.kind = K::any;
        Nnf l, r;
        l.kind = r.kind = K::all;
        l.kids = {to_nnf(f.child(0), true), to_nnf(f.child(1), positive)};
        r.kids = {to_nnf(f.child(0), false), to_nnf(f.child(1), !positive)};
        out.kids = {std::move(l), std::move(r)};
        return out;
    }
    case Op::forall:
    case Op::exists:
        throw InputError("quantified formula where a quantifier-free one is required");
    }
    return out;
}

namespace detail {
inline bool tableau(std::vector<const Nnf*> pending, std::vector<Lit> lits) {
    while (!pending.empty()) {
        const Nnf* n = pending.back();
        pending.pop_back();
        switch (n->kind) {
        case Nnf::Kind::top: break;
        case Nnf::Kind::bottom: return false;
        case Nnf::Kind::lit:
            lits.push_back(n->lit);
            if (!consistent(lits)) return false;
            break;
        case Nnf::Kind::all:
            for (const auto& k : n->kids) pending.push_back(&k);
            break;
        case Nnf::Kind::any:
            for (const auto& k : n->kids) {
                auto p = pending;
                p.push_back(&k);
                if (tableau(std::move(p), lits)) return true;
            }
            return false;
        }
    }
    return true;
}
} // namespace detail

Formula qe_dlo(const Formula& f);

/// Satisfiable in (Q,<) by some assignment of its free variables.
inline bool satisfiable(const Formula& f) {
    Formula g = is_quantifier_free(f) ? f : qe_dlo(f);
    Nnf n = to_nnf(g);
    return detail::tableau({&n}, {});
}

/// Satisfiability of a conjunction of quantifier-free formulas.
inline bool satisfiable_all(const std::vector<Formula>& fs) {
    std::vector<Nnf> ns;
    ns.reserve(fs.size());
    for (const auto& f : fs) ns.push_back(to_nnf(is_quantifier_free(f) ? f : qe_dlo(f)));
    std::vector<const Nnf*> pending;
    for (const auto& n : ns) pending.push_back(&n);
    return detail::tableau(std::move(pending), {});
}

// ---------------------------------------------------------------------------
// Quantifier elimination over disjunctive normal forms with positive atoms

namespace detail {

// A conjunct holds only lt / eq literals; eq literals are ordered a < b.
using Conjunct = std::vector<Lit>;
using Dnf = std::vector<Conjunct>;

inline bool lit_less(const Lit& x, const Lit& y) {
    if (x.rel != y.rel) return x.rel < y.rel;
    if (!term_same(x.a, y.a)) return term_less(x.a, y.a);
    return term_less(x.b, y.b);
}
inline bool lit_same(const Lit& x, const Lit& y) { return !lit_less(x, y) && !lit_less(y, x); }

// Normalizes a literal: 1 = true, 0 = false, -1 = keep.
inline int fold(Lit& l) {
    if (l.a.is_number() && l.b.is_number()) return l.rel == Rel::lt ? l.a.value < l.b.value : l.a.value == l.b.value;
    if (term_same(l.a, l.b)) return l.rel == Rel::eq;
    if (l.rel == Rel::eq && term_less(l.b, l.a)) std::swap(l.a, l.b);
    return -1;
}

// Folds and sorts a conjunct; false when it is contradictory by folding.
inline bool tidy(Conjunct& c) {
    Conjunct out;
    for (auto l : c) {
        int v = fold(l);
        if (v == 0) return false;
        if (v < 0) out.push_back(l);
    }
    std::sort(out.begin(), out.end(), lit_less);
    out.erase(std::unique(out.begin(), out.end(), lit_same), out.end());
    c = std::move(out);
    return true;
}

inline bool subset(const Conjunct& a, const Conjunct& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end(), lit_less);
}

inline Dnf tidy(Dnf d) {
    Dnf kept;
    for (auto& c : d)
        if (tidy(c) && consistent(c)) kept.push_back(std::move(c));
    std::sort(kept.begin(), kept.end(), [](const Conjunct& a, const Conjunct& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), lit_less);
    });
    Dnf out;
    for (auto& c : kept) {
        bool covered = false;
        for (const auto& o : out)
            if (subset(o, c)) {
                covered = true;
                break;
            }
        if (!covered) out.push_back(std::move(c));
    }
    return out;
}

inline Dnf to_dnf(const Nnf& n) {
    switch (n.kind) {
    case Nnf::Kind::top: return {{}};
    case Nnf::Kind::bottom: return {};
    case Nnf::Kind::lit: {
        const Lit& l = n.lit;
        switch (l.rel) {
        case Rel::lt: return tidy(Dnf{{l}});
        case Rel::eq: return tidy(Dnf{{l}});
        case Rel::le: return tidy(Dnf{{Lit{Rel::lt, l.a, l.b}}, {Lit{Rel::eq, l.a, l.b}}});
        case Rel::ne: return tidy(Dnf{{Lit{Rel::lt, l.a, l.b}}, {Lit{Rel::lt, l.b, l.a}}});
        }
        return {};
    }
    case Nnf::Kind::any: {
        Dnf out;
        for (const auto& k : n.kids) {
            Dnf d = to_dnf(k);
            out.insert(out.end(), d.begin(), d.end());
        }
        return tidy(std::move(out));
    }
    case Nnf::Kind::all: {
        Dnf acc{{}};
        for (const auto& k : n.kids) {
            Dnf d = to_dnf(k);
            Dnf next;
            for (const auto& a : acc)
                for (const auto& b : d) {
                    Conjunct c = a;
                    c.insert(c.end(), b.begin(), b.end());
                    next.push_back(std::move(c));
                }
            acc = tidy(std::move(next));
            if (acc.empty()) break;
        }
        return acc;
    }
    }
    return {};
}

inline Term replace(const Term& t, const std::string& v, const Term& by) {
    return t.is_var() && t.name == v ? by : t;
}
inline bool mentions(const Term& t, const std::string& v) { return t.is_var() && t.name == v; }

inline Dnf eliminate(const std::string& v, const Dnf& d) {
    Dnf out;
    for (const auto& c : d) {
        const Lit* pin = nullptr;
        for (const auto& l : c)
            if (l.rel == Rel::eq && (mentions(l.a, v) != mentions(l.b, v))) {
                pin = &l;
                break;
            }
        Conjunct r;
        if (pin) {
            Term by = mentions(pin->a, v) ? pin->b : pin->a;
            for (const auto& l : c) r.push_back({l.rel, replace(l.a, v, by), replace(l.b, v, by)});
        } else {
            std::vector<Term> lower, upper;
            for (const auto& l : c) {
                if (mentions(l.a, v)) upper.push_back(l.b);
                else if (mentions(l.b, v)) lower.push_back(l.a);
                else r.push_back(l);
            }
            for (const auto& lo : lower)
                for (const auto& hi : upper) r.push_back({Rel::lt, lo, hi});
        }
        out.push_back(std::move(r));
    }
    return tidy(std::move(out));
}

inline Formula from_dnf(const Dnf& d) {
    std::vector<Formula> alts;
    for (const auto& c : d) {
        if (c.empty()) return top();
        std::vector<Formula> parts;
        for (const auto& l : c) parts.push_back(l.rel == Rel::lt ? less(l.a, l.b) : equal(l.a, l.b));
        alts.push_back(conj(std::move(parts)));
    }
    if (alts.empty()) return bottom();
    return disj(std::move(alts));
}

inline Formula qe_rec(const Formula& f) {
    switch (f.op()) {
    case Op::truth:
    case Op::falsity:
    case Op::atom:
    case Op::equal:
        return f;
    case Op::negation: return negate(qe_rec(f.child()));
    case Op::conjunction:
    case Op::disjunction: {
        std::vector<Formula> kids;
        for (const auto& c : f.children()) kids.push_back(qe_rec(c));
        return f.op() == Op::conjunction ? conj(std::move(kids)) : disj(std::move(kids));
    }
    case Op::implication: return implies(qe_rec(f.child(0)), qe_rec(f.child(1)));
    case Op::equivalence: return iff(qe_rec(f.child(0)), qe_rec(f.child(1)));
    case Op::exists: return from_dnf(eliminate(f.bound(), to_dnf(to_nnf(qe_rec(f.child())))));
    case Op::forall:
        return negate(from_dnf(eliminate(f.bound(), to_dnf(to_nnf(qe_rec(f.child()), false)))));
    }
    return f;
}

} // namespace detail

/// Equivalent quantifier-free formula, as a disjunction of conjunctions of
/// atoms s < t and s = t. Quantifier-free input is returned unchanged.
inline Formula qe_dlo(const Formula& f) {
    if (is_quantifier_free(f)) {
        to_nnf(f);
        return f;
    }
    return detail::from_dnf(detail::to_dnf(to_nnf(detail::qe_rec(f))));
}

/// Disjunctive normal form of a quantifier-free formula, tidied.
inline Formula normalize(const Formula& f) { return detail::from_dnf(detail::to_dnf(to_nnf(qe_dlo(f)))); }

// ---------------------------------------------------------------------------
// Direct semantics

using Env = std::map<std::string, Rational>;

inline Rational term_value(const Term& t, const Env& env) {
    check_term(t);
    if (t.is_number()) return t.value;
    auto it = env.find(t.name);
    if (it == env.end()) throw InputError("unbound free variable '" + t.name + "'");
    return it->second;
}

/// (Q,<) ⊨ f[env], decided independently of elimination: a quantifier ranges
/// over the known values, the midpoints between them and one point beyond
/// each end, which meets every order type over the known values.
inline bool holds(const Formula& f, const Env& env) {
    switch (f.op()) {
    case Op::truth: return true;
    case Op::falsity: return false;
    case Op::atom:
        if (f.relation() != "<" || f.terms().size() != 2)
            throw InputError("the dense order has only the binary relation '<', got '" + f.relation() + "'");
        return term_value(f.terms()[0], env) < term_value(f.terms()[1], env);
    case Op::equal: return term_value(f.terms()[0], env) == term_value(f.terms()[1], env);
    case Op::negation: return !holds(f.child(), env);
    case Op::conjunction:
        for (const auto& c : f.children())
            if (!holds(c, env)) return false;
        return true;
    case Op::disjunction:
        for (const auto& c : f.children())
            if (holds(c, env)) return true;
        return false;
    case Op::implication: return !holds(f.child(0), env) || holds(f.child(1), env);
    case Op::equivalence: return holds(f.child(0), env) == holds(f.child(1), env);
    case Op::forall:
    case Op::exists: {
        std::set<Rational> known;
        collect_numbers(f, known);
        for (const auto& [k, v] : env) known.insert(v);
        std::vector<Rational> cands;
        if (known.empty()) cands.push_back(0);
        else {
            std::vector<Rational> ks(known.begin(), known.end());
            cands.push_back(ks.front() - 1);
            for (std::size_t i = 0; i < ks.size(); ++i) {
                cands.push_back(ks[i]);
                if (i + 1 < ks.size()) cands.push_back((ks[i] + ks[i + 1]) / 2);
            }
            cands.push_back(ks.back() + 1);
        }
        bool want = f.op() == Op::exists;
        Env e = env;
        for (const auto& c : cands) {
            e[f.bound()] = c;
            if (holds(f.child(), e) == want) return want;
        }
        return !want;
    }
    }
    return false;
}

/// Compiled evaluation of a quantifier-free formula at points of Q^m.
class QfEvaluator {
public:
    QfEvaluator(const Formula& f, const std::vector<std::string>& vars) { root_ = compile(f, vars); }

    bool operator()(const std::vector<Rational>& p) const { return eval(root_, p); }

private:
    struct Arg {
        long slot; // -1 for a number
        Rational value;
    };
    struct Node {
        Op op;
        Arg a, b;
        std::vector<int> kids;
    };

    Arg arg(const Term& t, const std::vector<std::string>& vars) {
        check_term(t);
        if (t.is_number()) return {-1, t.value};
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == t.name) return {static_cast<long>(i), 0};
        throw InputError("unbound free variable '" + t.name + "'");
    }

    int compile(const Formula& f, const std::vector<std::string>& vars) {
        Node n{f.op(), {}, {}, {}};
        switch (f.op()) {
        case Op::atom:
            if (f.relation() != "<" || f.terms().size() != 2)
                throw InputError("the dense order has only the binary relation '<', got '" + f.relation() + "'");
            [[fallthrough]];
        case Op::equal:
            n.a = arg(f.terms()[0], vars);
            n.b = arg(f.terms()[1], vars);
            break;
        case Op::forall:
        case Op::exists:
            throw InputError("quantified formula where a quantifier-free one is required");
        default:
            for (const auto& c : f.children()) n.kids.push_back(compile(c, vars));
        }
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size() - 1);
    }

    static const Rational& val(const Arg& a, const std::vector<Rational>& p) {
        return a.slot < 0 ? a.value : p[static_cast<std::size_t>(a.slot)];
    }

    bool eval(int id, const std::vector<Rational>& p) const {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        switch (n.op) {
        case Op::truth: return true;
        case Op::falsity: return false;
        case Op::atom: return val(n.a, p) < val(n.b, p);
        case Op::equal: return val(n.a, p) == val(n.b, p);
        case Op::negation: return !eval(n.kids[0], p);
        case Op::conjunction:
            for (int k : n.kids)
                if (!eval(k, p)) return false;
            return true;
        case Op::disjunction:
            for (int k : n.kids)
                if (eval(k, p)) return true;
            return false;
        case Op::implication: return !eval(n.kids[0], p) || eval(n.kids[1], p);
        case Op::equivalence: return eval(n.kids[0], p) == eval(n.kids[1], p);
        default: return false;
        }
    }

    std::vector<Node> nodes_;
    int root_ = 0;
};

// ---------------------------------------------------------------------------
// Order diagrams

/// Complete order type of m variables over sorted constants c_0 < ... < c_{k-1}.
/// Entry v is (slot << 8) | sub: odd slot 2j+1 means x_v = c_j, even slot 2j
/// means x_v lies in the gap below c_j (slot 2k: above every constant), and
/// sub ranks x_v among the variables in that gap. Comparing two entries as
/// integers compares the variables.
using Diagram = std::vector<std::uint32_t>;

inline std::uint32_t slot_of(std::uint32_t code) { return code >> 8; }
inline std::uint32_t sub_of(std::uint32_t code) { return code & 0xffu; }
inline std::uint32_t make_code(std::uint32_t slot, std::uint32_t sub) { return (slot << 8) | sub; }

namespace detail {
inline void enumerate_rec(std::size_t m, std::size_t k, std::size_t i, Diagram& d, std::vector<std::uint32_t>& classes,
                          std::vector<Diagram>& out) {
    if (i == m) {
        out.push_back(d);
        return;
    }
    for (std::uint32_t slot = 0; slot <= 2 * k; ++slot) {
        if (slot % 2) {
            d[i] = make_code(slot, 0);
            enumerate_rec(m, k, i + 1, d, classes, out);
            continue;
        }
        std::uint32_t t = classes[slot / 2];
        for (std::uint32_t c = 0; c < t; ++c) {
            d[i] = make_code(slot, c);
            enumerate_rec(m, k, i + 1, d, classes, out);
        }
        for (std::uint32_t p = 0; p <= t; ++p) {
            Diagram saved = d;
            for (std::size_t v = 0; v < i; ++v)
                if (slot_of(d[v]) == slot && sub_of(d[v]) >= p) d[v] = make_code(slot, sub_of(d[v]) + 1);
            d[i] = make_code(slot, p);
            ++classes[slot / 2];
            enumerate_rec(m, k, i + 1, d, classes, out);
            --classes[slot / 2];
            d = saved;
        }
    }
}
} // namespace detail

/// Every diagram of m variables over k constants, sorted.
inline std::shared_ptr<const std::vector<Diagram>> all_diagrams(std::size_t m, std::size_t k) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const std::vector<Diagram>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{m, k}];
    if (!slot) {
        if (m > 8 || k > 60) throw BudgetExceeded("too many variables or constants for diagram enumeration");
        auto out = std::make_shared<std::vector<Diagram>>();
        Diagram d(m, 0);
        std::vector<std::uint32_t> classes(k + 1, 0);
        detail::enumerate_rec(m, k, 0, d, classes, *out);
        std::sort(out->begin(), out->end());
        slot = out;
    }
    return slot;
}

/// A point realizing the diagram.
inline std::vector<Rational> representative(const Diagram& d, const std::vector<Rational>& consts) {
    const std::size_t k = consts.size();
    std::vector<std::uint32_t> classes(k + 1, 0);
    for (auto c : d)
        if (slot_of(c) % 2 == 0) classes[slot_of(c) / 2] = std::max(classes[slot_of(c) / 2], sub_of(c) + 1);
    std::vector<Rational> p;
    for (auto c : d) {
        std::uint32_t slot = slot_of(c), s = sub_of(c);
        if (slot % 2) {
            p.push_back(consts[slot / 2]);
            continue;
        }
        std::size_t g = slot / 2;
        Rational t = classes[g];
        if (k == 0) p.push_back(Rational(s));
        else if (g == 0) p.push_back(consts[0] - (t - s));
        else if (g == k) p.push_back(consts[k - 1] + 1 + s);
        else p.push_back(consts[g - 1] + (consts[g] - consts[g - 1]) * (s + 1) / (t + 1));
    }
    return p;
}

/// The diagram realized by a point.
inline Diagram diagram_of(const std::vector<Rational>& p, const std::vector<Rational>& consts) {
    Diagram d(p.size());
    std::vector<std::uint32_t> slots(p.size());
    for (std::size_t v = 0; v < p.size(); ++v) {
        auto it = std::lower_bound(consts.begin(), consts.end(), p[v]);
        std::uint32_t pos = static_cast<std::uint32_t>(it - consts.begin());
        slots[v] = (it != consts.end() && *it == p[v]) ? 2 * pos + 1 : 2 * pos;
    }
    for (std::size_t v = 0; v < p.size(); ++v) {
        std::uint32_t sub = 0;
        if (slots[v] % 2 == 0) {
            std::set<Rational> below;
            for (std::size_t w = 0; w < p.size(); ++w)
                if (slots[w] == slots[v] && p[w] < p[v]) below.insert(p[w]);
            sub = static_cast<std::uint32_t>(below.size());
        }
        d[v] = make_code(slots[v], sub);
    }
    return d;
}

/// Renumbers subs within every gap to 0..t-1, keeping their order.
inline Diagram normalize_subs(Diagram d) {
    std::map<std::uint32_t, std::set<std::uint32_t>> used;
    for (auto c : d)
        if (slot_of(c) % 2 == 0) used[slot_of(c)].insert(sub_of(c));
    for (auto& c : d) {
        if (slot_of(c) % 2) continue;
        const auto& u = used[slot_of(c)];
        c = make_code(slot_of(c), static_cast<std::uint32_t>(std::distance(u.begin(), u.find(sub_of(c)))));
    }
    return d;
}

/// The diagram over the constants without c_j that `d` refines.
inline Diagram coarsen(const Diagram& d, std::size_t j) {
    const std::uint32_t before = static_cast<std::uint32_t>(2 * j), at = before + 1, after = before + 2;
    std::uint32_t t1 = 0;
    bool on_c = false;
    for (auto c : d) {
        if (slot_of(c) == before) t1 = std::max(t1, sub_of(c) + 1);
        if (slot_of(c) == at) on_c = true;
    }
    Diagram out(d.size());
    for (std::size_t v = 0; v < d.size(); ++v) {
        std::uint32_t s = slot_of(d[v]), b = sub_of(d[v]);
        if (s < before) out[v] = d[v];
        else if (s == before) out[v] = make_code(before, b);
        else if (s == at) out[v] = make_code(before, t1);
        else if (s == after) out[v] = make_code(before, t1 + (on_c ? 1 : 0) + b);
        else out[v] = make_code(s - 2, b);
    }
    return out;
}

inline std::size_t free_classes(const Diagram& d) {
    std::set<std::uint32_t> cls;
    for (auto c : d)
        if (slot_of(c) % 2 == 0) cls.insert(c);
    return cls.size();
}

/// The diagram as a conjunction of order literals over `vars`.
inline Formula diagram_formula(const Diagram& d, const std::vector<Rational>& consts,
                               const std::vector<std::string>& vars) {
    std::vector<Formula> parts;
    const std::size_t k = consts.size();
    for (std::size_t v = 0; v < d.size(); ++v) {
        std::uint32_t s = slot_of(d[v]);
        Term x = Term::var(vars[v]);
        if (s % 2) {
            parts.push_back(equal(x, Term::number(consts[s / 2])));
            continue;
        }
        if (s / 2 > 0) parts.push_back(less(Term::number(consts[s / 2 - 1]), x));
        if (s / 2 < k) parts.push_back(less(x, Term::number(consts[s / 2])));
    }
    for (std::size_t v = 0; v < d.size(); ++v)
        for (std::size_t w = v + 1; w < d.size(); ++w) {
            if (slot_of(d[v]) % 2 && slot_of(d[v]) == slot_of(d[w])) continue;
            Term a = Term::var(vars[v]), b = Term::var(vars[w]);
            if (d[v] == d[w]) parts.push_back(equal(a, b));
            else if (d[v] < d[w]) parts.push_back(less(a, b));
            else parts.push_back(less(b, a));
        }
    return conj(std::move(parts));
}

// ---------------------------------------------------------------------------
// Definable subsets of Q^m as unions of diagrams

struct CellSet {
    std::size_t arity = 0;
    std::vector<Rational> consts; // sorted, distinct
    std::vector<Diagram> cells;   // sorted, distinct

    bool empty() const { return cells.empty(); }
    bool contains(const std::vector<Rational>& p) const {
        return std::binary_search(cells.begin(), cells.end(), diagram_of(p, consts));
    }
    friend bool operator==(const CellSet&, const CellSet&) = default;
};

inline std::vector<Rational> merge_consts(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    std::vector<Rational> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// The set defined by f(vars); quantifiers are eliminated first.
inline CellSet compile(const Formula& f, const std::vector<std::string>& vars,
                       const std::vector<Rational>& extra_consts = {}) {
    Formula g = qe_dlo(f);
    for (const auto& v : free_variables(g))
        if (std::find(vars.begin(), vars.end(), v) == vars.end())
            throw InputError("free variable '" + v + "' is not among the coordinates");
    CellSet s;
    s.arity = vars.size();
    s.consts = merge_consts(numbers_of(g), extra_consts);
    QfEvaluator ev(g, vars);
    for (const auto& d : *all_diagrams(s.arity, s.consts.size()))
        if (ev(representative(d, s.consts))) s.cells.push_back(d);
    return s;
}

inline CellSet full_set(std::size_t arity) {
    return CellSet{arity, {}, *all_diagrams(arity, 0)};
}

/// The same set described over a superset of its constants.
inline CellSet refine(const CellSet& s, const std::vector<Rational>& consts) {
    if (consts == s.consts) return s;
    CellSet out{s.arity, consts, {}};
    for (const auto& d : *all_diagrams(s.arity, consts.size()))
        if (s.contains(representative(d, consts))) out.cells.push_back(d);
    return out;
}

inline CellSet simplify(const CellSet& s);

inline CellSet combine(const CellSet& a, const CellSet& b, int mode) {
    if (a.arity != b.arity) throw InputError("cell sets of different arity");
    auto k = merge_consts(a.consts, b.consts);
    CellSet ra = refine(a, k), rb = refine(b, k);
    CellSet out{a.arity, k, {}};
    auto sink = std::back_inserter(out.cells);
    if (mode == 0) std::set_intersection(ra.cells.begin(), ra.cells.end(), rb.cells.begin(), rb.cells.end(), sink);
    else if (mode == 1) std::set_union(ra.cells.begin(), ra.cells.end(), rb.cells.begin(), rb.cells.end(), sink);
    else std::set_difference(ra.cells.begin(), ra.cells.end(), rb.cells.begin(), rb.cells.end(), sink);
    return simplify(out);
}
inline CellSet meet(const CellSet& a, const CellSet& b) { return combine(a, b, 0); }
inline CellSet unite(const CellSet& a, const CellSet& b) { return combine(a, b, 1); }
inline CellSet minus(const CellSet& a, const CellSet& b) { return combine(a, b, 2); }

inline CellSet complement(const CellSet& s) {
    CellSet out{s.arity, s.consts, {}};
    const auto& all = *all_diagrams(s.arity, s.consts.size());
    std::set_difference(all.begin(), all.end(), s.cells.begin(), s.cells.end(), std::back_inserter(out.cells));
    return out;
}

inline bool subset_of(const CellSet& a, const CellSet& b) { return minus(a, b).empty(); }

/// Image under the coordinate projection onto `keep`.
inline CellSet project(const CellSet& s, const std::vector<std::size_t>& keep) {
    CellSet out{keep.size(), s.consts, {}};
    for (const auto& d : s.cells) {
        Diagram e;
        for (auto v : keep) e.push_back(d.at(v));
        out.cells.push_back(normalize_subs(e));
    }
    std::sort(out.cells.begin(), out.cells.end());
    out.cells.erase(std::unique(out.cells.begin(), out.cells.end()), out.cells.end());
    return simplify(out);
}

/// Drops every constant the set does not depend on: c_j is irrelevant when
/// each coarse diagram over the other constants is either wholly inside the
/// set or disjoint from it. The result is the minimal description.
inline CellSet simplify(const CellSet& s) {
    CellSet cur = s;
    for (std::size_t j = 0; j < cur.consts.size();) {
        std::map<Diagram, std::size_t> in_set, in_all;
        for (const auto& d : cur.cells) ++in_set[coarsen(d, j)];
        for (const auto& d : *all_diagrams(cur.arity, cur.consts.size())) {
            Diagram c = coarsen(d, j);
            if (in_set.count(c)) ++in_all[c];
        }
        bool irrelevant = true;
        for (const auto& [c, n] : in_set)
            if (in_all[c] != n) {
                irrelevant = false;
                break;
            }
        if (!irrelevant) {
            ++j;
            continue;
        }
        CellSet next{cur.arity, cur.consts, {}};
        next.consts.erase(next.consts.begin() + static_cast<std::ptrdiff_t>(j));
        for (const auto& [c, n] : in_set) next.cells.push_back(c);
        cur = std::move(next);
        j = 0;
    }
    return cur;
}

/// Key identifying a set up to order automorphisms of Q that fix `pinned`:
/// pinned constants appear by value, the others only by position.
inline std::string shape_key(const CellSet& s, const std::vector<Rational>& pinned) {
    std::string key = std::to_string(s.arity) + "|";
    for (const auto& c : s.consts) {
        key += std::binary_search(pinned.begin(), pinned.end(), c) ? to_string(c) : "*";
        key += ",";
    }
    key += "|";
    for (const auto& d : s.cells) {
        for (auto c : d) {
            key += std::to_string(c);
            key += ".";
        }
        key += ";";
    }
    return key;
}

/// Union of the cell formulas, over variables `vars`.
inline Formula to_formula(const CellSet& s, const std::vector<std::string>& vars) {
    std::vector<Formula> alts;
    for (const auto& d : s.cells) alts.push_back(diagram_formula(d, s.consts, vars));
    return disj(std::move(alts));
}

/// `per_gap` points in every gap of the sorted constants `k`, plus `k` itself.
inline std::vector<Rational> grid(const std::vector<Rational>& k, std::size_t per_gap) {
    std::vector<Rational> out;
    if (k.empty()) {
        for (std::size_t i = 0; i < per_gap; ++i) out.push_back(Rational(static_cast<long>(i)));
        return out;
    }
    for (std::size_t i = per_gap; i > 0; --i) out.push_back(k.front() - static_cast<long>(i));
    for (std::size_t g = 0; g < k.size(); ++g) {
        out.push_back(k[g]);
        if (g + 1 < k.size())
            for (std::size_t i = 1; i <= per_gap; ++i)
                out.push_back(k[g] + (k[g + 1] - k[g]) * static_cast<long>(i) / static_cast<long>(per_gap + 1));
    }
    for (std::size_t i = 1; i <= per_gap; ++i) out.push_back(k.back() + static_cast<long>(i));
    return out;
}

/// Default witness grid: the constants, their midpoints, and one point
/// beyond each end; {-1, 0, 1} when there are no constants.
inline std::vector<Rational> standard_grid(const std::vector<Rational>& k) {
    if (k.empty()) return {Rational(-1), Rational(0), Rational(1)};
    return grid(k, 1);
}

} // namespace opdim::dlo
