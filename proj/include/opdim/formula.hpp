#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "opdim/error.hpp"
#include "opdim/rational.hpp"

namespace opdim {

/// A term is a variable, a named constant of the signature, or a rational
/// literal (only meaningful over the dense order).
struct Term {
    enum class Kind : std::uint8_t { variable, constant, number };

    Kind kind = Kind::variable;
    std::string name;
    Rational value;

    static Term var(std::string n) { return Term{Kind::variable, std::move(n), {}}; }
    static Term constant(std::string n) { return Term{Kind::constant, std::move(n), {}}; }
    static Term number(Rational v) { return Term{Kind::number, {}, std::move(v)}; }

    bool is_var() const { return kind == Kind::variable; }
    bool is_number() const { return kind == Kind::number; }

    friend bool operator==(const Term& a, const Term& b) {
        if (a.kind != b.kind) return false;
        return a.kind == Kind::number ? a.value == b.value : a.name == b.name;
    }
};

inline std::string to_string(const Term& t) {
    return t.kind == Term::Kind::number ? to_string(t.value) : t.name;
}

enum class Op : std::uint8_t {
    truth,
    falsity,
    atom,
    equal,
    negation,
    conjunction,
    disjunction,
    implication,
    equivalence,
    forall,
    exists,
};

/// Immutable first-order formula. Copies share structure.
class Formula {
public:
    struct Node {
        Op op = Op::truth;
        std::string relation;          // atom
        std::vector<Term> terms;       // atom, equal
        std::vector<Formula> children; // connectives, quantifier body
        std::string bound;             // quantified variable
    };

    Formula() : node_(truth_node()) {}

    Op op() const { return node_->op; }
    const std::string& relation() const { return node_->relation; }
    const std::vector<Term>& terms() const { return node_->terms; }
    const std::vector<Formula>& children() const { return node_->children; }
    const Formula& child(std::size_t i = 0) const { return node_->children.at(i); }
    const std::string& bound() const { return node_->bound; }

    bool is_quantifier() const { return op() == Op::forall || op() == Op::exists; }
    bool is_literal_like() const {
        return op() == Op::truth || op() == Op::falsity || op() == Op::atom || op() == Op::equal;
    }

    static Formula make(Node n) { return Formula(std::make_shared<const Node>(std::move(n))); }

    friend bool operator==(const Formula& a, const Formula& b) {
        if (a.node_ == b.node_) return true;
        const Node& x = *a.node_;
        const Node& y = *b.node_;
        return x.op == y.op && x.relation == y.relation && x.bound == y.bound && x.terms == y.terms &&
               x.children == y.children;
    }

private:
    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static const std::shared_ptr<const Node>& truth_node() {
        static const auto n = std::make_shared<const Node>(Node{});
        return n;
    }

    std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Builders

inline Formula top() { return Formula(); }
inline Formula bottom() { return Formula::make({Op::falsity, {}, {}, {}, {}}); }
inline Formula truth_value(bool b) { return b ? top() : bottom(); }

inline Formula atom(std::string relation, std::vector<Term> terms) {
    return Formula::make({Op::atom, std::move(relation), std::move(terms), {}, {}});
}
inline Formula equal(Term a, Term b) { return Formula::make({Op::equal, {}, {std::move(a), std::move(b)}, {}, {}}); }
inline Formula negate(Formula f) { return Formula::make({Op::negation, {}, {}, {std::move(f)}, {}}); }
inline Formula conj(std::vector<Formula> kids) {
    if (kids.empty()) return top();
    if (kids.size() == 1) return kids.front();
    return Formula::make({Op::conjunction, {}, {}, std::move(kids), {}});
}
inline Formula disj(std::vector<Formula> kids) {
    if (kids.empty()) return bottom();
    if (kids.size() == 1) return kids.front();
    return Formula::make({Op::disjunction, {}, {}, std::move(kids), {}});
}
inline Formula implies(Formula a, Formula b) {
    return Formula::make({Op::implication, {}, {}, {std::move(a), std::move(b)}, {}});
}
inline Formula iff(Formula a, Formula b) {
    return Formula::make({Op::equivalence, {}, {}, {std::move(a), std::move(b)}, {}});
}
inline Formula forall(std::string v, Formula body) {
    return Formula::make({Op::forall, {}, {}, {std::move(body)}, std::move(v)});
}
inline Formula exists(std::string v, Formula body) {
    return Formula::make({Op::exists, {}, {}, {std::move(body)}, std::move(v)});
}

/// Binary atom with an infix relation symbol such as "<" or "<1".
inline Formula less(Term a, Term b, std::string relation = "<") {
    return atom(std::move(relation), {std::move(a), std::move(b)});
}

/// φ^t with t = 1 meaning φ and t = 0 meaning ¬φ.
inline Formula signed_formula(const Formula& f, bool positive) { return positive ? f : negate(f); }

// ---------------------------------------------------------------------------
// Traversals

namespace detail {
inline void collect_free(const Formula& f, std::vector<std::string>& bound, std::vector<std::string>& out) {
    auto note = [&](const Term& t) {
        if (!t.is_var()) return;
        if (std::find(bound.begin(), bound.end(), t.name) != bound.end()) return;
        if (std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
    };
    switch (f.op()) {
    case Op::atom:
    case Op::equal:
        for (const auto& t : f.terms()) note(t);
        return;
    case Op::forall:
    case Op::exists:
        bound.push_back(f.bound());
        collect_free(f.child(), bound, out);
        bound.pop_back();
        return;
    default:
        for (const auto& c : f.children()) collect_free(c, bound, out);
    }
}
} // namespace detail

/// Free variables in order of first occurrence.
inline std::vector<std::string> free_variables(const Formula& f) {
    std::vector<std::string> bound, out;
    detail::collect_free(f, bound, out);
    return out;
}

inline bool is_quantifier_free(const Formula& f) {
    if (f.is_quantifier()) return false;
    return std::all_of(f.children().begin(), f.children().end(), [](const Formula& c) { return is_quantifier_free(c); });
}

inline void collect_numbers(const Formula& f, std::set<Rational>& out) {
    for (const auto& t : f.terms())
        if (t.is_number()) out.insert(t.value);
    for (const auto& c : f.children()) collect_numbers(c, out);
}

inline std::vector<Rational> numbers_of(const Formula& f) {
    std::set<Rational> s;
    collect_numbers(f, s);
    return {s.begin(), s.end()};
}

inline void collect_variable_names(const Formula& f, std::set<std::string>& out) {
    for (const auto& t : f.terms())
        if (t.is_var()) out.insert(t.name);
    if (f.is_quantifier()) out.insert(f.bound());
    for (const auto& c : f.children()) collect_variable_names(c, out);
}

/// Capture-avoiding simultaneous substitution of terms for free variables.
inline Formula substitute(const Formula& f, const std::map<std::string, Term>& sub) {
    if (sub.empty()) return f;
    auto replace = [&](const Term& t) {
        if (!t.is_var()) return t;
        auto it = sub.find(t.name);
        return it == sub.end() ? t : it->second;
    };
    switch (f.op()) {
    case Op::truth:
    case Op::falsity:
        return f;
    case Op::atom:
    case Op::equal: {
        Formula::Node n{f.op(), f.relation(), {}, {}, {}};
        for (const auto& t : f.terms()) n.terms.push_back(replace(t));
        return Formula::make(std::move(n));
    }
    case Op::forall:
    case Op::exists: {
        auto inner = sub;
        inner.erase(f.bound());
        if (inner.empty()) return f;
        std::string v = f.bound();
        Formula body = f.child();
        bool captures = std::any_of(inner.begin(), inner.end(),
                                    [&](const auto& kv) { return kv.second.is_var() && kv.second.name == v; });
        if (captures) {
            std::set<std::string> used;
            collect_variable_names(body, used);
            for (const auto& kv : inner)
                if (kv.second.is_var()) used.insert(kv.second.name);
            std::string fresh = v;
            for (int i = 0; used.count(fresh); ++i) fresh = v + "_" + std::to_string(i);
            body = substitute(body, {{v, Term::var(fresh)}});
            v = fresh;
        }
        return Formula::make({f.op(), {}, {}, {substitute(body, inner)}, v});
    }
    default: {
        Formula::Node n{f.op(), {}, {}, {}, {}};
        for (const auto& c : f.children()) n.children.push_back(substitute(c, sub));
        return Formula::make(std::move(n));
    }
    }
}

inline Formula rename_variables(const Formula& f, const std::vector<std::string>& from,
                                const std::vector<std::string>& to) {
    std::map<std::string, Term> sub;
    for (std::size_t i = 0; i < from.size(); ++i) sub.emplace(from[i], Term::var(to.at(i)));
    return substitute(f, sub);
}

// ---------------------------------------------------------------------------
// Printer. Output parses back to the same tree (see parser.hpp).

namespace detail {
// 0: top, 1: implication, 2: disjunction, 3: conjunction, 4: literal
inline int level_of(const Formula& f) {
    switch (f.op()) {
    case Op::forall:
    case Op::exists:
    case Op::equivalence:
        return 0;
    case Op::implication:
        return 1;
    case Op::disjunction:
        return 2;
    case Op::conjunction:
        return 3;
    default:
        return 4;
    }
}

inline void print(const Formula& f, int ctx, std::string& out);

inline void print_child(const Formula& f, int ctx, std::string& out) {
    bool wrap = f.is_quantifier() ? ctx > 0 : level_of(f) < ctx;
    if (wrap) out += '(';
    print(f, wrap ? 0 : ctx, out);
    if (wrap) out += ')';
}

inline void print(const Formula& f, int ctx, std::string& out) {
    switch (f.op()) {
    case Op::truth:
        out += "true";
        return;
    case Op::falsity:
        out += "false";
        return;
    case Op::atom:
        if (f.terms().size() == 2 && !f.relation().empty() && f.relation()[0] == '<') {
            out += to_string(f.terms()[0]) + " " + f.relation() + " " + to_string(f.terms()[1]);
            return;
        }
        out += f.relation() + "(";
        for (std::size_t i = 0; i < f.terms().size(); ++i) {
            if (i) out += ", ";
            out += to_string(f.terms()[i]);
        }
        out += ")";
        return;
    case Op::equal:
        out += to_string(f.terms()[0]) + " = " + to_string(f.terms()[1]);
        return;
    case Op::negation: {
        out += '~';
        const Formula& c = f.child();
        bool bare = c.op() == Op::truth || c.op() == Op::falsity || c.op() == Op::negation ||
                    (c.op() == Op::atom && !(c.terms().size() == 2 && c.relation()[0] == '<'));
        if (bare) {
            print(c, 4, out);
        } else {
            out += '(';
            print(c, 0, out);
            out += ')';
        }
        return;
    }
    case Op::conjunction:
    case Op::disjunction: {
        const char* sep = f.op() == Op::conjunction ? " & " : " | ";
        int kid_ctx = f.op() == Op::conjunction ? 4 : 3;
        for (std::size_t i = 0; i < f.children().size(); ++i) {
            if (i) out += sep;
            print_child(f.children()[i], kid_ctx, out);
        }
        return;
    }
    case Op::implication:
        print_child(f.child(0), 2, out);
        out += " -> ";
        print_child(f.child(1), 1, out);
        return;
    case Op::equivalence:
        print_child(f.child(0), 1, out);
        out += " <-> ";
        print_child(f.child(1), 1, out);
        return;
    case Op::forall:
    case Op::exists:
        out += f.op() == Op::forall ? "forall " : "exists ";
        out += f.bound() + ". ";
        print(f.child(), 0, out);
        return;
    }
    (void)ctx;
}
} // namespace detail

inline std::string to_string(const Formula& f) {
    std::string out;
    detail::print(f, 0, out);
    return out;
}

// ---------------------------------------------------------------------------

/// φ(x; y): a formula with its free variables split into object variables
/// and parameter variables.
struct PartitionedFormula {
    Formula body;
    std::vector<std::string> object_vars;
    std::vector<std::string> param_vars;

    std::size_t object_arity() const { return object_vars.size(); }
    std::size_t param_arity() const { return param_vars.size(); }

    friend bool operator==(const PartitionedFormula&, const PartitionedFormula&) = default;
};

inline PartitionedFormula make_partitioned(Formula body, std::vector<std::string> x, std::vector<std::string> y) {
    for (const auto& v : x)
        if (std::find(y.begin(), y.end(), v) != y.end())
            throw InputError("variable '" + v + "' is both an object and a parameter variable");
    auto check_distinct = [](const std::vector<std::string>& vs) {
        std::set<std::string> s(vs.begin(), vs.end());
        if (s.size() != vs.size()) throw InputError("repeated variable in a variable tuple");
    };
    check_distinct(x);
    check_distinct(y);
    for (const auto& v : free_variables(body)) {
        if (std::find(x.begin(), x.end(), v) == x.end() && std::find(y.begin(), y.end(), v) == y.end())
            throw InputError("free variable '" + v + "' of '" + to_string(body) + "' is neither object nor parameter");
    }
    return {std::move(body), std::move(x), std::move(y)};
}

/// Object variables as given; every other free variable becomes a parameter,
/// in order of first occurrence.
inline PartitionedFormula partition(Formula body, std::vector<std::string> x) {
    std::vector<std::string> y;
    for (const auto& v : free_variables(body))
        if (std::find(x.begin(), x.end(), v) == x.end()) y.push_back(v);
    return make_partitioned(std::move(body), std::move(x), std::move(y));
}

/// φ(x, b) with the parameter variables replaced by the given terms.
inline Formula instantiate(const PartitionedFormula& phi, const std::vector<Term>& params) {
    if (params.size() != phi.param_vars.size()) throw InputError("parameter tuple has the wrong length");
    std::map<std::string, Term> sub;
    for (std::size_t i = 0; i < params.size(); ++i) sub.emplace(phi.param_vars[i], params[i]);
    return substitute(phi.body, sub);
}

inline std::string to_string(const PartitionedFormula& p) {
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
        return s;
    };
    return to_string(p.body) + "  [" + join(p.object_vars) + " ; " + join(p.param_vars) + "]";
}

/// Δ: a finite set of partitioned formulas sharing their object variables.
using FormulaSet = std::vector<PartitionedFormula>;

} // namespace opdim
