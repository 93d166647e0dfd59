#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "opdim/error.hpp"
#include "opdim/formula.hpp"
#include "opdim/pointset.hpp"
#include "opdim/structure.hpp"

namespace opdim {

/// Tarskian evaluation of a formula in a finite structure, compiled once
/// against a fixed ordering of its free variables ("slots").
class Evaluator {
public:
    Evaluator(const FiniteStructure& m, const Formula& f, std::vector<std::string> slots)
        : m_(&m), slots_(std::move(slots)) {
        std::vector<std::string> scope = slots_;
        root_ = compile(f, scope);
        width_ = max_width_;
    }

    std::size_t arity() const { return slots_.size(); }

    bool operator()(std::span<const std::size_t> values) const {
        if (values.size() != slots_.size()) throw InputError("wrong number of values for evaluation");
        std::vector<std::size_t> env(std::max(width_, values.size()), 0);
        std::copy(values.begin(), values.end(), env.begin());
        return eval(root_, env);
    }

private:
    struct Node {
        Op op;
        std::size_t relation = 0;
        std::vector<long> args; // slot >= 0, or -(element + 1) for a constant
        std::vector<int> kids;
        std::size_t slot = 0;
    };

    int compile(const Formula& f, std::vector<std::string>& scope) {
        max_width_ = std::max(max_width_, scope.size());
        Node n;
        n.op = f.op();
        switch (f.op()) {
        case Op::atom:
            n.relation = m_->signature().relation_index(f.relation());
            if (m_->signature().relations[n.relation].arity != f.terms().size())
                throw InputError("arity mismatch for relation '" + f.relation() + "'");
            [[fallthrough]];
        case Op::equal:
            for (const auto& t : f.terms()) n.args.push_back(term_code(t, scope));
            break;
        case Op::forall:
        case Op::exists:
            scope.push_back(f.bound());
            n.slot = scope.size() - 1;
            n.kids.push_back(compile(f.child(), scope));
            scope.pop_back();
            break;
        default:
            for (const auto& c : f.children()) n.kids.push_back(compile(c, scope));
        }
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size() - 1);
    }

    long term_code(const Term& t, const std::vector<std::string>& scope) const {
        switch (t.kind) {
        case Term::Kind::constant:
            return -static_cast<long>(m_->constant(t.name)) - 1;
        case Term::Kind::number:
            throw InputError("numeric literal '" + to_string(t) + "' has no meaning in a finite structure");
        case Term::Kind::variable:
            for (std::size_t i = scope.size(); i-- > 0;)
                if (scope[i] == t.name) return static_cast<long>(i);
            throw InputError("unbound free variable '" + t.name + "'");
        }
        return 0;
    }

    std::size_t value(long code, const std::vector<std::size_t>& env) const {
        return code >= 0 ? env[static_cast<std::size_t>(code)] : static_cast<std::size_t>(-code - 1);
    }

    bool eval(int id, std::vector<std::size_t>& env) const {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        switch (n.op) {
        case Op::truth:
            return true;
        case Op::falsity:
            return false;
        case Op::atom: {
            std::size_t buf[16];
            std::vector<std::size_t> big;
            std::size_t* args = buf;
            if (n.args.size() > 16) {
                big.resize(n.args.size());
                args = big.data();
            }
            for (std::size_t i = 0; i < n.args.size(); ++i) args[i] = value(n.args[i], env);
            return m_->holds(n.relation, args);
        }
        case Op::equal:
            return value(n.args[0], env) == value(n.args[1], env);
        case Op::negation:
            return !eval(n.kids[0], env);
        case Op::conjunction:
            for (int k : n.kids)
                if (!eval(k, env)) return false;
            return true;
        case Op::disjunction:
            for (int k : n.kids)
                if (eval(k, env)) return true;
            return false;
        case Op::implication:
            return !eval(n.kids[0], env) || eval(n.kids[1], env);
        case Op::equivalence:
            return eval(n.kids[0], env) == eval(n.kids[1], env);
        case Op::forall:
        case Op::exists: {
            bool want = n.op == Op::exists;
            std::size_t saved = env[n.slot];
            bool result = !want;
            for (std::size_t e = 0; e < m_->size(); ++e) {
                env[n.slot] = e;
                if (eval(n.kids[0], env) == want) {
                    result = want;
                    break;
                }
            }
            env[n.slot] = saved;
            return result;
        }
        }
        return false;
    }

    const FiniteStructure* m_;
    std::vector<std::string> slots_;
    std::vector<Node> nodes_;
    int root_ = 0;
    std::size_t max_width_ = 0;
    std::size_t width_ = 0;
};

/// M ⊨ f[env]. Every free variable of f must be bound by env.
inline bool evaluate(const FiniteStructure& m, const Formula& f, const std::map<std::string, std::size_t>& env) {
    std::vector<std::string> names;
    std::vector<std::size_t> values;
    for (const auto& [k, v] : env) {
        if (v >= m.size()) throw InputError("assignment to '" + k + "' lies outside the universe");
        names.push_back(k);
        values.push_back(v);
    }
    return Evaluator(m, f, names)(values);
}

/// All satisfying assignments to `vars`, in lexicographic order.
inline std::vector<Tuple> solutions(const FiniteStructure& m, const Formula& f, const std::vector<std::string>& vars) {
    Evaluator ev(m, f, vars);
    TupleCoder coder{m.size(), vars.size()};
    std::vector<Tuple> out;
    for (std::size_t code = 0, e = coder.extent(); code < e; ++code) {
        Tuple t = coder.decode(code);
        if (ev(t)) out.push_back(std::move(t));
    }
    return out;
}

/// The same solution set as a PointSet over universe^|vars|.
inline PointSet solution_set(const FiniteStructure& m, const Formula& f, const std::vector<std::string>& vars) {
    Evaluator ev(m, f, vars);
    TupleCoder coder{m.size(), vars.size()};
    PointSet s(coder.extent());
    for (std::size_t code = 0, e = coder.extent(); code < e; ++code)
        if (ev(coder.decode(code))) s.insert(code);
    return s;
}

} // namespace opdim
