#pragma once

#include <optional>
#include <string>
#include <vector>

#include "opdim/dlo.hpp"
#include "opdim/error.hpp"
#include "opdim/eval.hpp"
#include "opdim/formula.hpp"
#include "opdim/logic.hpp"
#include "opdim/pointset.hpp"
#include "opdim/structure.hpp"

namespace opdim {

// A context is where types live and instances are taken: a finite structure,
// or the symbolic dense order. Both expose the same interface so ranks and
// patterns are written once.

/// Sets are realization sets inside universe^arity; parameters range over
/// every tuple of the universe.
class FiniteContext {
public:
    using Set = PointSet;
    using Param = Tuple;
    using Key = PointSet;
    using KeyHash = PointSetHash;
    using Region = PointSet;
    using Lit = PointSet;

    FiniteContext(const FiniteStructure& m, std::size_t arity) : m_(&m), arity_(arity) {}

    const FiniteStructure& structure() const { return *m_; }
    std::size_t arity() const { return arity_; }
    bool symbolic() const { return false; }

    Set full() const { return PointSet(TupleCoder{m_->size(), arity_}.extent(), true); }
    Set define(const Formula& f, const std::vector<std::string>& vars) const {
        if (vars.size() != arity_) throw InputError("type has the wrong number of variables");
        return solution_set(*m_, f, vars);
    }
    Set from_tuples(const std::vector<Tuple>& ts) const {
        TupleCoder c{m_->size(), arity_};
        PointSet s(c.extent());
        for (const auto& t : ts) {
            if (t.size() != arity_) throw InputError("tuple of the wrong arity");
            for (auto e : t)
                if (e >= m_->size()) throw InputError("tuple element outside the universe");
            s.insert(c.encode(t));
        }
        return s;
    }

    Set instance(const PartitionedFormula& phi, const Param& b) const {
        check_arity(phi);
        return instance_set(*m_, phi, b);
    }

    bool empty(const Set& s) const { return s.empty(); }
    Set meet(const Set& a, const Set& b) const { return a & b; }
    Set minus(const Set& a, const Set& b) const { return a - b; }
    bool subset(const Set& a, const Set& b) const { return a.subset_of(b); }

    std::vector<Rational> pinned(const FormulaSet&) const { return {}; }
    Key key(const Set& s, const std::vector<Rational>&) const { return s; }

    /// Candidate parameters for instances of phi; `simultaneous` instances may
    /// be chosen together. Finite: every tuple.
    std::vector<Param> params(const Set&, const PartitionedFormula& phi, std::size_t,
                              const std::vector<Param>& = {}) const {
        TupleCoder c{m_->size(), phi.param_arity()};
        std::vector<Param> out;
        for (std::size_t code = 0, e = c.extent(); code < e; ++code) out.push_back(c.decode(code));
        return out;
    }

    std::vector<std::string> show_param(const Param& b) const {
        std::vector<std::string> out;
        for (auto e : b) out.push_back(m_->element_name(e));
        return out;
    }
    std::vector<std::string> show_point(const Set& s) const {
        auto ms = s.members();
        if (ms.empty()) return {};
        return show_param(TupleCoder{m_->size(), arity_}.decode(ms.front()));
    }
    std::vector<std::vector<std::string>> show_set(const Set& s) const {
        std::vector<std::vector<std::string>> out;
        TupleCoder c{m_->size(), arity_};
        for (auto code : s.members()) out.push_back(show_param(c.decode(code)));
        return out;
    }

    Param parse_param(const std::vector<std::string>& names) const {
        Param b;
        for (const auto& n : names) b.push_back(m_->element_index(n));
        return b;
    }

    // Pattern interface: a literal is an instance set, a region a base set.
    Lit literal(const PartitionedFormula& phi, const Param& b) const { return instance(phi, b); }
    Region region(const Set& s) const { return s; }
    bool consistent(const Region& base, const std::vector<std::pair<const Lit*, bool>>& lits) const {
        PointSet cur = base;
        for (const auto& [l, positive] : lits) {
            if (positive) cur &= *l;
            else cur -= *l;
            if (cur.empty()) return false;
        }
        return !cur.empty();
    }

    /// Default witness grid for pattern searches: every element.
    std::vector<Param> witness_grid(const PartitionedFormula& phi, const Region&) const {
        return params(full(), phi, 1);
    }

private:
    void check_arity(const PartitionedFormula& phi) const {
        if (phi.object_arity() != arity_) throw InputError("formula has the wrong number of object variables");
    }

    const FiniteStructure* m_;
    std::size_t arity_;
};

/// The dense order (Q,<): sets are cell sets over named coordinates,
/// parameters are rational tuples drawn from grids fine enough to realize
/// every order type over the relevant constants.
class DloContext {
public:
    using Set = dlo::CellSet;
    using Param = std::vector<Rational>;
    using Key = std::string;
    using KeyHash = std::hash<std::string>;
    using Region = Formula;
    using Lit = Formula;

    explicit DloContext(std::vector<std::string> vars) : vars_(std::move(vars)) {}

    const std::vector<std::string>& vars() const { return vars_; }
    std::size_t arity() const { return vars_.size(); }
    bool symbolic() const { return true; }

    Set full() const { return dlo::full_set(arity()); }
    Set define(const Formula& f, const std::vector<std::string>& vars) const {
        if (vars.size() != arity()) throw InputError("type has the wrong number of variables");
        Formula g = rename_variables(f, vars, vars_);
        return dlo::simplify(dlo::compile(g, vars_));
    }
    Set define(const Formula& f) const { return define(f, vars_); }

    Set instance(const PartitionedFormula& phi, const Param& b) const {
        return dlo::simplify(dlo::compile(literal(phi, b), vars_));
    }

    bool empty(const Set& s) const { return s.empty(); }
    Set meet(const Set& a, const Set& b) const { return dlo::meet(a, b); }
    Set minus(const Set& a, const Set& b) const { return dlo::minus(a, b); }
    bool subset(const Set& a, const Set& b) const { return dlo::subset_of(a, b); }

    std::vector<Rational> pinned(const FormulaSet& delta) const {
        std::set<Rational> ks;
        for (const auto& phi : delta) collect_numbers(phi.body, ks);
        return {ks.begin(), ks.end()};
    }
    Key key(const Set& s, const std::vector<Rational>& pinned) const { return dlo::shape_key(s, pinned); }

    /// Parameters over a grid with enough points in every gap of the
    /// constants of s, of phi and of the already chosen parameters.
    std::vector<Param> params(const Set& s, const PartitionedFormula& phi, std::size_t simultaneous,
                              const std::vector<Param>& used = {}) const {
        std::set<Rational> ks(s.consts.begin(), s.consts.end());
        collect_numbers(phi.body, ks);
        for (const auto& u : used) ks.insert(u.begin(), u.end());
        std::vector<Rational> g = dlo::grid({ks.begin(), ks.end()}, std::max<std::size_t>(1, simultaneous * phi.param_arity()));
        return tuples_over(g, phi.param_arity());
    }

    std::vector<std::string> show_param(const Param& b) const {
        std::vector<std::string> out;
        for (const auto& v : b) out.push_back(to_string(v));
        return out;
    }
    std::vector<std::string> show_point(const Set& s) const {
        if (s.empty()) return {};
        return show_param(dlo::representative(s.cells.front(), s.consts));
    }

    Param parse_param(const std::vector<std::string>& texts) const {
        Param b;
        for (const auto& t : texts) b.push_back(parse_rational(t));
        return b;
    }

    Lit literal(const PartitionedFormula& phi, const Param& b) const {
        if (phi.object_vars != vars_) {
            PartitionedFormula renamed = phi;
            renamed.body = rename_variables(phi.body, phi.object_vars, vars_);
            renamed.object_vars = vars_;
            return literal(renamed, b);
        }
        std::vector<Term> ts;
        for (const auto& v : b) ts.push_back(Term::number(v));
        return dlo::qe_dlo(instantiate(phi, ts));
    }
    Region region(const Set& s) const { return dlo::to_formula(s, vars_); }
    Region region(const Formula& f) const { return dlo::qe_dlo(f); }
    bool consistent(const Region& base, const std::vector<std::pair<const Lit*, bool>>& lits) const {
        std::vector<Formula> fs{base};
        for (const auto& [l, positive] : lits) fs.push_back(positive ? *l : negate(*l));
        return dlo::satisfiable_all(fs);
    }

    /// Default witness grid: constants, midpoints and one point past each end.
    std::vector<Param> witness_grid(const PartitionedFormula& phi, const Region& base) const {
        std::set<Rational> ks;
        collect_numbers(phi.body, ks);
        collect_numbers(base, ks);
        return tuples_over(dlo::standard_grid({ks.begin(), ks.end()}), phi.param_arity());
    }

    static std::vector<Param> tuples_over(const std::vector<Rational>& g, std::size_t r) {
        std::vector<Param> out;
        TupleCoder c{g.size(), r};
        if (g.empty() && r > 0) return out;
        for (std::size_t code = 0, e = c.extent(); code < e; ++code) {
            Param p;
            for (auto i : c.decode(code)) p.push_back(g[i]);
            out.push_back(std::move(p));
        }
        return out;
    }

private:
    std::vector<std::string> vars_;
};

} // namespace opdim
