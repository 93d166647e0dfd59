#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "opdim/context.hpp"
#include "opdim/dlo.hpp"
#include "opdim/error.hpp"
#include "opdim/formula.hpp"
#include "opdim/logic.hpp"
#include "opdim/patterns.hpp"

namespace opdim {

struct OrderDiagrams {
    std::vector<std::string> vars;
    std::vector<Rational> consts;
    std::vector<dlo::Diagram> diagrams;

    std::vector<Formula> formulas() const {
        std::vector<Formula> out;
        for (const auto& d : diagrams) out.push_back(dlo::diagram_formula(d, consts, vars));
        return out;
    }
};

/// Every complete diagram over the variables and the constants of f (plus
/// `extra`) that implies f.
inline OrderDiagrams order_diagrams(const Formula& f, const std::vector<std::string>& vars,
                                    const std::vector<Rational>& extra = {}) {
    std::vector<Rational> ks(extra.begin(), extra.end());
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    auto s = dlo::compile(f, vars, ks);
    return {vars, s.consts, s.cells};
}

enum class DimensionMethod { diagram, projection };

inline std::string to_string(DimensionMethod m) { return m == DimensionMethod::diagram ? "diagram" : "projection"; }

struct DimensionReport {
    bool empty = false;
    std::size_t dim = 0;
    DimensionMethod method = DimensionMethod::diagram;
    std::vector<std::size_t> coords;                   // the projection
    std::vector<std::pair<Rational, Rational>> box;    // open box inside the projection
    std::optional<dlo::Diagram> cell;                  // a cell of largest dimension

    std::string value() const { return empty ? "empty" : std::to_string(dim); }
};

namespace detail {

inline bool open_cell(const dlo::Diagram& d) {
    std::set<std::uint32_t> seen;
    for (auto c : d)
        if (dlo::slot_of(c) % 2 == 1 || !seen.insert(c).second) return false;
    return true;
}

/// An open box around a point of an open cell, staying clear of the
/// constants and of the other coordinates.
inline std::vector<std::pair<Rational, Rational>> box_in(const dlo::Diagram& d, const std::vector<Rational>& consts) {
    auto p = dlo::representative(d, consts);
    std::vector<Rational> marks(consts);
    marks.insert(marks.end(), p.begin(), p.end());
    std::sort(marks.begin(), marks.end());
    Rational eps(1);
    for (std::size_t i = 0; i + 1 < marks.size(); ++i)
        if (marks[i + 1] != marks[i]) eps = std::min(eps, (marks[i + 1] - marks[i]) / Rational(3));
    std::vector<std::pair<Rational, Rational>> out;
    for (const auto& v : p) out.push_back({v - eps, v + eps});
    return out;
}

} // namespace detail

/// Diagram method: the largest number of distinct coordinate values outside
/// the constants over the cells of f. Projection method: the largest n such
/// that some projection onto n coordinates contains an open box.
inline DimensionReport dimension(const Formula& f, const std::vector<std::string>& vars,
                                 DimensionMethod method = DimensionMethod::diagram) {
    auto s = dlo::compile(f, vars);
    DimensionReport r;
    r.method = method;
    if (s.empty()) {
        r.empty = true;
        return r;
    }
    const std::size_t m = vars.size();
    if (method == DimensionMethod::diagram) {
        for (const auto& d : s.cells) {
            std::size_t k = dlo::free_classes(d);
            if (!r.cell || k > r.dim) {
                r.dim = k;
                r.cell = d;
            }
        }
        return r;
    }
    for (std::size_t n = m + 1; n-- > 0;) {
        // Subsets of size n in lexicographic order.
        std::vector<std::size_t> keep(n);
        std::iota(keep.begin(), keep.end(), 0);
        while (true) {
            auto proj = dlo::project(s, keep);
            for (const auto& d : proj.cells)
                if (detail::open_cell(d)) {
                    r.dim = n;
                    r.coords = keep;
                    r.cell = d;
                    r.box = detail::box_in(d, proj.consts);
                    return r;
                }
            std::size_t i = n;
            while (i > 0 && keep[i - 1] == m - n + i - 1) --i;
            if (i == 0) break;
            ++keep[i - 1];
            for (std::size_t j = i; j < n; ++j) keep[j] = keep[j - 1] + 1;
        }
    }
    return r;
}

/// Depth-dim IRD pattern in f: ψ_i(x; y) says the i-th projected coordinate
/// of x is below that of y, and row i steps along the i-th axis through the
/// open box found by the projection method.
inline std::optional<Pattern<DloContext>> ird_witness_from_dim(const Formula& f, const std::vector<std::string>& vars,
                                                               std::size_t length = default_pattern_length) {
    auto rep = dimension(f, vars, DimensionMethod::projection);
    if (rep.empty || rep.dim == 0) return std::nullopt;
    std::set<std::string> taken(vars.begin(), vars.end());
    collect_variable_names(f, taken);
    std::vector<std::string> ys;
    for (const auto& v : vars) {
        ys.push_back(detail::fresh_name("y_" + v, taken));
        taken.insert(ys.back());
    }
    std::vector<Rational> center;
    for (const auto& [lo, hi] : rep.box) center.push_back((lo + hi) / Rational(2));

    Pattern<DloContext> p;
    p.length = length;
    for (std::size_t i = 0; i < rep.dim; ++i) {
        std::size_t c = rep.coords[i];
        p.formulas.push_back(make_partitioned(less(Term::var(vars[c]), Term::var(ys[c])), vars, ys));
        std::vector<Rational> base(vars.size(), center.empty() ? Rational(0) : center[0]);
        for (std::size_t k = 0; k < rep.dim; ++k) base[rep.coords[k]] = center[k];
        std::vector<std::vector<Rational>> row;
        const auto& [lo, hi] = rep.box[i];
        for (std::size_t j = 0; j < length; ++j) {
            auto b = base;
            b[c] = lo + (hi - lo) * Rational(static_cast<long long>(j + 1), static_cast<long long>(length + 1));
            row.push_back(std::move(b));
        }
        p.witnesses.push_back(std::move(row));
    }
    return p;
}

struct Product {
    Formula formula;
    std::vector<std::string> vars;
};

/// X × Y on disjoint variables; Y's variables are renamed when they clash.
inline Product product(const Formula& f, const std::vector<std::string>& fv, const Formula& g,
                       const std::vector<std::string>& gv) {
    std::set<std::string> taken(fv.begin(), fv.end());
    collect_variable_names(f, taken);
    std::vector<std::string> renamed;
    for (const auto& v : gv) {
        renamed.push_back(taken.count(v) ? detail::fresh_name(v + "_", taken) : v);
        taken.insert(renamed.back());
    }
    Product p;
    p.vars = fv;
    p.vars.insert(p.vars.end(), renamed.begin(), renamed.end());
    p.formula = conj({f, rename_variables(g, gv, renamed)});
    return p;
}

/// Coordinate comparisons x_i < y, y < x_i and x_i = y, the pool used to
/// look for patterns in a set of points.
inline FormulaSet coordinate_pool(const std::vector<std::string>& vars, const std::string& param = "y") {
    std::set<std::string> taken(vars.begin(), vars.end());
    std::string y = detail::fresh_name(param, taken);
    FormulaSet pool;
    for (const auto& v : vars) {
        pool.push_back(make_partitioned(less(Term::var(v), Term::var(y)), vars, {y}));
        pool.push_back(make_partitioned(less(Term::var(y), Term::var(v)), vars, {y}));
        pool.push_back(make_partitioned(equal(Term::var(v), Term::var(y)), vars, {y}));
    }
    return pool;
}

} // namespace opdim
