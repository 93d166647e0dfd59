#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "opdim/context.hpp"
#include "opdim/dlo.hpp"
#include "opdim/error.hpp"
#include "opdim/eval.hpp"
#include "opdim/formula.hpp"
#include "opdim/logic.hpp"

namespace opdim {

/// A finite pattern: row i is the formula ψ_i with witnesses b_{0,i} ...
/// b_{α-1,i}, stored as witnesses[i][j].
template <class Ctx>
struct Pattern {
    std::vector<PartitionedFormula> formulas;
    std::vector<std::vector<typename Ctx::Param>> witnesses;
    std::size_t length = 0;

    std::size_t depth() const { return formulas.size(); }
};

enum class PatternKind { ird, ict };

/// One index per row.
using Selector = std::vector<std::size_t>;

struct PatternCheck {
    bool ok = true;
    std::optional<Selector> failing;
    std::size_t selectors_checked = 0;
};

inline constexpr std::size_t default_selector_cap = 1000000;
inline constexpr std::size_t default_pattern_length = 3;
inline constexpr std::size_t default_search_budget = 2000000;

namespace detail {

template <class Ctx>
void check_shape(const Pattern<Ctx>& p) {
    if (p.witnesses.size() != p.formulas.size()) throw InputError("pattern needs one witness row per formula");
    for (std::size_t i = 0; i < p.depth(); ++i) {
        if (p.witnesses[i].size() != p.length) throw InputError("witness row of the wrong length");
        for (const auto& b : p.witnesses[i])
            if (b.size() != p.formulas[i].param_arity()) throw InputError("witness of the wrong sort");
    }
}

inline std::size_t selector_space(std::size_t length, std::size_t depth, std::size_t cap) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < depth; ++i) {
        if (length != 0 && total > cap / length) throw BudgetExceeded("selector space exceeds " + std::to_string(cap));
        total *= length;
    }
    if (total > cap) throw BudgetExceeded("selector space exceeds " + std::to_string(cap));
    return total;
}

/// The sign of ψ_i(x, b_{j,i}) demanded by the selector value f(i).
inline bool demanded(PatternKind kind, std::size_t j, std::size_t f) {
    return kind == PatternKind::ird ? j >= f : j == f;
}

/// Runs over all selectors of a literal table lits[i][j].
template <class Ctx>
PatternCheck check_table(const Ctx& ctx, const typename Ctx::Region& base,
                         const std::vector<std::vector<typename Ctx::Lit>>& lits, std::size_t length,
                         PatternKind kind, std::size_t cap, std::size_t* budget = nullptr) {
    std::size_t depth = lits.size();
    std::size_t total = selector_space(length, depth, cap);
    PatternCheck out;
    Selector f(depth, 0);
    std::vector<std::pair<const typename Ctx::Lit*, bool>> type;
    for (std::size_t s = 0; s < total; ++s) {
        type.clear();
        for (std::size_t i = 0; i < depth; ++i)
            for (std::size_t j = 0; j < length; ++j) type.push_back({&lits[i][j], demanded(kind, j, f[i])});
        if (budget) {
            if (*budget == 0) throw BudgetExceeded("pattern search budget exhausted");
            --*budget;
        }
        ++out.selectors_checked;
        if (!ctx.consistent(base, type)) {
            out.ok = false;
            out.failing = f;
            return out;
        }
        for (std::size_t i = depth; i > 0; --i) {
            if (++f[i - 1] < length) break;
            f[i - 1] = 0;
        }
    }
    return out;
}

template <class Ctx>
std::vector<std::vector<typename Ctx::Lit>> literal_table(const Ctx& ctx, const Pattern<Ctx>& p) {
    std::vector<std::vector<typename Ctx::Lit>> lits(p.depth());
    for (std::size_t i = 0; i < p.depth(); ++i)
        for (const auto& b : p.witnesses[i]) lits[i].push_back(ctx.literal(p.formulas[i], b));
    return lits;
}

} // namespace detail

/// For every f : n -> α, the type {¬ψ_i(x, b_{j,i}) : j < f(i)} ∪
/// {ψ_i(x, b_{j,i}) : f(i) <= j} is consistent with the base.
template <class Ctx>
PatternCheck check_ird(const Ctx& ctx, const typename Ctx::Region& base, const Pattern<Ctx>& p,
                       std::size_t cap = default_selector_cap) {
    detail::check_shape(p);
    return detail::check_table(ctx, base, detail::literal_table(ctx, p), p.length, PatternKind::ird, cap);
}

/// For every f : n -> α, the type {ψ_i(x, b_{f(i),i})} ∪ {¬ψ_i(x, b_{j,i}) :
/// j != f(i)} is consistent with the base.
template <class Ctx>
PatternCheck check_ict(const Ctx& ctx, const typename Ctx::Region& base, const Pattern<Ctx>& p,
                       std::size_t cap = default_selector_cap) {
    detail::check_shape(p);
    return detail::check_table(ctx, base, detail::literal_table(ctx, p), p.length, PatternKind::ict, cap);
}

/// φ_i(x; y_0, y_1) = ¬[ψ_i(x, y_0) <-> ψ_i(x, y_1)], with c_{j,i} the
/// concatenation of b_{2j,i} and b_{2j+1,i}.
inline PartitionedFormula differ_formula(const PartitionedFormula& psi) {
    std::set<std::string> taken(psi.object_vars.begin(), psi.object_vars.end());
    collect_variable_names(psi.body, taken);
    std::vector<std::string> first, second;
    for (const auto& y : psi.param_vars) {
        first.push_back(detail::fresh_name(y + "_0", taken));
        taken.insert(first.back());
    }
    for (const auto& y : psi.param_vars) {
        second.push_back(detail::fresh_name(y + "_1", taken));
        taken.insert(second.back());
    }
    Formula body = negate(iff(rename_variables(psi.body, psi.param_vars, first),
                              rename_variables(psi.body, psi.param_vars, second)));
    std::vector<std::string> params = first;
    params.insert(params.end(), second.begin(), second.end());
    return make_partitioned(body, psi.object_vars, params);
}

template <class Ctx>
Pattern<Ctx> ird_to_ict(const Pattern<Ctx>& p) {
    detail::check_shape(p);
    if (p.length % 2 != 0) throw InputError("the IRD pattern must have even length");
    Pattern<Ctx> out;
    out.length = p.length / 2;
    for (std::size_t i = 0; i < p.depth(); ++i) {
        out.formulas.push_back(differ_formula(p.formulas[i]));
        std::vector<typename Ctx::Param> row;
        for (std::size_t j = 0; j < out.length; ++j) {
            auto c = p.witnesses[i][2 * j];
            c.insert(c.end(), p.witnesses[i][2 * j + 1].begin(), p.witnesses[i][2 * j + 1].end());
            row.push_back(std::move(c));
        }
        out.witnesses.push_back(std::move(row));
    }
    return out;
}

template <class Ctx>
struct PatternSearch {
    std::optional<Pattern<Ctx>> pattern;
    bool exhaustive = true; // meaningful when no pattern was found
    std::size_t checks = 0;
};

struct SearchOptions {
    std::size_t length = default_pattern_length;
    std::size_t budget = default_search_budget;
    std::size_t selector_cap = default_selector_cap;
};

namespace detail {

/// Rows are single-formula patterns; they are grown witness by witness, and
/// every prefix of a good row is itself a good row of shorter length.
template <class Ctx>
class PatternSearcher {
public:
    using Param = typename Ctx::Param;
    using Lit = typename Ctx::Lit;

    PatternSearcher(const Ctx& ctx, typename Ctx::Region base, const FormulaSet& pool, PatternKind kind,
                    const std::optional<std::vector<Param>>& grid, SearchOptions opt)
        : ctx_(ctx), base_(std::move(base)), pool_(pool), kind_(kind), opt_(opt), budget_(opt.budget) {
        for (const auto& phi : pool_) {
            if (grid) {
                for (const auto& b : *grid)
                    if (b.size() != phi.param_arity()) throw InputError("grid tuple of the wrong sort for a pool formula");
                grids_.push_back(*grid);
            } else {
                grids_.push_back(ctx_.witness_grid(phi, base_));
            }
            lits_.emplace_back();
            for (const auto& b : grids_.back()) lits_.back().push_back(ctx_.literal(phi, b));
        }
    }

    PatternSearch<Ctx> run(std::size_t depth) {
        PatternSearch<Ctx> out;
        try {
            if (depth == 0) {
                Pattern<Ctx> p;
                p.length = opt_.length;
                if (check_table(ctx_, base_, {}, opt_.length, kind_, opt_.selector_cap, &budget_).ok) out.pattern = p;
            } else {
                build_rows();
                std::vector<std::size_t> chosen;
                if (combine(depth, 0, chosen)) out.pattern = assemble(chosen);
            }
        } catch (const BudgetExceeded&) {
            out.exhaustive = false;
            out.pattern.reset();
        }
        out.checks = opt_.budget - budget_;
        return out;
    }

private:
    struct Row {
        std::size_t formula;
        std::vector<std::size_t> witnesses; // indices into the formula's grid
    };

    std::vector<std::vector<Lit>> table(const std::vector<std::size_t>& rows) const {
        std::vector<std::vector<Lit>> t;
        for (auto r : rows) {
            t.emplace_back();
            for (auto w : rows_[r].witnesses) t.back().push_back(lits_[rows_[r].formula][w]);
        }
        return t;
    }

    void build_rows() {
        for (std::size_t fi = 0; fi < pool_.size(); ++fi) {
            std::vector<std::size_t> seq;
            grow(fi, seq);
        }
    }

    void grow(std::size_t fi, std::vector<std::size_t>& seq) {
        if (seq.size() == opt_.length) {
            rows_.push_back({fi, seq});
            return;
        }
        // ICT rows are unchanged by permuting their witnesses.
        std::size_t from = kind_ == PatternKind::ict && !seq.empty() ? seq.back() + 1 : 0;
        for (std::size_t w = from; w < grids_[fi].size(); ++w) {
            seq.push_back(w);
            std::vector<std::vector<Lit>> t(1);
            for (auto s : seq) t[0].push_back(lits_[fi][s]);
            if (check_table(ctx_, base_, t, seq.size(), kind_, opt_.selector_cap, &budget_).ok) grow(fi, seq);
            seq.pop_back();
        }
    }

    bool combine(std::size_t depth, std::size_t from, std::vector<std::size_t>& chosen) {
        if (chosen.size() == depth) return true;
        for (std::size_t r = from; r < rows_.size(); ++r) {
            bool fits = true;
            for (std::size_t c = 0; c < chosen.size() && fits; ++c) fits = compatible(chosen[c], r);
            if (!fits) continue;
            chosen.push_back(r);
            bool whole = chosen.size() <= 2 ||
                         check_table(ctx_, base_, table(chosen), opt_.length, kind_, opt_.selector_cap, &budget_).ok;
            if (whole && combine(depth, r + 1, chosen)) return true;
            chosen.pop_back();
        }
        return false;
    }

    // Any two rows of a pattern form a pattern themselves.
    bool compatible(std::size_t a, std::size_t b) {
        auto key = std::make_pair(a, b);
        auto it = pairs_.find(key);
        if (it != pairs_.end()) return it->second;
        bool ok = check_table(ctx_, base_, table({a, b}), opt_.length, kind_, opt_.selector_cap, &budget_).ok;
        pairs_.emplace(key, ok);
        return ok;
    }

    Pattern<Ctx> assemble(const std::vector<std::size_t>& chosen) const {
        Pattern<Ctx> p;
        p.length = opt_.length;
        for (auto r : chosen) {
            p.formulas.push_back(pool_[rows_[r].formula]);
            std::vector<Param> row;
            for (auto w : rows_[r].witnesses) row.push_back(grids_[rows_[r].formula][w]);
            p.witnesses.push_back(std::move(row));
        }
        return p;
    }

    const Ctx& ctx_;
    typename Ctx::Region base_;
    FormulaSet pool_;
    PatternKind kind_;
    SearchOptions opt_;
    std::size_t budget_;
    std::vector<std::vector<Param>> grids_;
    std::vector<std::vector<Lit>> lits_;
    std::vector<Row> rows_;
    std::map<std::pair<std::size_t, std::size_t>, bool> pairs_;
};

} // namespace detail

/// Looks for an IRD pattern of the given depth with witnesses from the grid
/// (by default the context's witness grid for each formula). Without a
/// pattern, `exhaustive` tells a finished search from one cut by the budget.
template <class Ctx>
PatternSearch<Ctx> search_ird(const Ctx& ctx, const typename Ctx::Region& base, const FormulaSet& pool,
                              std::size_t depth, SearchOptions opt = {},
                              const std::optional<std::vector<typename Ctx::Param>>& grid = std::nullopt) {
    return detail::PatternSearcher<Ctx>(ctx, base, pool, PatternKind::ird, grid, opt).run(depth);
}

template <class Ctx>
PatternSearch<Ctx> search_ict(const Ctx& ctx, const typename Ctx::Region& base, const FormulaSet& pool,
                              std::size_t depth, SearchOptions opt = {},
                              const std::optional<std::vector<typename Ctx::Param>>& grid = std::nullopt) {
    return detail::PatternSearcher<Ctx>(ctx, base, pool, PatternKind::ict, grid, opt).run(depth);
}

/// The largest depth up to cap with an ICT pattern of the configured length.
template <class Ctx>
std::size_t dp_rank_lower(const Ctx& ctx, const typename Ctx::Region& base, const FormulaSet& pool, std::size_t cap,
                          SearchOptions opt = {},
                          const std::optional<std::vector<typename Ctx::Param>>& grid = std::nullopt) {
    std::size_t best = 0;
    for (std::size_t d = 1; d <= cap; ++d) {
        if (!search_ict(ctx, base, pool, d, opt, grid).pattern) break;
        best = d;
    }
    return best;
}

/// Maximal constant runs of a finite sequence; block k is [begin, end).
struct ConvexPartition {
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    std::vector<bool> values;

    std::size_t size() const { return blocks.size(); }
};

inline ConvexPartition alternation(const std::vector<bool>& values) {
    if (values.empty()) throw InputError("alternation needs a nonempty sequence");
    ConvexPartition p;
    std::size_t start = 0;
    for (std::size_t q = 1; q <= values.size(); ++q)
        if (q == values.size() || values[q] != values[start]) {
            p.blocks.push_back({start, q});
            p.values.push_back(values[start]);
            start = q;
        }
    return p;
}

namespace detail {

inline bool holds_at(const FiniteContext& ctx, const PartitionedFormula& phi, const Tuple& a, const Tuple& b) {
    std::map<std::string, std::size_t> env;
    for (std::size_t i = 0; i < a.size(); ++i) env[phi.object_vars[i]] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) env[phi.param_vars[i]] = b[i];
    return evaluate(ctx.structure(), phi.body, env);
}

inline bool holds_at(const DloContext&, const PartitionedFormula& phi, const std::vector<Rational>& a,
                     const std::vector<Rational>& b) {
    dlo::Env env;
    for (std::size_t i = 0; i < a.size(); ++i) env[phi.object_vars[i]] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) env[phi.param_vars[i]] = b[i];
    return dlo::holds(phi.body, env);
}

} // namespace detail

template <class Ctx>
struct AlternationPattern {
    std::vector<bool> values;
    ConvexPartition partition;
    std::optional<Pattern<Ctx>> pattern;
    bool verified = false;
};

/// Reads φ(a, b_q) along the sequence and, with m >= 2 blocks, builds a
/// depth-(m-1) IRD candidate: row i straddles the boundary between blocks i
/// and i+1 with `length` witnesses (half from the end of block i, the rest
/// from the start of block i+1), and ψ_i is φ or ¬φ so that ψ_i(a, -) is
/// false on block i. The candidate is returned only if check_ird accepts it.
template <class Ctx>
AlternationPattern<Ctx> ird_from_alternation(const Ctx& ctx, const typename Ctx::Region& base,
                                             const typename Ctx::Param& a, const PartitionedFormula& phi,
                                             const std::vector<typename Ctx::Param>& seq, std::size_t length = 2) {
    if (a.size() != phi.object_arity()) throw InputError("realization of the wrong arity");
    if (length == 0) throw InputError("pattern length must be positive");
    AlternationPattern<Ctx> out;
    for (const auto& b : seq) {
        if (b.size() != phi.param_arity()) throw InputError("sequence parameter of the wrong arity");
        out.values.push_back(detail::holds_at(ctx, phi, a, b));
    }
    out.partition = alternation(out.values);
    const auto& blocks = out.partition.blocks;
    if (blocks.size() < 2) return out;
    std::size_t head = length / 2, tail = length - head;
    for (const auto& [b, e] : blocks)
        if (e - b < std::max(head, tail)) return out;

    PartitionedFormula neg = phi;
    neg.body = negate(phi.body);
    Pattern<Ctx> p;
    p.length = length;
    for (std::size_t i = 0; i + 1 < blocks.size(); ++i) {
        p.formulas.push_back(out.partition.values[i] ? neg : phi);
        std::vector<typename Ctx::Param> row;
        for (std::size_t q = blocks[i].second - head; q < blocks[i].second; ++q) row.push_back(seq[q]);
        for (std::size_t q = blocks[i + 1].first; q < blocks[i + 1].first + tail; ++q) row.push_back(seq[q]);
        p.witnesses.push_back(std::move(row));
    }
    if (check_ird(ctx, base, p).ok) {
        out.pattern = std::move(p);
        out.verified = true;
    }
    return out;
}

} // namespace opdim
