#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "opdim/context.hpp"
#include "opdim/error.hpp"
#include "opdim/formula.hpp"

namespace opdim {

/// A rank truncated at `cap`: exact below it, "at least cap" otherwise.
struct RankValue {
    std::size_t value = 0;
    bool at_least_cap = false;
    std::size_t cap = 0;

    static RankValue truncate(std::size_t v, std::size_t cap) {
        return v >= cap ? RankValue{cap, true, cap} : RankValue{v, false, cap};
    }
    /// Position in the order 0 < 1 < ... < cap-1 < at_least_cap.
    std::size_t level() const { return at_least_cap ? cap : value; }
    bool at_least(std::size_t beta) const { return level() >= beta; }

    friend bool operator==(const RankValue&, const RankValue&) = default;
};

inline std::string to_string(const RankValue& r) {
    return r.at_least_cap ? ">=" + std::to_string(r.cap) : std::to_string(r.value);
}

template <class Ctx>
struct InstanceRef {
    std::size_t formula = 0;
    typename Ctx::Param param;

    friend bool operator<(const InstanceRef& a, const InstanceRef& b) {
        if (a.formula != b.formula) return a.formula < b.formula;
        return a.param < b.param;
    }
    friend bool operator==(const InstanceRef&, const InstanceRef&) = default;
};

/// One node of a rank witness: the instances that split the set and the
/// 2^n cells they cut out (cell σ takes φ_i positively iff bit i of σ is 1).
template <class Ctx>
struct RankWitness {
    typename Ctx::Set set;
    RankValue rank;
    std::vector<InstanceRef<Ctx>> instances;
    std::vector<RankWitness> cells;
};

namespace detail {

template <class Ctx>
class InstanceCache {
public:
    InstanceCache(const Ctx& ctx, const FormulaSet& delta) : ctx_(&ctx), delta_(&delta) {}

    const typename Ctx::Set& get(const InstanceRef<Ctx>& r) {
        auto it = cache_.find(r);
        if (it == cache_.end()) it = cache_.emplace(r, ctx_->instance((*delta_)[r.formula], r.param)).first;
        return it->second;
    }

private:
    const Ctx* ctx_;
    const FormulaSet* delta_;
    std::map<InstanceRef<Ctx>, typename Ctx::Set> cache_;
};

} // namespace detail

/// opR_n(S, Δ) by the defining recursion: S has rank >= α+1 iff n instances
/// cut S into 2^n cells that all have rank >= α. Memoized per set.
template <class Ctx>
class OpRankEngine {
public:
    using Set = typename Ctx::Set;

    OpRankEngine(const Ctx& ctx, FormulaSet delta, std::size_t n, std::size_t cap)
        : ctx_(&ctx), delta_(std::move(delta)), n_(n), cap_(cap), cache_(ctx, delta_), pinned_(ctx.pinned(delta_)) {
        if (n_ == 0) throw InputError("n must be at least 1");
        if (cap_ == 0) throw InputError("cap must be at least 1");
        if (delta_.empty()) throw InputError("the formula set is empty");
        for (const auto& phi : delta_)
            if (phi.object_arity() != ctx.arity()) throw InputError("formula has the wrong number of object variables");
    }

    RankValue rank(const Set& s) {
        if (ctx_->empty(s)) throw InconsistentType();
        return RankValue::truncate(level(s, cap_), cap_);
    }

    RankWitness<Ctx> witness(const Set& s, std::size_t depth) {
        RankWitness<Ctx> w{s, rank(s), {}, {}};
        if (depth == 0 || w.rank.level() == 0) return w;
        const Entry& e = memo_.at(ctx_->key(s, pinned_));
        w.instances = e.choice;
        for (const auto& cell : cut(s, e.choice)) w.cells.push_back(witness(cell, depth - 1));
        return w;
    }

    std::size_t memo_size() const { return memo_.size(); }
    const FormulaSet& delta() const { return delta_; }

private:
    struct Entry {
        std::size_t level = 0;
        bool exact = false;
        std::vector<InstanceRef<Ctx>> choice;
    };
    struct Split {
        InstanceRef<Ctx> ref;
        Set inside, outside;
    };

    std::vector<Set> cut(const Set& s, const std::vector<InstanceRef<Ctx>>& refs) {
        std::vector<Set> cells{s};
        for (const auto& r : refs) {
            const Set& inst = cache_.get(r);
            std::vector<Set> next;
            // Cell index bit i is the sign of instance i.
            for (const auto& c : cells) next.push_back(ctx_->minus(c, inst));
            for (const auto& c : cells) next.push_back(ctx_->meet(c, inst));
            cells = std::move(next);
        }
        return cells;
    }

    std::vector<Split> splits(const Set& s) {
        std::vector<Split> out;
        std::map<typename Ctx::Key, bool> seen;
        for (std::size_t f = 0; f < delta_.size(); ++f) {
            for (auto& b : ctx_->params(s, delta_[f], n_)) {
                InstanceRef<Ctx> r{f, std::move(b)};
                const Set& inst = cache_.get(r);
                Set in = ctx_->meet(s, inst);
                if (ctx_->empty(in)) continue;
                Set out_part = ctx_->minus(s, inst);
                if (ctx_->empty(out_part)) continue;
                if (!seen.emplace(ctx_->key(in, pinned_), true).second) continue;
                out.push_back({std::move(r), std::move(in), std::move(out_part)});
            }
        }
        return out;
    }

    // min(rank(s), bound). Children are asked with bound - 1, which keeps the
    // recursion finite even when a set is isomorphic to one of its cells.
    std::size_t level(const Set& s, std::size_t bound) {
        if (bound == 0) return 0;
        auto k = ctx_->key(s, pinned_);
        if (auto it = memo_.find(k); it != memo_.end()) {
            const Entry& e = it->second;
            if (e.exact || e.level >= bound) return std::min(e.level, bound);
        }
        Entry best;
        std::vector<Split> sp = splits(s);
        std::vector<std::size_t> idx(n_);
        // Strictly increasing n-combinations of distinct splits.
        std::function<void(std::size_t, std::size_t, std::vector<Set>&)> rec = [&](std::size_t depth, std::size_t from,
                                                                                  std::vector<Set>& cells) {
            if (best.level >= bound) return;
            if (depth == n_) {
                std::size_t worst = bound - 1;
                // A cell with no split caps the value at 1; look for one first.
                for (std::size_t i = 0; i < cells.size() && bound > 1; ++i)
                    if (level(cells[i], 1) == 0) {
                        worst = 0;
                        break;
                    }
                for (const auto& c : cells) {
                    if (worst + 1 <= best.level) return;
                    worst = std::min(worst, level(c, worst));
                }
                if (worst + 1 > best.level) {
                    best.level = worst + 1;
                    best.choice.clear();
                    for (std::size_t i = 0; i < n_; ++i) best.choice.push_back(sp[idx[i]].ref);
                }
                return;
            }
            for (std::size_t i = from; i < sp.size(); ++i) {
                idx[depth] = i;
                std::vector<Set> next;
                bool ok = true;
                if (depth == 0) {
                    next = {sp[i].outside, sp[i].inside};
                } else {
                    const Set& inst = cache_.get(sp[i].ref);
                    for (const auto& c : cells) {
                        next.push_back(ctx_->minus(c, inst));
                        if (ctx_->empty(next.back())) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok)
                        for (const auto& c : cells) {
                            next.push_back(ctx_->meet(c, inst));
                            if (ctx_->empty(next.back())) {
                                ok = false;
                                break;
                            }
                        }
                }
                if (ok) rec(depth + 1, i + 1, next);
                if (best.level >= bound) return;
            }
        };
        std::vector<Set> start{s};
        rec(0, 0, start);
        best.exact = best.level < bound;
        std::size_t result = best.level;
        auto& slot = memo_[k];
        if (best.exact || best.level >= slot.level) slot = std::move(best);
        return result;
    }

    const Ctx* ctx_;
    FormulaSet delta_;
    std::size_t n_, cap_;
    detail::InstanceCache<Ctx> cache_;
    std::vector<Rational> pinned_;
    std::unordered_map<typename Ctx::Key, Entry, typename Ctx::KeyHash> memo_;
};

template <class Ctx>
RankValue op_rank(const Ctx& ctx, const typename Ctx::Set& s, const FormulaSet& delta, std::size_t n, std::size_t cap) {
    return OpRankEngine<Ctx>(ctx, delta, n, cap).rank(s);
}

/// Shelah's 2-rank R(S, Δ, 2), by its own recursion: R >= α+1 iff some
/// instance splits S into two parts of rank >= α each.
template <class Ctx>
class ShelahRankEngine {
public:
    using Set = typename Ctx::Set;

    ShelahRankEngine(const Ctx& ctx, FormulaSet delta, std::size_t cap)
        : ctx_(&ctx), delta_(std::move(delta)), cap_(cap), cache_(ctx, delta_), pinned_(ctx.pinned(delta_)) {
        if (cap_ == 0) throw InputError("cap must be at least 1");
        if (delta_.empty()) throw InputError("the formula set is empty");
    }

    RankValue rank(const Set& s) {
        if (ctx_->empty(s)) throw InconsistentType();
        std::size_t r = 0;
        while (r < cap_ && at_least(s, r + 1)) ++r;
        return RankValue::truncate(r, cap_);
    }

private:
    bool at_least(const Set& s, std::size_t alpha) {
        if (ctx_->empty(s)) return false;
        if (alpha == 0) return true;
        auto key = std::make_pair(ctx_->key(s, pinned_), alpha);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        bool found = false;
        for (std::size_t f = 0; f < delta_.size() && !found; ++f) {
            for (auto& b : ctx_->params(s, delta_[f], 1)) {
                const Set& inst = cache_.get({f, std::move(b)});
                if (at_least(ctx_->meet(s, inst), alpha - 1) && at_least(ctx_->minus(s, inst), alpha - 1)) {
                    found = true;
                    break;
                }
            }
        }
        memo_[key] = found;
        return found;
    }

    const Ctx* ctx_;
    FormulaSet delta_;
    std::size_t cap_;
    detail::InstanceCache<Ctx> cache_;
    std::vector<Rational> pinned_;
    std::map<std::pair<typename Ctx::Key, std::size_t>, bool> memo_;
};

template <class Ctx>
RankValue shelah_rank2(const Ctx& ctx, const typename Ctx::Set& s, const FormulaSet& delta, std::size_t cap) {
    return ShelahRankEngine<Ctx>(ctx, delta, cap).rank(s);
}

/// A satisfying assignment of Γ_{n,β}: the instances chosen at every
/// prefix τ ∈ (2^n)^{<β} and a realization a_σ for every σ ∈ (2^n)^β.
/// Prefixes are listed as digit strings in base 2^n.
template <class Ctx>
struct GammaWitness {
    std::map<std::vector<std::size_t>, std::vector<InstanceRef<Ctx>>> nodes;
    std::map<std::vector<std::size_t>, std::vector<std::string>> leaves;
};

template <class Ctx>
struct GammaResult {
    bool consistent = false;
    GammaWitness<Ctx> witness;
};

inline constexpr std::size_t default_gamma_leaf_budget = 4096;

/// Satisfiability of Γ_{n,β}(S, Δ) inside the context, by AND-OR backtracking
/// over the instances at each prefix. A branch is the list of signed literals
/// collected along it; a leaf asks for one realization in S of its branch.
template <class Ctx>
class GammaSolver {
public:
    using Set = typename Ctx::Set;
    using Param = typename Ctx::Param;

    GammaSolver(const Ctx& ctx, const Set& s, FormulaSet delta, std::size_t n, std::size_t beta,
                std::size_t leaf_budget = default_gamma_leaf_budget)
        : ctx_(&ctx), s_(s), delta_(std::move(delta)), n_(n), beta_(beta), region_(ctx.region(s)) {
        if (n_ == 0) throw InputError("n must be at least 1");
        if (delta_.empty()) throw InputError("the formula set is empty");
        double leaves = 1;
        for (std::size_t i = 0; i < beta_; ++i) leaves *= static_cast<double>(std::size_t{1} << n_);
        if (leaves > static_cast<double>(leaf_budget))
            throw BudgetExceeded("Gamma system with " + std::to_string(static_cast<long long>(leaves)) +
                                 " leaves exceeds the budget " + std::to_string(leaf_budget));
    }

    GammaResult<Ctx> solve() {
        GammaResult<Ctx> out;
        std::vector<Signed> branch;
        std::vector<Param> used;
        out.consistent = feasible(0, branch, used);
        if (out.consistent) {
            std::vector<std::size_t> prefix;
            collect(prefix, branch, used, out.witness);
        }
        return out;
    }

private:
    struct Signed {
        std::size_t lit;
        bool positive;
        friend bool operator<(const Signed& a, const Signed& b) {
            return a.lit != b.lit ? a.lit < b.lit : a.positive < b.positive;
        }
        friend bool operator==(const Signed&, const Signed&) = default;
    };
    using MemoKey = std::pair<std::size_t, std::vector<Signed>>;

    std::size_t lit_id(const InstanceRef<Ctx>& r) {
        auto it = ids_.find(r);
        if (it != ids_.end()) return it->second;
        refs_.push_back(r);
        lits_.push_back(ctx_->literal(delta_[r.formula], r.param));
        return ids_[r] = refs_.size() - 1;
    }

    bool realizable(const std::vector<Signed>& branch) const {
        std::vector<std::pair<const typename Ctx::Lit*, bool>> ls;
        for (const auto& s : branch) ls.emplace_back(&lits_[s.lit], s.positive);
        return ctx_->consistent(region_, ls);
    }

    std::vector<InstanceRef<Ctx>> candidates(const std::vector<Param>& used) {
        std::vector<InstanceRef<Ctx>> out;
        for (std::size_t f = 0; f < delta_.size(); ++f)
            for (auto& b : ctx_->params(s_, delta_[f], n_, used)) out.push_back({f, std::move(b)});
        return out;
    }

    static MemoKey key(std::size_t level, std::vector<Signed> branch) {
        std::sort(branch.begin(), branch.end());
        branch.erase(std::unique(branch.begin(), branch.end()), branch.end());
        return {level, std::move(branch)};
    }

    bool feasible(std::size_t level, const std::vector<Signed>& branch, const std::vector<Param>& used) {
        if (!realizable(branch)) return false;
        if (level == beta_) return true;
        MemoKey k = key(level, branch);
        if (auto it = memo_.find(k); it != memo_.end()) return it->second.has_value();
        std::optional<std::vector<std::size_t>> found;
        auto cands = candidates(used);
        std::vector<std::size_t> pick(n_);
        std::function<bool(std::size_t, std::size_t)> choose = [&](std::size_t i, std::size_t from) {
            if (i == n_) {
                std::vector<Param> u2 = used;
                std::vector<std::size_t> ids;
                for (auto p : pick) {
                    u2.push_back(cands[p].param);
                    ids.push_back(lit_id(cands[p]));
                }
                for (std::size_t sigma = 0; sigma < (std::size_t{1} << n_); ++sigma) {
                    std::vector<Signed> child = branch;
                    for (std::size_t j = 0; j < n_; ++j) child.push_back({ids[j], ((sigma >> j) & 1u) != 0});
                    if (!feasible(level + 1, child, u2)) return false;
                }
                found = ids;
                return true;
            }
            for (std::size_t c = from; c < cands.size(); ++c) {
                pick[i] = c;
                if (choose(i + 1, c + 1)) return true;
            }
            return false;
        };
        choose(0, 0);
        memo_[k] = found;
        return found.has_value();
    }

    void collect(std::vector<std::size_t>& prefix, const std::vector<Signed>& branch, std::vector<Param>& used,
                 GammaWitness<Ctx>& w) {
        if (prefix.size() == beta_) {
            w.leaves[prefix] = leaf_point(branch);
            return;
        }
        const auto& ids = *memo_.at(key(prefix.size(), branch));
        std::vector<InstanceRef<Ctx>> refs;
        for (auto id : ids) refs.push_back(refs_[id]);
        w.nodes[prefix] = refs;
        std::size_t mark = used.size();
        for (const auto& r : refs) used.push_back(r.param);
        for (std::size_t sigma = 0; sigma < (std::size_t{1} << n_); ++sigma) {
            std::vector<Signed> child = branch;
            for (std::size_t j = 0; j < n_; ++j) child.push_back({ids[j], ((sigma >> j) & 1u) != 0});
            prefix.push_back(sigma);
            collect(prefix, child, used, w);
            prefix.pop_back();
        }
        used.resize(mark);
    }

    std::vector<std::string> leaf_point(const std::vector<Signed>& branch) {
        Set cell = s_;
        for (const auto& sg : branch) {
            const Set inst = ctx_->instance(delta_[refs_[sg.lit].formula], refs_[sg.lit].param);
            cell = sg.positive ? ctx_->meet(cell, inst) : ctx_->minus(cell, inst);
        }
        return ctx_->show_point(cell);
    }

    const Ctx* ctx_;
    Set s_;
    FormulaSet delta_;
    std::size_t n_, beta_;
    typename Ctx::Region region_;
    std::map<InstanceRef<Ctx>, std::size_t> ids_;
    std::vector<InstanceRef<Ctx>> refs_;
    std::vector<typename Ctx::Lit> lits_;
    std::map<MemoKey, std::optional<std::vector<std::size_t>>> memo_;
};

template <class Ctx>
GammaResult<Ctx> gamma_consistent(const Ctx& ctx, const typename Ctx::Set& s, const FormulaSet& delta, std::size_t n,
                                  std::size_t beta, std::size_t leaf_budget = default_gamma_leaf_budget) {
    return GammaSolver<Ctx>(ctx, s, delta, n, beta, leaf_budget).solve();
}

inline constexpr std::size_t default_max_depth = 8;

/// sup{n >= 1 : opR_n(S, Δ) reaches the cap}, or 0. Ranks only decrease as n
/// grows, so the scan stops at the first n below the cap.
template <class Ctx>
std::size_t localized_opD(const Ctx& ctx, const typename Ctx::Set& s, const FormulaSet& delta, std::size_t cap,
                          std::size_t max_n = default_max_depth) {
    if (ctx.empty(s)) throw InconsistentType();
    std::size_t d = 0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        if (!op_rank(ctx, s, delta, n, cap).at_least_cap) break;
        d = n;
    }
    return d;
}

template <class Ctx>
std::size_t op_dimension(const Ctx& ctx, const typename Ctx::Set& s, const std::vector<FormulaSet>& pool,
                         std::size_t cap, std::size_t max_n = default_max_depth) {
    if (ctx.empty(s)) throw InconsistentType();
    std::size_t d = 0;
    for (const auto& delta : pool) d = std::max(d, localized_opD(ctx, s, delta, cap, max_n));
    return d;
}

} // namespace opdim
