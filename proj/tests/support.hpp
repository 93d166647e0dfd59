#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "opdim/dlo.hpp"
#include "opdim/eval.hpp"
#include "opdim/formula.hpp"
#include "opdim/parser.hpp"
#include "opdim/patterns.hpp"
#include "opdim/structure.hpp"

namespace testing_support {

using namespace opdim;

inline std::vector<std::string> coords(std::size_t m) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < m; ++i) v.push_back("x" + std::to_string(i));
    return v;
}

/// Random formula over x0 .. x{m-1} and at most two rational constants,
/// occasionally with a quantified extra variable.
class OrderFormulaGen {
public:
    explicit OrderFormulaGen(std::uint64_t seed) : rng_(seed) {}

    Formula next(std::size_t m) {
        static const Rational pool[] = {Rational(-1), Rational(0), Rational(1, 2), Rational(2)};
        consts_.clear();
        std::size_t k = rng_() % 3;
        for (std::size_t i = 0; i < k; ++i) consts_.push_back(pool[rng_() % 4]);
        vars_ = coords(m);
        return build(2 + rng_() % 2);
    }

private:
    Term term(const std::vector<std::string>& extra) {
        std::size_t total = vars_.size() + extra.size() + consts_.size();
        std::size_t i = rng_() % total;
        if (i < vars_.size()) return Term::var(vars_[i]);
        i -= vars_.size();
        if (i < extra.size()) return Term::var(extra[i]);
        return Term::number(consts_[i - extra.size()]);
    }

    Formula atom_(const std::vector<std::string>& extra) {
        Term a = term(extra), b = term(extra);
        return rng_() % 3 ? less(a, b) : equal(a, b);
    }

    Formula build(std::size_t depth, std::vector<std::string> extra = {}) {
        if (depth == 0) return atom_(extra);
        switch (rng_() % 6) {
        case 0:
        case 1: return conj({build(depth - 1, extra), build(depth - 1, extra)});
        case 2: return disj({build(depth - 1, extra), build(depth - 1, extra)});
        case 3: return negate(build(depth - 1, extra));
        case 4: {
            std::string z = "z" + std::to_string(extra.size());
            extra.push_back(z);
            Formula body = conj({atom_(extra), build(depth - 1, extra)});
            return rng_() % 4 ? exists(z, body) : forall(z, body);
        }
        default: return atom_(extra);
        }
    }

    std::mt19937_64 rng_;
    std::vector<Rational> consts_;
    std::vector<std::string> vars_;
};

inline FiniteStructure random_binary(std::size_t k, std::mt19937_64& rng) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back("e" + std::to_string(i));
    FiniteStructure::Builder b(Signature{{{"R", 2}}, {}, false}, names);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (rng() & 1u) b.add("R", Tuple{i, j});
    return std::move(b).build();
}

// Candidate realizations in Q^m: the relevant values, and m points in every
// gap between them and past both ends.
inline std::vector<std::vector<Rational>> dense_candidates(std::set<Rational> values, std::size_t m) {
    std::vector<Rational> line;
    if (values.empty()) values.insert(Rational(0));
    std::vector<Rational> v(values.begin(), values.end());
    for (std::size_t k = 1; k <= m; ++k) line.push_back(v.front() - Rational(static_cast<long long>(k)));
    for (std::size_t i = 0; i < v.size(); ++i) {
        line.push_back(v[i]);
        for (std::size_t k = 1; k <= m; ++k) {
            if (i + 1 < v.size()) line.push_back(v[i] + (v[i + 1] - v[i]) * Rational(k, m + 1));
            else line.push_back(v[i] + Rational(static_cast<long long>(k)));
        }
    }
    std::vector<std::vector<Rational>> out{{}};
    for (std::size_t c = 0; c < m; ++c) {
        std::vector<std::vector<Rational>> next;
        for (const auto& p : out)
            for (const auto& r : line) {
                next.push_back(p);
                next.back().push_back(r);
            }
        out = std::move(next);
    }
    return out;
}

// Brute-force pattern check over realization candidates.
template <class X, class Truth>
bool oracle_pattern(PatternKind kind, std::size_t depth, std::size_t length, const std::vector<X>& xs, Truth truth) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < depth; ++i) total *= length;
    for (std::size_t s = 0; s < total; ++s) {
        std::vector<std::size_t> f(depth);
        std::size_t c = s;
        for (std::size_t i = depth; i > 0; --i) {
            f[i - 1] = c % length;
            c /= length;
        }
        bool found = false;
        for (const auto& x : xs) {
            bool ok = true;
            for (std::size_t i = 0; i < depth && ok; ++i)
                for (std::size_t j = 0; j < length && ok; ++j) {
                    bool want = kind == PatternKind::ird ? j >= f[i] : j == f[i];
                    ok = truth(i, j, x) == want;
                }
            if (ok) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

inline bool dense_oracle(PatternKind kind, const Pattern<DloContext>& p, std::size_t m) {
    std::set<Rational> values;
    for (const auto& row : p.witnesses)
        for (const auto& b : row) values.insert(b.begin(), b.end());
    for (const auto& f : p.formulas) collect_numbers(f.body, values);
    auto xs = dense_candidates(values, m);
    return oracle_pattern(kind, p.depth(), p.length, xs, [&](std::size_t i, std::size_t j, const std::vector<Rational>& x) {
        dlo::Env env;
        const auto& f = p.formulas[i];
        for (std::size_t k = 0; k < x.size(); ++k) env[f.object_vars[k]] = x[k];
        for (std::size_t k = 0; k < f.param_arity(); ++k) env[f.param_vars[k]] = p.witnesses[i][j][k];
        return dlo::holds(f.body, env);
    });
}

inline bool finite_oracle(PatternKind kind, const FiniteStructure& m, const Pattern<FiniteContext>& p) {
    std::vector<std::size_t> xs(m.size());
    std::iota(xs.begin(), xs.end(), 0);
    return oracle_pattern(kind, p.depth(), p.length, xs, [&](std::size_t i, std::size_t j, std::size_t x) {
        std::map<std::string, std::size_t> env;
        const auto& f = p.formulas[i];
        env[f.object_vars[0]] = x;
        for (std::size_t k = 0; k < f.param_arity(); ++k) env[f.param_vars[k]] = p.witnesses[i][j][k];
        return evaluate(m, f.body, env);
    });
}

} // namespace testing_support
