#include <gtest/gtest.h>

#include <random>

#include "opdim/parser.hpp"
#include "opdim/patterns.hpp"
#include "opdim/ranks.hpp"
#include "support.hpp"

using namespace opdim;
using testing_support::dense_oracle;
using testing_support::finite_oracle;
using testing_support::random_binary;

namespace {

using Q = std::vector<Rational>;

PartitionedFormula dense(const std::string& text, std::vector<std::string> x = {"x"}) {
    return partition(parse_formula(text, Signature::dense_order()), std::move(x));
}

Q q(std::initializer_list<int> v) {
    Q out;
    for (int i : v) out.push_back(Rational(i));
    return out;
}

Signature binary_sig() { return Signature{{{"R", 2}}, {}, false}; }

} // namespace

TEST(Patterns, IrdOnTheDenseLine) {
    DloContext ctx({"x"});
    Formula base = top();
    Pattern<DloContext> up{{dense("x < y")}, {{q({0}), q({1}), q({2})}}, 3};
    EXPECT_TRUE(check_ird(ctx, base, up).ok);
    EXPECT_TRUE(dense_oracle(PatternKind::ird, up, 1));

    Pattern<DloContext> down{{dense("x < y")}, {{q({2}), q({1}), q({0})}}, 3};
    auto r = check_ird(ctx, base, down);
    EXPECT_FALSE(r.ok);
    ASSERT_TRUE(r.failing);
    EXPECT_EQ(*r.failing, Selector{1});
    EXPECT_FALSE(dense_oracle(PatternKind::ird, down, 1));

    Pattern<DloContext> none{{}, {}, 3};
    EXPECT_TRUE(check_ird(ctx, base, none).ok);
    EXPECT_TRUE(check_ict(ctx, base, none).ok);
}

TEST(Patterns, IctOnTheDenseLine) {
    DloContext ctx({"x"});
    auto interval = dense("y0 < x & x < y1");
    Pattern<DloContext> disjoint{{interval}, {{q({0, 1}), q({2, 3}), q({4, 5})}}, 3};
    EXPECT_TRUE(check_ict(ctx, top(), disjoint).ok);
    EXPECT_TRUE(dense_oracle(PatternKind::ict, disjoint, 1));

    // A point of the innermost interval lies in all of them.
    Pattern<DloContext> nested{{interval}, {{q({0, 9}), q({1, 8}), q({2, 7})}}, 3};
    EXPECT_FALSE(check_ict(ctx, top(), nested).ok);
    EXPECT_FALSE(dense_oracle(PatternKind::ict, nested, 1));

    auto cut = dense("x < y");
    Pattern<DloContext> twice{{cut, cut}, {{q({0}), q({1}), q({2})}, {q({0}), q({1}), q({2})}}, 3};
    EXPECT_FALSE(check_ict(ctx, top(), twice).ok);
    EXPECT_FALSE(dense_oracle(PatternKind::ict, twice, 1));
}

TEST(Patterns, SelectorCap) {
    DloContext ctx({"x"});
    auto cut = dense("x < y");
    Pattern<DloContext> p{{cut, cut}, {{q({0}), q({1}), q({2})}, {q({0}), q({1}), q({2})}}, 3};
    EXPECT_THROW(check_ird(ctx, top(), p, 8), BudgetExceeded);
    Pattern<DloContext> bad{{cut}, {{q({0}), q({1})}}, 3};
    EXPECT_THROW(check_ird(ctx, top(), bad), InputError);
}

TEST(Patterns, IrdToIctShape) {
    Pattern<DloContext> p{{dense("x < y")}, {{q({0}), q({1}), q({2}), q({3})}}, 4};
    auto t = ird_to_ict(p);
    EXPECT_EQ(t.depth(), 1u);
    EXPECT_EQ(t.length, 2u);
    EXPECT_EQ(to_string(t.formulas[0].body), "~(x < y_0 <-> x < y_1)");
    EXPECT_EQ(t.formulas[0].param_vars, (std::vector<std::string>{"y_0", "y_1"}));
    EXPECT_EQ(t.witnesses[0][1], q({2, 3}));
    Pattern<DloContext> odd{{dense("x < y")}, {{q({0}), q({1}), q({2})}}, 3};
    EXPECT_THROW(ird_to_ict(odd), InputError);
}

TEST(Patterns, IrdToIctSuite) {
    std::mt19937_64 rng(2024);
    std::size_t verified = 0;
    std::vector<PartitionedFormula> pool1{dense("x < y"), dense("y < x"), dense("x = y"), dense("y0 < x & x < y1")};
    std::vector<PartitionedFormula> pool2{dense("x0 < y", {"x0", "x1"}), dense("x1 < y", {"x0", "x1"}),
                                          dense("y < x1", {"x0", "x1"}), dense("x0 < x1 & x0 < y", {"x0", "x1"})};
    for (int round = 0; round < 50; ++round) {
        bool two = round % 2 == 1;
        DloContext ctx(two ? std::vector<std::string>{"x0", "x1"} : std::vector<std::string>{"x"});
        const auto& pool = two ? pool2 : pool1;
        // Sorting the witnesses of a row makes a pattern likely.
        Pattern<DloContext> p;
        p.length = 2 + 2 * (rng() % 2);
        std::size_t depth = 1 + rng() % (two ? 2 : 1);
        for (std::size_t i = 0; i < depth; ++i) {
            const auto& f = pool[rng() % pool.size()];
            p.formulas.push_back(f);
            std::vector<Q> row;
            for (std::size_t j = 0; j < p.length; ++j) {
                Q b;
                for (std::size_t k = 0; k < f.param_arity(); ++k)
                    b.push_back(Rational(static_cast<long long>(rng() % 11) - 5));
                row.push_back(b);
            }
            if (rng() % 4) std::sort(row.begin(), row.end());
            p.witnesses.push_back(row);
        }
        bool ird = check_ird(ctx, top(), p).ok;
        EXPECT_EQ(ird, dense_oracle(PatternKind::ird, p, ctx.arity()));
        if (!ird) continue;
        ++verified;
        auto t = ird_to_ict(p);
        EXPECT_TRUE(check_ict(ctx, top(), t).ok);
        EXPECT_TRUE(dense_oracle(PatternKind::ict, t, ctx.arity()));
    }
    EXPECT_GT(verified, 5u);

    std::size_t finite_verified = 0;
    const char* finite_pool[] = {"R(x, y)", "~R(x, y)", "R(y, x)", "R(x, y) & R(y, x)"};
    for (int round = 0; round < 40; ++round) {
        auto m = random_binary(4, rng);
        FiniteContext ctx(m, 1);
        Pattern<FiniteContext> p;
        p.length = 2;
        p.formulas.push_back(partition(parse_formula(finite_pool[round % 4], binary_sig()), {"x"}));
        p.witnesses.push_back({Tuple{rng() % 4}, Tuple{rng() % 4}});
        bool ird = check_ird(ctx, ctx.full(), p).ok;
        EXPECT_EQ(ird, finite_oracle(PatternKind::ird, m, p));
        if (!ird) continue;
        ++finite_verified;
        auto t = ird_to_ict(p);
        EXPECT_TRUE(check_ict(ctx, ctx.full(), t).ok);
        EXPECT_TRUE(finite_oracle(PatternKind::ict, m, t));
    }
    EXPECT_GT(finite_verified, 0u);
}

TEST(Patterns, SearchOnTheDenseLine) {
    DloContext ctx({"x"});
    FormulaSet pool{dense("x < y"), dense("y < x"), dense("x = y")};
    SearchOptions two{2};
    auto d2 = search_ird(ctx, top(), pool, 2, two);
    EXPECT_FALSE(d2.pattern);
    EXPECT_TRUE(d2.exhaustive);
    auto d1 = search_ird(ctx, top(), pool, 1, two);
    ASSERT_TRUE(d1.pattern);
    EXPECT_TRUE(dense_oracle(PatternKind::ird, *d1.pattern, 1));

    auto cut = search_ird(ctx, top(), pool, 2, SearchOptions{2, 3});
    EXPECT_FALSE(cut.pattern);
    EXPECT_FALSE(cut.exhaustive);
}

TEST(Patterns, SearchInThePlane) {
    DloContext ctx({"x0", "x1"});
    FormulaSet pool{dense("x0 < y", {"x0", "x1"}), dense("x1 < y", {"x0", "x1"})};
    auto r = search_ird(ctx, top(), pool, 2);
    ASSERT_TRUE(r.pattern);
    EXPECT_EQ(r.pattern->depth(), 2u);
    EXPECT_TRUE(check_ird(ctx, top(), *r.pattern).ok);
    EXPECT_TRUE(dense_oracle(PatternKind::ird, *r.pattern, 2));
    auto r3 = search_ird(ctx, top(), pool, 3);
    EXPECT_FALSE(r3.pattern);
    EXPECT_TRUE(r3.exhaustive);
    // Cuts never form ICT rows of length 2 or more; intervals do.
    EXPECT_EQ(dp_rank_lower(ctx, top(), pool, 3), 0u);
    FormulaSet intervals{dense("y0 < x0 & x0 < y1", {"x0", "x1"}), dense("y0 < x1 & x1 < y1", {"x0", "x1"})};
    std::vector<Q> unit;
    for (int k = 0; k < 6; ++k) unit.push_back(q({k, k + 1}));
    EXPECT_EQ(dp_rank_lower(ctx, top(), intervals, 2, {}, unit), 2u);
}

TEST(Patterns, PureEqualityHasNoIrdRow) {
    auto m = make_pure_set(5);
    FiniteContext ctx(m, 1);
    Signature sig = m.signature();
    FormulaSet eq{partition(parse_formula("x = y", sig), {"x"})};
    auto r = search_ird(ctx, ctx.full(), eq, 1, SearchOptions{2});
    EXPECT_FALSE(r.pattern);
    EXPECT_TRUE(r.exhaustive);
    FormulaSet both{eq[0], partition(parse_formula("~x = y", sig), {"x"})};
    auto r3 = search_ird(ctx, ctx.full(), both, 1);
    EXPECT_FALSE(r3.pattern);
    EXPECT_TRUE(r3.exhaustive);
    // A row x = b_0, x = b_1, x = b_2 of distinct elements is an ICT pattern.
    EXPECT_EQ(dp_rank_lower(ctx, ctx.full(), eq, 2), 1u);
}

TEST(Patterns, DenseIntervalsHaveDpRankOne) {
    DloContext ctx({"x"});
    FormulaSet pool{dense("y0 < x & x < y1")};
    std::vector<Q> unit;
    for (int k = 0; k < 4; ++k) unit.push_back(q({k, k + 1}));
    EXPECT_EQ(dp_rank_lower(ctx, top(), pool, 2, {}, unit), 1u);
}

TEST(Patterns, SearchDepthIsMonotone) {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 12; ++round) {
        auto m = random_binary(4, rng);
        FiniteContext ctx(m, 1);
        FormulaSet pool{partition(parse_formula("R(x, y)", binary_sig()), {"x"}),
                        partition(parse_formula("R(y, x)", binary_sig()), {"x"})};
        bool prev = true;
        for (std::size_t d = 0; d <= 3; ++d) {
            auto r = search_ird(ctx, ctx.full(), pool, d, SearchOptions{2});
            ASSERT_TRUE(r.exhaustive);
            bool found = r.pattern.has_value();
            if (found) {
                EXPECT_TRUE(prev);
                EXPECT_TRUE(finite_oracle(PatternKind::ird, m, *r.pattern));
            }
            if (d == 1 && found) {
                EXPECT_GE(shelah_rank2(ctx, ctx.full(), pool, 4).value, 1u);
            }
            prev = found;
        }
    }
}

TEST(Patterns, Alternation) {
    auto bits = [](const std::string& s) {
        std::vector<bool> v;
        for (char c : s) v.push_back(c == '1');
        return v;
    };
    EXPECT_EQ(alternation(bits("0011100")).size(), 3u);
    EXPECT_EQ(alternation(bits("1111")).size(), 1u);
    EXPECT_EQ(alternation(bits("0101")).size(), 4u);
    auto p = alternation(bits("0011100"));
    EXPECT_EQ(p.blocks[1], (std::pair<std::size_t, std::size_t>{2, 5}));
    EXPECT_TRUE(p.values[1]);
    EXPECT_EQ(alternation(bits("0001111110001")).size(), alternation(bits("0101")).size());
    EXPECT_THROW(alternation({}), InputError);
}

TEST(Patterns, IrdFromStaircase) {
    DloContext ctx({"x0", "x1"});
    auto phi = dense("x0 < y0 & x1 < y1", {"x0", "x1"});
    std::vector<Q> seq{q({4, 100}), q({6, 100}), q({100, 6}), q({100, 4})};
    auto r = ird_from_alternation(ctx, top(), q({5, 5}), phi, seq);
    EXPECT_EQ(r.partition.size(), 3u);
    ASSERT_TRUE(r.pattern);
    EXPECT_TRUE(r.verified);
    EXPECT_EQ(r.pattern->depth(), 2u);
    EXPECT_TRUE(dense_oracle(PatternKind::ird, *r.pattern, 2));

    auto flat = ird_from_alternation(ctx, top(), q({5, 5}), phi, {q({6, 6}), q({7, 7})});
    EXPECT_EQ(flat.partition.size(), 1u);
    EXPECT_FALSE(flat.pattern);
}

TEST(Patterns, ParityOfAStaircase) {
    auto phi = dense("x < y");
    for (std::size_t n = 0; n < 5; ++n) {
        auto psi = parity_combine(phi, n + 1);
        std::vector<bool> values;
        for (std::size_t step = 0; step <= n; ++step) {
            dlo::Env env{{"x", Rational(0)}};
            for (std::size_t i = 0; i <= n; ++i) env[psi.param_vars[i]] = Rational(step > i ? 1 : -1);
            values.push_back(dlo::holds(psi.body, env));
        }
        EXPECT_EQ(alternation(values).size(), n + 1);
    }
}
