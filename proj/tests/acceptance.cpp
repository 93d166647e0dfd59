// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "golden_cases.hpp"
#include "opdim/cli.hpp"
#include "opdim/multiorder.hpp"
#include "opdim/ominimal.hpp"
#include "opdim/patterns.hpp"
#include "opdim/ranks.hpp"
#include "support.hpp"

using namespace opdim;
using testing_support::coords;

namespace {

constexpr std::size_t rank_cap = 6;
constexpr double rank_identity_seconds = 300.0;
constexpr double ominimal_seconds = 600.0;
constexpr std::size_t random_cases = 200;
constexpr std::size_t dimension_suite_size = 30;

// Criteria expected to fail, with the reason kept in the notes printed below.
const std::map<int, std::string> known_failures = {
    {3, "the union rule fails on finite parts: two one-point sets of rank 0 whose union has rank 1"},
};

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

PartitionedFormula binary(const std::string& text) {
    return partition(parse_formula(text, Signature{{{"R", 2}}, {}, false}), {"x"});
}

const std::vector<PartitionedFormula>& binary_pool() {
    static const std::vector<PartitionedFormula> pool{binary("R(x, y)"), binary("R(y, x)"), binary("x = y"),
                                                      binary("R(x, y) & R(y, x)")};
    return pool;
}

// Every Δ of one or two formulas from the pool.
std::vector<FormulaSet> small_deltas() {
    const auto& pool = binary_pool();
    std::vector<FormulaSet> out;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        out.push_back({pool[i]});
        for (std::size_t j = i + 1; j < pool.size(); ++j) out.push_back({pool[i], pool[j]});
    }
    return out;
}

FiniteStructure binary_structure(std::size_t k, std::uint64_t code) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back("e" + std::to_string(i));
    FiniteStructure::Builder b(Signature{{{"R", 2}}, {}, false}, names);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if ((code >> (i * k + j)) & 1u) b.add("R", Tuple{i, j});
    return std::move(b).build();
}

PointSet mask_set(std::uint64_t mask, std::size_t k) {
    PointSet s(k);
    for (std::size_t i = 0; i < k; ++i)
        if ((mask >> i) & 1u) s.insert(i);
    return s;
}

// One relation code per isomorphism class on k points (least code in the class).
std::vector<std::uint64_t> iso_classes(std::size_t k) {
    std::vector<std::vector<std::size_t>> perms;
    std::vector<std::size_t> p(k);
    std::iota(p.begin(), p.end(), 0);
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    std::vector<std::uint64_t> out;
    const std::uint64_t total = std::uint64_t{1} << (k * k);
    for (std::uint64_t code = 0; code < total; ++code) {
        bool least = true;
        for (const auto& q : perms) {
            std::uint64_t image = 0;
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    if ((code >> (i * k + j)) & 1u) image |= std::uint64_t{1} << (q[i] * k + q[j]);
            if (image < code) {
                least = false;
                break;
            }
        }
        if (least) out.push_back(code);
    }
    return out;
}

// 1. opR_1 = R(-, -, 2) on every structure with at most four elements.
Outcome rank_identity() {
    auto start = Clock::now();
    auto deltas = small_deltas();
    std::size_t checked = 0, bad = 0;
    std::string first;
    for (std::size_t k = 1; k <= 4; ++k) {
        const std::uint64_t total = std::uint64_t{1} << (k * k);
        for (std::uint64_t code = 0; code < total; ++code) {
            FiniteStructure m = binary_structure(k, code);
            FiniteContext ctx(m, 1);
            for (const auto& delta : deltas) {
                OpRankEngine<FiniteContext> op(ctx, delta, 1, rank_cap);
                ShelahRankEngine<FiniteContext> sh(ctx, delta, rank_cap);
                for (std::uint64_t s = 1; s < (std::uint64_t{1} << k); ++s) {
                    ++checked;
                    auto a = op.rank(mask_set(s, k));
                    auto b = sh.rank(mask_set(s, k));
                    if (a != b && bad++ == 0)
                        first = "k=" + std::to_string(k) + " code=" + std::to_string(code) + " S=" + std::to_string(s);
                }
            }
        }
    }
    double t = seconds_since(start);
    Outcome o;
    o.pass = bad == 0 && t <= rank_identity_seconds;
    std::ostringstream d;
    d << checked << " (structure, S, Δ) triples, " << bad << " discrepancies, " << std::fixed
      << std::setprecision(1) << t << " s";
    if (bad) d << ", first at " << first;
    o.detail = d.str();
    return o;
}

// 2. Γ_{n,β} consistent iff opR_n >= β, n <= 2, β <= 2.
Outcome gamma_equivalence() {
    auto deltas = small_deltas();
    std::size_t checked = 0, bad = 0;
    std::string first;
    for (std::size_t k = 1; k <= 4; ++k)
        for (auto code : iso_classes(k)) {
            FiniteStructure m = binary_structure(k, code);
            FiniteContext ctx(m, 1);
            for (const auto& delta : deltas)
                for (std::size_t n = 1; n <= 2; ++n) {
                    OpRankEngine<FiniteContext> op(ctx, delta, n, rank_cap);
                    for (std::uint64_t s = 1; s < (std::uint64_t{1} << k); ++s) {
                        auto r = op.rank(mask_set(s, k));
                        for (std::size_t beta = 0; beta <= 2; ++beta) {
                            ++checked;
                            bool g = gamma_consistent(ctx, mask_set(s, k), delta, n, beta).consistent;
                            if (g != r.at_least(beta) && bad++ == 0)
                                first = "k=" + std::to_string(k) + " code=" + std::to_string(code) +
                                        " n=" + std::to_string(n) + " beta=" + std::to_string(beta);
                        }
                    }
                }
        }
    Outcome o;
    o.pass = bad == 0;
    o.detail = std::to_string(checked) + " checks over all structures up to isomorphism, " + std::to_string(bad) +
               " discrepancies" + (bad ? ", first at " + first : "");
    return o;
}

// 3. Monotonicity, union rule and invariance under relabeling.
Outcome rank_laws() {
    std::mt19937_64 rng(31);
    const auto& pool = binary_pool();
    auto random_mask = [&](std::size_t k) { return static_cast<std::uint64_t>(rng() % ((1u << k) - 1)) + 1; };
    std::size_t mono_bad = 0, union_bad = 0, perm_bad = 0;
    std::string union_example;
    for (std::size_t t = 0; t < random_cases; ++t) {
        std::size_t k = 2 + rng() % 4;
        FiniteStructure m = testing_support::random_binary(k, rng);
        FiniteContext ctx(m, 1);
        // Larger set, more formulas and fewer instances can only raise the rank.
        std::uint64_t big = random_mask(k);
        std::uint64_t small = big & rng();
        if (!small) small = big & (~big + 1);
        FormulaSet few{pool[rng() % pool.size()]};
        FormulaSet many = few;
        many.push_back(pool[rng() % pool.size()]);
        std::size_t n_many = 1 + rng() % 2, n_few = 1;
        if (op_rank(ctx, mask_set(big, k), many, n_few, rank_cap).level() <
            op_rank(ctx, mask_set(small, k), few, n_many, rank_cap).level())
            ++mono_bad;
    }
    for (std::size_t t = 0; t < random_cases; ++t) {
        std::size_t k = 2 + rng() % 4;
        FiniteStructure m = testing_support::random_binary(k, rng);
        FiniteContext ctx(m, 1);
        FormulaSet delta{pool[rng() % pool.size()], pool[rng() % pool.size()]};
        std::size_t n = 1 + rng() % 2;
        std::uint64_t s0 = random_mask(k), s1 = random_mask(k);
        auto r0 = op_rank(ctx, mask_set(s0, k), delta, n, rank_cap);
        auto r1 = op_rank(ctx, mask_set(s1, k), delta, n, rank_cap);
        auto ru = op_rank(ctx, mask_set(s0 | s1, k), delta, n, rank_cap);
        if (ru.level() != std::max(r0.level(), r1.level()) && union_bad++ == 0)
            union_example = "S0=" + std::to_string(s0) + " S1=" + std::to_string(s1) + " ranks " + to_string(r0) +
                            ", " + to_string(r1) + ", union " + to_string(ru);
    }
    for (std::size_t t = 0; t < random_cases; ++t) {
        std::size_t k = 2 + rng() % 4;
        FiniteStructure m = testing_support::random_binary(k, rng);
        std::vector<std::size_t> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        FiniteStructure p = m.relabeled(perm);
        std::uint64_t s = random_mask(k), ps = 0;
        for (std::size_t i = 0; i < k; ++i)
            if ((s >> i) & 1u) ps |= std::uint64_t{1} << perm[i];
        FormulaSet delta{pool[rng() % pool.size()], pool[rng() % pool.size()]};
        std::size_t n = 1 + rng() % 2;
        FiniteContext c1(m, 1), c2(p, 1);
        if (op_rank(c1, mask_set(s, k), delta, n, rank_cap) != op_rank(c2, mask_set(ps, k), delta, n, rank_cap))
            ++perm_bad;
    }
    Outcome o;
    o.pass = mono_bad == 0 && union_bad == 0 && perm_bad == 0;
    std::ostringstream d;
    d << "violations: monotonicity " << mono_bad << "/" << random_cases << ", union " << union_bad << "/"
      << random_cases << ", relabeling " << perm_bad << "/" << random_cases;
    if (union_bad) d << "; first union violation " << union_example;
    o.detail = d.str();
    return o;
}

// 4. (0,1) and (0,2) are not comparable in the first coordinate.
Outcome plane_counterexample() {
    auto r = pairwise_comparable({{Rational(0), Rational(1)}, {Rational(0), Rational(2)}});
    Outcome o;
    o.pass = !r.comparable && r.first == 0 && r.second == 1 && r.order == 0;
    o.detail = std::string("comparable=") + (r.comparable ? "true" : "false") + ", pair (" + std::to_string(r.first) +
               "," + std::to_string(r.second) + ") at order " + std::to_string(r.order);
    return o;
}

// 5. Random multi-orders embed into N^n with the coordinatewise orders.
Outcome grid_embeddings() {
    std::mt19937_64 rng(5);
    std::size_t ok = 0;
    for (std::size_t t = 0; t < random_cases; ++t) {
        std::size_t size = 1 + rng() % 6, n = 1 + rng() % 3;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < size; ++i) names.push_back("a" + std::to_string(i));
        std::vector<std::vector<std::string>> orders;
        for (std::size_t i = 0; i < n; ++i) {
            orders.push_back(names);
            std::shuffle(orders.back().begin(), orders.back().end(), rng);
        }
        MultiOrder b = make_multiorder(n, names, orders);
        auto pts = grid_embed(b);
        // Position of each element in each order, read off the name lists.
        std::vector<std::vector<std::size_t>> pos(n, std::vector<std::size_t>(size));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t r = 0; r < size; ++r) pos[i][std::stoul(orders[i][r].substr(1))] = r;
        bool good = pts.size() == size;
        for (std::size_t e = 0; e < size && good; ++e) {
            good = pts[e].size() == n;
            for (std::size_t f = 0; f < size && good; ++f)
                for (std::size_t i = 0; i < n && good; ++i) good = (pos[i][e] < pos[i][f]) == (pts[e][i] < pts[f][i]);
        }
        ok += good;
    }
    Outcome o;
    o.pass = ok == random_cases;
    o.detail = std::to_string(ok) + "/" + std::to_string(random_cases) + " embeddings preserve and reflect every order";
    return o;
}

PartitionedFormula dense(const std::string& text, std::vector<std::string> x = {"x"}) {
    return partition(parse_formula(text, Signature::dense_order()), std::move(x));
}

// 6. Even-length IRD patterns become ICT patterns.
Outcome ird_to_ict_suite() {
    std::mt19937_64 rng(2024);
    std::vector<PartitionedFormula> pool1{dense("x < y"), dense("y < x"), dense("x = y"), dense("y0 < x & x < y1")};
    std::vector<PartitionedFormula> pool2{dense("x0 < y", {"x0", "x1"}), dense("x1 < y", {"x0", "x1"}),
                                          dense("y < x1", {"x0", "x1"}), dense("x0 < x1 & x0 < y", {"x0", "x1"})};
    std::size_t verified = 0, transformed = 0;
    for (int round = 0; round < 50; ++round) {
        bool two = round % 2 == 1;
        DloContext ctx(two ? coords(2) : std::vector<std::string>{"x"});
        const auto& pool = two ? pool2 : pool1;
        Pattern<DloContext> p;
        p.length = 2 + 2 * (rng() % 2);
        std::size_t depth = 1 + rng() % (two ? 2 : 1);
        for (std::size_t i = 0; i < depth; ++i) {
            const auto& f = pool[rng() % pool.size()];
            p.formulas.push_back(f);
            std::vector<std::vector<Rational>> row;
            for (std::size_t j = 0; j < p.length; ++j) {
                std::vector<Rational> b;
                for (std::size_t k = 0; k < f.param_arity(); ++k)
                    b.push_back(Rational(static_cast<long long>(rng() % 11) - 5));
                row.push_back(b);
            }
            if (rng() % 4) std::sort(row.begin(), row.end());
            p.witnesses.push_back(row);
        }
        if (!check_ird(ctx, top(), p).ok) continue;
        ++verified;
        auto t = ird_to_ict(p);
        if (check_ict(ctx, top(), t).ok && testing_support::dense_oracle(PatternKind::ict, t, ctx.arity()))
            ++transformed;
    }
    Outcome o;
    o.pass = verified > 0 && transformed == verified;
    o.detail = std::to_string(transformed) + "/" + std::to_string(verified) +
               " verified IRD patterns (of 50 generated) transform to valid ICT patterns";
    return o;
}

std::size_t arity_of(const Formula& f) {
    std::size_t m = 1;
    for (const auto& v : free_variables(f))
        if (v[0] == 'x') m = std::max<std::size_t>(m, std::stoul(v.substr(1)) + 1);
    return m;
}

std::vector<Formula> dimension_suite() {
    testing_support::OrderFormulaGen gen(1234);
    std::vector<Formula> out;
    for (std::size_t i = 0; out.size() < dimension_suite_size; ++i) {
        Formula f = gen.next(1 + i % 3);
        if (dlo::satisfiable(dlo::qe_dlo(f))) out.push_back(f);
    }
    return out;
}

// 7. Diagram and projection dimension agree, and dimension is the IRD depth.
Outcome ominimal_dimension() {
    auto start = Clock::now();
    std::size_t agree = 0, witnessed = 0, bounded = 0;
    std::string first;
    auto note = [&](const Formula& f, const char* what) {
        if (first.empty()) first = std::string(what) + " on " + to_string(f);
    };
    auto suite = dimension_suite();
    for (const auto& f : suite) {
        auto vars = coords(arity_of(f));
        DloContext ctx(vars);
        Formula base = dlo::qe_dlo(f);
        auto a = dimension(f, vars, DimensionMethod::diagram);
        auto b = dimension(f, vars, DimensionMethod::projection);
        if (a.value() == b.value()) ++agree;
        else note(f, "methods disagree");
        if (a.dim == 0) {
            ++witnessed;
        } else if (auto p = ird_witness_from_dim(f, vars); p && p->depth() == a.dim && check_ird(ctx, base, *p).ok &&
                                                           testing_support::dense_oracle(PatternKind::ird, *p,
                                                                                         vars.size())) {
            ++witnessed;
        } else {
            note(f, "no verified witness");
        }
        std::set<Rational> ks;
        collect_numbers(base, ks);
        std::vector<std::vector<Rational>> grid;
        for (const auto& v : dlo::standard_grid({ks.begin(), ks.end()})) grid.push_back({v});
        auto r = search_ird(ctx, base, coordinate_pool(vars), a.dim + 1, {}, grid);
        if (!r.pattern && r.exhaustive) ++bounded;
        else note(f, "deeper pattern search did not end exhaustively empty");
    }
    double t = seconds_since(start);
    Outcome o;
    std::size_t n = suite.size();
    o.pass = agree == n && witnessed == n && bounded == n && t <= ominimal_seconds;
    std::ostringstream d;
    d << n << " formulas: methods agree " << agree << ", depth-dim witness " << witnessed << ", none at dim+1 "
      << bounded << ", " << std::fixed << std::setprecision(1) << t << " s";
    if (!first.empty()) d << "; first problem: " << first;
    o.detail = d.str();
    return o;
}

// 8. Dimension adds over products; opD of the dense order is 1.
Outcome products_and_dense_opd() {
    auto suite = dimension_suite();
    std::size_t pairs = 0, additive = 0;
    for (const auto& f : suite)
        for (const auto& g : suite) {
            auto fv = coords(arity_of(f)), gv = coords(arity_of(g));
            auto pr = product(f, fv, g, gv);
            ++pairs;
            additive += dimension(pr.formula, pr.vars).dim == dimension(f, fv).dim + dimension(g, gv).dim;
        }
    DloContext ctx({"x"});
    FormulaSet delta{dense("x < y")};
    std::vector<std::size_t> opd;
    for (std::size_t cap : {4, 6, 8}) opd.push_back(op_dimension(ctx, ctx.full(), {delta}, cap));
    Outcome o;
    o.pass = additive == pairs && opd == std::vector<std::size_t>{1, 1, 1};
    o.detail = std::to_string(additive) + "/" + std::to_string(pairs) + " products additive; opD of x<y at caps 4,6,8: " +
               std::to_string(opd[0]) + "," + std::to_string(opd[1]) + "," + std::to_string(opd[2]);
    return o;
}

// 9. Pure equality is stable.
Outcome pure_equality() {
    Signature sig;
    auto eq = partition(parse_formula("x = y", sig), {"x"});
    auto ne = partition(parse_formula("~(x = y)", sig), {"x"});
    std::vector<FormulaSet> pool{{eq}, {ne}, {eq, ne}};
    std::size_t sizes = 0, stable = 0;
    for (std::size_t k : {1, 2, 3, 5, 8, 16, 64}) {
        ++sizes;
        FiniteStructure m = make_pure_set(k);
        FiniteContext ctx(m, 1);
        bool zero = op_dimension(ctx, ctx.full(), pool, rank_cap) == 0;
        auto r = search_ird(ctx, ctx.full(), FormulaSet{eq, ne}, 1);
        stable += zero && !r.pattern && r.exhaustive;
    }
    Outcome o;
    o.pass = stable == sizes;
    o.detail = std::to_string(stable) + "/" + std::to_string(sizes) +
               " pure sets (1 to 64 elements) with opD 0 and no depth-1 IRD pattern (exhaustive)";
    return o;
}

// 10. Multi-cut counts, and golden CLI hashes.
Outcome cuts_and_hashes() {
    std::size_t shapes = 0, exact = 0;
    for (std::size_t k = 1; k <= 5; ++k)
        for (std::size_t n = 1; n <= 3; ++n)
            for (std::uint64_t seed = 0; seed < 4; ++seed) {
                ++shapes;
                auto b = generate_generic(n, k, seed);
                std::size_t want = 1;
                for (std::size_t i = 0; i < n; ++i) want *= k + 1;
                exact += enumerate_multicuts(b).size() == want;
            }
    namespace fs = std::filesystem;
    std::size_t transcripts = 0, stable = 0;
    for (const auto& c : golden::cases()) {
        ++transcripts;
        auto args = golden::expand(c.args, OPDIM_SOURCE_DIR);
        args.insert(args.end(), {"--format", "json"});
        std::string hashes[2];
        for (auto& h : hashes) {
            std::ostringstream out, err;
            cli::run(args, out, err);
            auto rep = cli::json::parse(out.str());
            h = rep.value("hash", rep.value("error", cli::json()).dump());
        }
        std::ifstream in(fs::path(OPDIM_SOURCE_DIR) / "tests" / "golden" / (c.name + ".json"));
        if (!in) continue;
        auto g = cli::json::parse(in);
        std::string recorded = g["hash"].is_null() ? g["result"].dump() : g["hash"].get<std::string>();
        stable += hashes[0] == hashes[1] && hashes[0] == recorded;
    }
    Outcome o;
    o.pass = exact == shapes && stable == transcripts;
    o.detail = std::to_string(exact) + "/" + std::to_string(shapes) + " multi-orders with (k+1)^n cuts; " +
               std::to_string(stable) + "/" + std::to_string(transcripts) + " golden transcripts hash-stable";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"two-rank identity", rank_identity},
        {"gamma equivalence", gamma_equivalence},
        {"monotonicity, union, relabeling", rank_laws},
        {"plane counterexample", plane_counterexample},
        {"grid embedding", grid_embeddings},
        {"IRD to ICT", ird_to_ict_suite},
        {"o-minimal dimension", ominimal_dimension},
        {"product additivity and dense opD", products_and_dense_opd},
        {"stability of pure equality", pure_equality},
        {"multi-cut counts and hashes", cuts_and_hashes},
    };
    int unexpected = 0, passed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        int id = static_cast<int>(i + 1);
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
        if (o.pass) ++passed;
        else if (!known_failures.count(id)) ++unexpected;
    }
    std::cout << passed << "/" << criteria.size() << " criteria pass" << std::endl;
    for (const auto& [id, why] : known_failures) std::cout << "known failure " << id << ": " << why << std::endl;
    return unexpected == 0 ? 0 : 1;
}
