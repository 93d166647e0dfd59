#pragma once

#include <chrono>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "opdim/context.hpp"
#include "opdim/error.hpp"
#include "opdim/io.hpp"
#include "opdim/multiorder.hpp"
#include "opdim/ominimal.hpp"
#include "opdim/parser.hpp"
#include "opdim/patterns.hpp"
#include "opdim/ranks.hpp"

namespace opdim::cli {

using json = io::json;

struct RunConfig {
    std::size_t cap = 6;
    std::uint64_t seed = 0;
    std::string format = "text";
    std::optional<std::size_t> budget;
    std::string grid;
};

struct Result {
    json payload;
    std::string text;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

/// "a,b;c,d" -> {{a,b},{c,d}}.
inline std::vector<std::vector<std::string>> tuples(const std::string& s) {
    std::vector<std::vector<std::string>> out;
    for (const auto& t : split(s, ';')) out.push_back(split(t, ','));
    return out;
}

inline std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
    return s;
}

inline std::vector<std::string> coordinate_vars(std::size_t m, const std::string& vars) {
    if (!vars.empty()) {
        auto v = split(vars, ',');
        if (m != 0 && v.size() != m) throw InputError("--vars does not match -m");
        return v;
    }
    if (m == 0) throw InputError("the number of coordinates -m must be positive");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < m; ++i) out.push_back("x" + std::to_string(i));
    return out;
}

inline std::string show_cut(const MultiCut& z) {
    std::vector<std::string> parts;
    for (auto c : z.cuts) parts.push_back(std::to_string(c));
    return "(" + join(parts, ",") + ")";
}

/// Options shared by the commands that work inside a context.
struct ContextArgs {
    std::string context;
    std::string type = "true";
    std::vector<std::string> formulas;
    std::string vars = "x";
};

inline void add_context_options(CLI::App* sub, ContextArgs& a, bool need_formulas = true) {
    sub->add_option("context", a.context, "structure file, or \"dlo\" for (Q,<)")->required();
    auto* f = sub->add_option("-f,--formula", a.formulas, "a formula φ(x; y) of the set Δ");
    if (need_formulas) f->required();
    sub->add_option("--type", a.type, "formula over the object variables defining S");
    sub->add_option("--vars", a.vars, "comma-separated object variables");
}

/// Calls `body(ctx, sig, vars)` with the context named on the command line.
template <class Body>
Result with_context(const ContextArgs& a, Body body) {
    auto vars = split(a.vars, ',');
    if (vars.empty()) throw InputError("at least one object variable is needed");
    if (a.context == "dlo") {
        DloContext ctx(vars);
        return body(ctx, Signature::dense_order(), vars);
    }
    FiniteStructure m = io::structure_from_json(io::read_json_file(a.context));
    FiniteContext ctx(m, vars.size());
    return body(ctx, m.signature(), vars);
}

inline FormulaSet parse_delta(const std::vector<std::string>& texts, const Signature& sig,
                              const std::vector<std::string>& vars) {
    FormulaSet delta;
    for (const auto& t : texts) delta.push_back(partition(parse_formula(t, sig), vars));
    return delta;
}

template <class Ctx>
std::optional<std::vector<typename Ctx::Param>> parse_grid(const Ctx& ctx, const std::string& grid) {
    if (grid.empty()) return std::nullopt;
    std::vector<typename Ctx::Param> out;
    for (const auto& t : tuples(grid)) out.push_back(ctx.parse_param(t));
    return out;
}

template <class Ctx>
json search_payload(const Ctx& ctx, const PatternSearch<Ctx>& r) {
    json out;
    out["status"] = r.pattern ? "found" : (r.exhaustive ? "none-exhaustive" : "none-budget");
    out["checks"] = r.checks;
    out["pattern"] = r.pattern ? io::pattern_to_json(ctx, *r.pattern) : json(nullptr);
    return out;
}

inline json check_payload(const PatternCheck& c) {
    json out = {{"valid", c.ok}, {"selectors_checked", c.selectors_checked}};
    out["failing_selector"] = c.failing ? json(*c.failing) : json(nullptr);
    return out;
}

} // namespace detail

/// Runs one invocation; writes the report to `out` and diagnostics to `err`.
/// Exit codes: 0 success, 2 input error, 3 budget exceeded.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    static const std::set<std::string> long_names = {
        "size", "seed", "cap", "format", "budget", "grid", "type", "vars", "witness", "beta", "length", "depth",
        "pattern", "points", "method", "e1", "e2", "list", "max-n", "depth-cap", "m0", "m1", "formula", "k"};
    // Accept single-dash spellings of long options, e.g. -size 16.
    for (auto& a : args)
        if (a.size() > 2 && a[0] == '-' && a[1] != '-' && long_names.count(a.substr(1))) a = "-" + a;

    RunConfig cfg;
    CLI::App app{"op-dimension, op-ranks and patterns on finite structures and on (Q,<)", "opdim"};
    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--cap", cfg.cap, "rank cap (values at the cap are reported as at least cap)")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--format", cfg.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--budget", cfg.budget, "search budget");
    app.add_option("--grid", cfg.grid, "witness grid: tuples separated by ';', entries by ','");

    std::function<Result()> action;

    // rank / shelah / gamma / opdim
    detail::ContextArgs ca;
    std::size_t n = 1, beta = 1, max_n = default_max_depth, depth = 1, length = default_pattern_length,
                depth_cap = 3;
    bool witness = false;
    std::string pattern_file;

    auto* rank = app.add_subcommand("rank", "op-rank opR_n(S, Δ)");
    detail::add_context_options(rank, ca);
    rank->add_option("-n", n, "number of simultaneous instances")->check(CLI::PositiveNumber);
    rank->add_flag("--witness", witness, "include a witness tree");
    rank->callback([&] {
        action = [&] {
            return detail::with_context(ca, [&](const auto& ctx, const Signature& sig, const auto& vars) {
                auto delta = detail::parse_delta(ca.formulas, sig, vars);
                auto s = ctx.define(parse_formula(ca.type, sig), vars);
                OpRankEngine engine(ctx, delta, n, cfg.cap);
                auto r = engine.rank(s);
                json p = {{"rank", io::rank_to_json(r)}, {"n", n}, {"cap", cfg.cap}};
                if (witness) p["witness_tree"] = io::rank_witness_to_json(ctx, engine.witness(s, cfg.cap), delta);
                return Result{p, "opR_" + std::to_string(n) + " = " + to_string(r)};
            });
        };
    });

    auto* shelah = app.add_subcommand("shelah", "Shelah 2-rank R(S, Δ, 2)");
    detail::add_context_options(shelah, ca);
    shelah->callback([&] {
        action = [&] {
            return detail::with_context(ca, [&](const auto& ctx, const Signature& sig, const auto& vars) {
                auto delta = detail::parse_delta(ca.formulas, sig, vars);
                auto r = shelah_rank2(ctx, ctx.define(parse_formula(ca.type, sig), vars), delta, cfg.cap);
                return Result{json{{"rank", io::rank_to_json(r)}, {"cap", cfg.cap}}, "R2 = " + to_string(r)};
            });
        };
    });

    auto* gamma = app.add_subcommand("gamma", "consistency of the system Γ_{n,β}");
    detail::add_context_options(gamma, ca);
    gamma->add_option("-n", n, "branching exponent")->check(CLI::PositiveNumber);
    gamma->add_option("--beta", beta, "depth");
    gamma->callback([&] {
        action = [&] {
            return detail::with_context(ca, [&](const auto& ctx, const Signature& sig, const auto& vars) {
                auto delta = detail::parse_delta(ca.formulas, sig, vars);
                auto s = ctx.define(parse_formula(ca.type, sig), vars);
                auto r = gamma_consistent(ctx, s, delta, n, beta, cfg.budget.value_or(default_gamma_leaf_budget));
                json p = {{"consistent", r.consistent}, {"n", n}, {"beta", beta}};
                if (r.consistent) {
                    json nodes = json::array(), leaves = json::array();
                    for (const auto& [prefix, refs] : r.witness.nodes) {
                        json inst = json::array();
                        for (const auto& ref : refs)
                            inst.push_back({{"formula", to_string(delta[ref.formula].body)},
                                            {"param", ctx.show_param(ref.param)}});
                        nodes.push_back({{"prefix", prefix}, {"instances", inst}});
                    }
                    for (const auto& [sigma, point] : r.witness.leaves)
                        leaves.push_back({{"branch", sigma}, {"point", point}});
                    p["witness"] = {{"nodes", nodes}, {"leaves", leaves}};
                }
                return Result{p, std::string("Gamma ") + (r.consistent ? "consistent" : "inconsistent")};
            });
        };
    });

    auto* opdim = app.add_subcommand("opdim", "op-dimension of S over Δ");
    detail::add_context_options(opdim, ca);
    opdim->add_option("--max-n", max_n, "largest n tried")->check(CLI::PositiveNumber);
    opdim->callback([&] {
        action = [&] {
            return detail::with_context(ca, [&](const auto& ctx, const Signature& sig, const auto& vars) {
                auto delta = detail::parse_delta(ca.formulas, sig, vars);
                auto s = ctx.define(parse_formula(ca.type, sig), vars);
                if (ctx.empty(s)) throw InconsistentType();
                json levels = json::array();
                std::size_t d = 0;
                for (std::size_t k = 1; k <= max_n; ++k) {
                    auto r = op_rank(ctx, s, delta, k, cfg.cap);
                    levels.push_back({{"n", k}, {"rank", io::rank_to_json(r)}});
                    if (!r.at_least_cap) break;
                    d = k;
                }
                json p = {{"opD", d}, {"cap", cfg.cap}, {"max_n", max_n}, {"ranks", levels}};
                return Result{p, "opD = " + std::to_string(d)};
            });
        };
    });

    // dprank / ird / ict
    auto* dprank = app.add_subcommand("dprank", "lower bound on dp-rank by ICT pattern search");
    detail::add_context_options(dprank, ca);
    dprank->add_option("--depth-cap", depth_cap, "largest depth tried");
    dprank->add_option("--length", length, "pattern length")->check(CLI::PositiveNumber);
    dprank->callback([&] {
        action = [&] {
            return detail::with_context(ca, [&](const auto& ctx, const Signature& sig, const auto& vars) {
                auto delta = detail::parse_delta(ca.formulas, sig, vars);
                auto base = ctx.region(ctx.define(parse_formula(ca.type, sig), vars));
                SearchOptions opt{length, cfg.budget.value_or(default_search_budget)};
                std::size_t best = 0;
                bool exhaustive = true;
                for (std::size_t d = 1; d <= depth_cap; ++d) {
                    auto r = search_ict(ctx, base, delta, d, opt, detail::parse_grid(ctx, cfg.grid));
                    if (!r.pattern) {
                        exhaustive = r.exhaustive;
                        break;
                    }
                    best = d;
                }
                json p = {{"dp_rank_at_least", best}, {"length", length}, {"depth_cap", depth_cap},
                          {"next_depth", best < depth_cap ? (exhaustive ? "none-exhaustive" : "none-budget")
                                                          : "not-searched"}};
                return Result{p, "dpR >= " + std::to_string(best)};
            });
        };
    });

    auto pattern_command = [&](const char* name, PatternKind kind) {
        auto* sub = app.add_subcommand(name, kind == PatternKind::ird ? "IRD pattern search or check"
                                                                     : "ICT pattern search or check");
        detail::add_context_options(sub, ca, false);
        sub->add_option("--depth", depth, "pattern depth");
        sub->add_option("--length", length, "pattern length")->check(CLI::PositiveNumber);
        sub->add_option("--pattern", pattern_file, "check this pattern file instead of searching");
        sub->callback([&, kind] {
            action = [&, kind] {
                return detail::with_context(ca, [&](const auto& ctx, const Signature& sig, const auto& vars) {
                    auto base = ctx.region(ctx.define(parse_formula(ca.type, sig), vars));
                    const char* label = kind == PatternKind::ird ? "IRD" : "ICT";
                    if (!pattern_file.empty()) {
                        auto p = io::pattern_from_json(ctx, io::read_json_file(pattern_file), sig, vars);
                        auto c = kind == PatternKind::ird ? check_ird(ctx, base, p) : check_ict(ctx, base, p);
                        return Result{detail::check_payload(c),
                                      std::string(label) + " pattern " + (c.ok ? "valid" : "invalid")};
                    }
                    if (ca.formulas.empty()) throw InputError("give formulas to search with, or --pattern");
                    auto delta = detail::parse_delta(ca.formulas, sig, vars);
                    SearchOptions opt{length, cfg.budget.value_or(default_search_budget)};
                    auto grid = detail::parse_grid(ctx, cfg.grid);
                    auto r = kind == PatternKind::ird ? search_ird(ctx, base, delta, depth, opt, grid)
                                                      : search_ict(ctx, base, delta, depth, opt, grid);
                    json p = detail::search_payload(ctx, r);
                    p["depth"] = depth;
                    p["length"] = length;
                    return Result{p, std::string(label) + " depth " + std::to_string(depth) + ": " +
                                         p["status"].template get<std::string>()};
                });
            };
        });
    };
    pattern_command("ird", PatternKind::ird);
    pattern_command("ict", PatternKind::ict);

    // mo
    auto* mo = app.add_subcommand("mo", "finite multi-orders");
    mo->require_subcommand(1);
    std::size_t mo_n = 2, size = 8, k = 1;
    std::string file, file_b, file_c, e1, e2, points, formula;
    bool list = false;

    auto* gen = mo->add_subcommand("gen", "random multi-order by one-point extensions");
    gen->add_option("-n", mo_n, "number of orders")->check(CLI::PositiveNumber);
    gen->add_option("--size", size, "number of elements");
    gen->callback([&] {
        action = [&] {
            auto b = generate_generic(mo_n, size, cfg.seed);
            return Result{json{{"multiorder", io::multiorder_to_json(b)}},
                          "generated " + std::to_string(b.size()) + " elements, " + std::to_string(b.n) + " orders"};
        };
    });

    auto* cuts = mo->add_subcommand("cuts", "enumerate multi-cuts");
    cuts->add_option("file", file, "multi-order file")->required();
    cuts->add_flag("--list", list, "list every multi-cut");
    cuts->callback([&] {
        action = [&] {
            auto b = io::multiorder_from_json(io::read_json_file(file));
            auto zs = enumerate_multicuts(b);
            json p = {{"count", zs.size()}};
            if (list) {
                json all = json::array();
                for (const auto& z : zs) all.push_back(z.cuts);
                p["cuts"] = all;
            }
            return Result{p, std::to_string(zs.size()) + " multi-cuts"};
        };
    });

    auto* embed = mo->add_subcommand("embed", "embedding into the coordinatewise grid");
    embed->add_option("file", file, "multi-order file")->required();
    embed->callback([&] {
        action = [&] {
            auto b = io::multiorder_from_json(io::read_json_file(file));
            auto pts = grid_embed(b);
            json map = json::object();
            for (std::size_t e = 0; e < b.size(); ++e) map[b.universe[e]] = pts[e];
            bool ok = is_grid_embedding(b, pts);
            return Result{json{{"points", map}, {"verified", ok}},
                          std::string("grid embedding ") + (ok ? "verified" : "FAILED")};
        };
    });

    auto* amal = mo->add_subcommand("amalgamate", "amalgamate B and C over A");
    amal->add_option("a", file, "multi-order A")->required();
    amal->add_option("b", file_b, "multi-order B")->required();
    amal->add_option("c", file_c, "multi-order C")->required();
    amal->add_option("--e1", e1, "embedding A -> B as a=b,...");
    amal->add_option("--e2", e2, "embedding A -> C as a=c,...");
    amal->callback([&] {
        action = [&] {
            auto a = io::multiorder_from_json(io::read_json_file(file));
            auto b = io::multiorder_from_json(io::read_json_file(file_b));
            auto c = io::multiorder_from_json(io::read_json_file(file_c));
            auto read_map = [&](const std::string& spec, const MultiOrder& target) {
                std::vector<std::size_t> f(a.size(), target.size());
                for (const auto& pair : detail::split(spec, ',')) {
                    auto kv = detail::split(pair, '=');
                    if (kv.size() != 2) throw InputError("embedding entries look like a=b");
                    f[a.index_of(kv[0])] = target.index_of(kv[1]);
                }
                for (auto v : f)
                    if (v == target.size()) throw InputError("the embedding must map every element of A");
                return f;
            };
            auto r = amalgamate(a, b, c, read_map(e1, b), read_map(e2, c));
            json fb = json::object(), fc = json::object();
            for (std::size_t e = 0; e < b.size(); ++e) fb[b.universe[e]] = r.d.universe[r.from_b[e]];
            for (std::size_t e = 0; e < c.size(); ++e) fc[c.universe[e]] = r.d.universe[r.from_c[e]];
            bool ok = !validate(r.d) && is_embedding(b, r.d, r.from_b) && is_embedding(c, r.d, r.from_c);
            return Result{json{{"multiorder", io::multiorder_to_json(r.d)}, {"from_b", fb}, {"from_c", fc},
                               {"verified", ok}},
                          "amalgam of " + std::to_string(r.d.size()) + " elements"};
        };
    });

    auto* ext = mo->add_subcommand("extcheck", "extension property up to level k");
    ext->add_option("file", file, "multi-order file")->required();
    ext->add_option("-k,--k", k, "subset size");
    ext->callback([&] {
        action = [&] {
            auto b = io::multiorder_from_json(io::read_json_file(file));
            bool ok = extension_property_level(b, k);
            return Result{json{{"k", k}, {"holds", ok}},
                          "extension property at level " + std::to_string(k) + ": " + (ok ? "yes" : "no")};
        };
    });

    auto* mop = mo->add_subcommand("moptest", "definability of every multi-cut through a picture");
    mop->add_option("file", file, "multi-order file")->required();
    mop->add_option("context", ca.context, "structure file, or \"dlo\"")->required();
    mop->add_option("-f,--formula", formula, "φ(x; y)")->required();
    mop->add_option("--points", points, "images of the elements, in universe order: p;q;...")->required();
    mop->add_option("--vars", ca.vars, "comma-separated object variables");
    mop->callback([&] {
        action = [&] {
            auto b = io::multiorder_from_json(io::read_json_file(file));
            ca.formulas = {formula};
            return detail::with_context(ca, [&](const auto& ctx, const Signature& sig, const auto& vars) {
                using Ctx = std::decay_t<decltype(ctx)>;
                PictureWitness<Ctx> w{b, {}, partition(parse_formula(formula, sig), vars)};
                for (const auto& t : detail::tuples(points)) w.g.push_back(ctx.parse_param(t));
                auto rep = check_mop_witness(ctx, w, cfg.budget.value_or(1000000));
                json missing = json::array();
                for (const auto& z : rep.missing) missing.push_back(z.cuts);
                json p = {{"total", rep.total},     {"definable", rep.definable}, {"missing", missing},
                          {"exhaustive", rep.exhaustive}, {"params_tried", rep.params_tried}};
                return Result{p, std::to_string(rep.definable) + " of " + std::to_string(rep.total) +
                                     " multi-cuts definable"};
            });
        };
    });

    // omin
    auto* omin = app.add_subcommand("omin", "the dense order (Q,<)");
    omin->require_subcommand(1);
    std::string text, text2, method = "both";
    std::size_t m = 0, m0 = 0, m1 = 0;
    std::string ovars;

    auto* qe = omin->add_subcommand("qe", "quantifier elimination");
    qe->add_option("formula", text, "formula")->required();
    qe->callback([&] {
        action = [&] {
            Formula g = dlo::qe_dlo(parse_formula(text, Signature::dense_order()));
            return Result{json{{"formula", to_string(g)}}, to_string(g)};
        };
    });

    auto* dim = omin->add_subcommand("dim", "o-minimal dimension");
    dim->add_option("formula", text, "formula")->required();
    dim->add_option("-m", m, "number of coordinates x0 ... x{m-1}");
    dim->add_option("--vars", ovars, "comma-separated coordinates");
    dim->add_option("--method", method, "diagram, projection or both")
        ->check(CLI::IsMember({"diagram", "projection", "both"}));
    dim->callback([&] {
        action = [&] {
            auto vars = detail::coordinate_vars(m, ovars);
            Formula f = parse_formula(text, Signature::dense_order());
            auto a = dimension(f, vars, DimensionMethod::diagram);
            auto b = dimension(f, vars, DimensionMethod::projection);
            json p;
            if (method == "diagram") p = io::dimension_to_json(a);
            else if (method == "projection") p = io::dimension_to_json(b);
            else {
                p = io::dimension_to_json(a);
                p["method"] = "both";
                p["projection"] = io::dimension_to_json(b);
                p["agree"] = a.value() == b.value();
            }
            return Result{p, "dim = " + (method == "projection" ? b.value() : a.value())};
        };
    });

    auto* cells = omin->add_subcommand("cells", "order diagrams implying the formula");
    cells->add_option("formula", text, "formula")->required();
    cells->add_option("-m", m, "number of coordinates");
    cells->add_option("--vars", ovars, "comma-separated coordinates");
    cells->callback([&] {
        action = [&] {
            auto vars = detail::coordinate_vars(m, ovars);
            auto ds = order_diagrams(parse_formula(text, Signature::dense_order()), vars);
            json consts = json::array(), list_ = json::array();
            for (const auto& c : ds.consts) consts.push_back(to_string(c));
            for (const auto& f : ds.formulas()) list_.push_back(to_string(f));
            return Result{json{{"consts", consts}, {"count", ds.diagrams.size()}, {"diagrams", list_}},
                          std::to_string(ds.diagrams.size()) + " diagrams"};
        };
    });

    auto* irdw = omin->add_subcommand("irdwitness", "IRD pattern of depth dim");
    irdw->add_option("formula", text, "formula")->required();
    irdw->add_option("-m", m, "number of coordinates");
    irdw->add_option("--vars", ovars, "comma-separated coordinates");
    irdw->add_option("--length", length, "pattern length")->check(CLI::PositiveNumber);
    irdw->callback([&] {
        action = [&] {
            auto vars = detail::coordinate_vars(m, ovars);
            Formula f = parse_formula(text, Signature::dense_order());
            DloContext ctx(vars);
            auto p = ird_witness_from_dim(f, vars, length);
            if (!p) return Result{json{{"pattern", nullptr}, {"verified", false}}, "no pattern (dimension 0 or empty)"};
            bool ok = check_ird(ctx, dlo::qe_dlo(f), *p).ok;
            return Result{json{{"pattern", io::pattern_to_json(ctx, *p)}, {"verified", ok}},
                          "IRD depth " + std::to_string(p->depth()) + (ok ? " verified" : " NOT verified")};
        };
    });

    auto* prod = omin->add_subcommand("prodcheck", "dimension of a product against the sum");
    prod->add_option("f", text, "formula over x0 ... x{m0-1}")->required();
    prod->add_option("g", text2, "formula over x0 ... x{m1-1}")->required();
    prod->add_option("--m0", m0, "coordinates of f")->required();
    prod->add_option("--m1", m1, "coordinates of g")->required();
    prod->callback([&] {
        action = [&] {
            auto fv = detail::coordinate_vars(m0, ""), gv = detail::coordinate_vars(m1, "");
            Formula f = parse_formula(text, Signature::dense_order());
            Formula g = parse_formula(text2, Signature::dense_order());
            auto pr = product(f, fv, g, gv);
            auto dx = dimension(f, fv), dy = dimension(g, gv), dp = dimension(pr.formula, pr.vars);
            bool additive = dx.empty || dy.empty ? dp.empty : !dp.empty && dp.dim == dx.dim + dy.dim;
            json p = {{"dim_x", dx.value()}, {"dim_y", dy.value()}, {"dim_product", dp.value()},
                      {"additive", additive}};
            return Result{p, "dim(X x Y) = " + dp.value() + ", dim X + dim Y = " +
                                 (dx.empty || dy.empty ? "empty" : std::to_string(dx.dim + dy.dim))};
        };
    });

    json config;
    auto echo = [&] {
        config = {{"cap", cfg.cap}, {"seed", cfg.seed}, {"format", cfg.format}};
        config["budget"] = cfg.budget ? json(*cfg.budget) : json(nullptr);
        config["grid"] = cfg.grid.empty() ? json(nullptr) : json(cfg.grid);
    };
    // The format is honoured even when parsing fails before it is set.
    bool json_out = false;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--format=json") json_out = true;
        if (args[i] == "--format" && i + 1 < args.size()) json_out = args[i + 1] == "json";
    }
    auto fail = [&](const std::string& kind, const std::string& message, int code) {
        echo();
        if (json_out || cfg.format == "json") {
            json rep = {{"command", detail::join(args, " ")}, {"config", config},
                        {"error", {{"kind", kind}, {"message", message}}}};
            out << rep.dump(2) << "\n";
        } else {
            err << "error: " << message << "\n";
        }
        return code;
    };

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail("InputError", e.what(), 2);
    } catch (const Error& e) {
        return fail(e.kind(), e.what(), dynamic_cast<const BudgetExceeded*>(&e) ? 3 : 2);
    }
    if (!action) return fail("InputError", "no command given", 2);

    auto start = std::chrono::steady_clock::now();
    Result res;
    try {
        res = action();
    } catch (const BudgetExceeded& e) {
        return fail(e.kind(), e.what(), 3);
    } catch (const Error& e) {
        return fail(e.kind(), e.what(), 2);
    }
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    echo();
    std::string hash = io::fnv1a(res.payload.dump());
    if (cfg.format == "json") {
        json rep = {{"command", detail::join(args, " ")},
                    {"config", config},
                    {"result", res.payload},
                    {"timing_ms", std::round(ms * 1000) / 1000},
                    {"hash", hash}};
        out << rep.dump(2) << "\n";
    } else {
        out << res.text << "\n" << "hash: " << hash << "\n";
    }
    return 0;
}

inline int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(std::move(args), std::cout, std::cerr);
}

} // namespace opdim::cli
