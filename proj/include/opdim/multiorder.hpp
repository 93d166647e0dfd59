#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "opdim/context.hpp"
#include "opdim/dlo.hpp"
#include "opdim/error.hpp"
#include "opdim/eval.hpp"
#include "opdim/formula.hpp"

namespace opdim {

/// Seeded generator with draws that do not depend on the standard library's
/// distribution implementations, so sequences agree across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v;
        do v = gen_();
        while (v >= limit);
        return v % bound;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    std::uint64_t next() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

/// n strict linear orders on one universe. orders[i] lists element indices
/// in <_i-increasing sequence.
struct MultiOrder {
    std::size_t n = 1;
    std::vector<std::string> universe;
    std::vector<std::vector<std::size_t>> orders;

    std::size_t size() const { return universe.size(); }

    /// pos[i][e]: the 0-based place of element e in order i.
    std::vector<std::vector<std::size_t>> positions() const {
        std::vector<std::vector<std::size_t>> pos(n, std::vector<std::size_t>(size()));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = 0; p < orders[i].size(); ++p) pos[i][orders[i][p]] = p;
        return pos;
    }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < universe.size(); ++i)
            if (universe[i] == name) return i;
        throw InputError("unknown element '" + name + "'");
    }

    friend bool operator==(const MultiOrder&, const MultiOrder&) = default;
};

struct Violation {
    std::size_t order = 0;
    std::string message;
};

/// Empty when every order is a permutation of the universe; otherwise the
/// first offending order.
inline std::optional<Violation> validate(const MultiOrder& b) {
    if (b.n == 0) return Violation{0, "a multi-order needs at least one order"};
    std::set<std::string> names(b.universe.begin(), b.universe.end());
    if (names.size() != b.universe.size()) return Violation{0, "duplicate element in the universe"};
    if (b.orders.size() != b.n)
        return Violation{std::min(b.orders.size(), b.n), "expected " + std::to_string(b.n) + " orders"};
    for (std::size_t i = 0; i < b.n; ++i) {
        const auto& o = b.orders[i];
        if (o.size() != b.size()) return Violation{i, "order " + std::to_string(i) + " has the wrong length"};
        std::vector<bool> seen(b.size(), false);
        for (auto e : o) {
            if (e >= b.size() || seen[e]) return Violation{i, "order " + std::to_string(i) + " is not a permutation"};
            seen[e] = true;
        }
    }
    return std::nullopt;
}

/// Builds a multi-order from orders given by element names; orders that
/// mention unknown or repeated names are kept as the index sequence so that
/// `validate` can report them.
inline MultiOrder make_multiorder(std::size_t n, std::vector<std::string> universe,
                                  const std::vector<std::vector<std::string>>& orders) {
    MultiOrder b{n, std::move(universe), {}};
    for (const auto& o : orders) {
        std::vector<std::size_t> idx;
        for (const auto& name : o) {
            auto it = std::find(b.universe.begin(), b.universe.end(), name);
            idx.push_back(it == b.universe.end() ? b.universe.size() : static_cast<std::size_t>(it - b.universe.begin()));
        }
        b.orders.push_back(std::move(idx));
    }
    return b;
}

inline void require_valid(const MultiOrder& b) {
    if (auto v = validate(b)) throw InputError("invalid multi-order: " + v->message);
}

/// The n-chain structure of a multi-order, with relations "<0" ... "<n-1".
inline FiniteStructure to_structure(const MultiOrder& b) {
    require_valid(b);
    FiniteStructure::Builder builder(Signature::multi_order(b.n), b.universe);
    for (std::size_t i = 0; i < b.n; ++i)
        for (std::size_t p = 0; p < b.size(); ++p)
            for (std::size_t q = p + 1; q < b.size(); ++q)
                builder.add("<" + std::to_string(i), Tuple{b.orders[i][p], b.orders[i][q]});
    return std::move(builder).build(std::max(default_max_universe, b.size()), true);
}

/// cut i is the number of elements below it in <_i.
struct MultiCut {
    std::vector<std::size_t> cuts;
    friend bool operator==(const MultiCut&, const MultiCut&) = default;
    friend bool operator<(const MultiCut& a, const MultiCut& b) { return a.cuts < b.cuts; }
};

/// All (|B|+1)^n multi-cuts in lexicographic order.
inline std::vector<MultiCut> enumerate_multicuts(const MultiOrder& b) {
    std::vector<MultiCut> out;
    std::vector<std::size_t> c(b.n, 0);
    while (true) {
        out.push_back({c});
        std::size_t i = b.n;
        while (i > 0 && c[i - 1] == b.size()) c[--i] = 0;
        if (i == 0) break;
        ++c[i - 1];
    }
    return out;
}

/// The point of N^n assigned to each element: its positions in the orders.
inline std::vector<std::vector<std::size_t>> grid_embed(const MultiOrder& b) {
    require_valid(b);
    auto pos = b.positions();
    std::vector<std::vector<std::size_t>> pts(b.size(), std::vector<std::size_t>(b.n));
    for (std::size_t e = 0; e < b.size(); ++e)
        for (std::size_t i = 0; i < b.n; ++i) pts[e][i] = pos[i][e];
    return pts;
}

/// a <_i b iff point(a)_i < point(b)_i, for every pair and every i; the map
/// must also be injective.
inline bool is_grid_embedding(const MultiOrder& b, const std::vector<std::vector<std::size_t>>& pts) {
    if (pts.size() != b.size()) return false;
    auto pos = b.positions();
    for (std::size_t x = 0; x < b.size(); ++x) {
        if (pts[x].size() != b.n) return false;
        for (std::size_t y = 0; y < b.size(); ++y) {
            if (x != y && pts[x] == pts[y]) return false;
            for (std::size_t i = 0; i < b.n; ++i)
                if ((pos[i][x] < pos[i][y]) != (pts[x][i] < pts[y][i])) return false;
        }
    }
    return true;
}

/// f: A -> B with a <_i a' iff f(a) <_i f(a'), injective.
inline bool is_embedding(const MultiOrder& a, const MultiOrder& b, const std::vector<std::size_t>& f) {
    if (a.n != b.n || f.size() != a.size()) return false;
    std::set<std::size_t> image(f.begin(), f.end());
    if (image.size() != f.size()) return false;
    for (auto e : f)
        if (e >= b.size()) return false;
    auto pa = a.positions(), pb = b.positions();
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t x = 0; x < a.size(); ++x)
            for (std::size_t y = 0; y < a.size(); ++y)
                if ((pa[i][x] < pa[i][y]) != (pb[i][f[x]] < pb[i][f[y]])) return false;
    return true;
}

/// The same, but only a <_i a' implies f(a) <_i f(a').
inline bool is_injective_homomorphism(const std::vector<std::vector<std::size_t>>& pts, const MultiOrder& b) {
    auto pos = b.positions();
    for (std::size_t x = 0; x < b.size(); ++x)
        for (std::size_t y = 0; y < b.size(); ++y) {
            if (x != y && pts[x] == pts[y]) return false;
            for (std::size_t i = 0; i < b.n; ++i)
                if (pts[x][i] < pts[y][i] && !(pos[i][x] < pos[i][y])) return false;
        }
    return true;
}

struct LinearizedGrid {
    MultiOrder order;                           // universe: the grid points in row-major order
    std::vector<std::vector<std::size_t>> points;
    bool homomorphism = false;
};

inline std::string point_name(const std::vector<std::size_t>& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
    return s + ")";
}

/// A multi-order on (2^N)^n whose order i extends the strict comparison of
/// coordinate i; ties are broken by a seeded shuffle, independently per order.
inline LinearizedGrid linearize_grid(std::size_t big_n, std::size_t n, std::uint64_t seed, std::size_t cap = 4096) {
    if (n == 0) throw InputError("n must be at least 1");
    double total = std::pow(2.0, static_cast<double>(big_n * n));
    if (total > static_cast<double>(cap))
        throw BudgetExceeded("grid of " + std::to_string(static_cast<long long>(total)) + " points exceeds the cap " +
                             std::to_string(cap));
    std::size_t side = std::size_t{1} << big_n;
    TupleCoder coder{side, n};
    LinearizedGrid g;
    g.order.n = n;
    for (std::size_t c = 0; c < coder.extent(); ++c) {
        g.points.push_back(coder.decode(c));
        g.order.universe.push_back(point_name(g.points.back()));
    }
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> idx(coder.extent());
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(idx);
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return g.points[a][i] < g.points[b][i]; });
        g.order.orders.push_back(std::move(idx));
    }
    g.homomorphism = is_injective_homomorphism(g.points, g.order);
    return g;
}

struct Amalgam {
    MultiOrder d;
    std::vector<std::size_t> from_b; // B -> D
    std::vector<std::size_t> from_c; // C -> D
};

/// Amalgamates B and C over A. D's elements are those of B followed by the
/// elements of C outside e2's image; in each order, the elements between two
/// consecutive common points are placed B-side first.
inline Amalgam amalgamate(const MultiOrder& a, const MultiOrder& b, const MultiOrder& c,
                          const std::vector<std::size_t>& e1, const std::vector<std::size_t>& e2) {
    require_valid(a);
    require_valid(b);
    require_valid(c);
    if (!is_embedding(a, b, e1)) throw InputError("the first map is not an embedding of A into B");
    if (!is_embedding(a, c, e2)) throw InputError("the second map is not an embedding of A into C");

    Amalgam out;
    out.d.n = a.n;
    out.d.universe = b.universe;
    out.from_b.resize(b.size());
    std::iota(out.from_b.begin(), out.from_b.end(), 0);
    out.from_c.assign(c.size(), 0);
    std::vector<bool> c_common(c.size(), false), b_common(b.size(), false);
    for (std::size_t x = 0; x < a.size(); ++x) {
        out.from_c[e2[x]] = e1[x];
        c_common[e2[x]] = true;
        b_common[e1[x]] = true;
    }
    std::set<std::string> names(b.universe.begin(), b.universe.end());
    for (std::size_t y = 0; y < c.size(); ++y) {
        if (c_common[y]) continue;
        std::string name = c.universe[y];
        while (names.count(name)) name += "'";
        names.insert(name);
        out.from_c[y] = out.d.universe.size();
        out.d.universe.push_back(name);
    }

    for (std::size_t i = 0; i < a.n; ++i) {
        // key = (segment, side, position); common points use side 2.
        std::vector<std::pair<std::tuple<std::size_t, int, std::size_t>, std::size_t>> keyed;
        std::size_t seg = 0;
        for (std::size_t p = 0; p < b.size(); ++p) {
            std::size_t e = b.orders[i][p];
            if (b_common[e]) keyed.push_back({{seg++, 2, 0}, e});
            else keyed.push_back({{seg, 0, p}, e});
        }
        seg = 0;
        for (std::size_t p = 0; p < c.size(); ++p) {
            std::size_t e = c.orders[i][p];
            if (c_common[e]) ++seg;
            else keyed.push_back({{seg, 1, p}, out.from_c[e]});
        }
        std::sort(keyed.begin(), keyed.end());
        std::vector<std::size_t> order;
        for (const auto& [k, e] : keyed) order.push_back(e);
        out.d.orders.push_back(std::move(order));
    }
    return out;
}

/// Per order, the place (0 ... |B|) where a new point is inserted.
using ExtensionSpec = std::vector<std::size_t>;

inline MultiOrder one_point_extend(const MultiOrder& b, const ExtensionSpec& spec, std::string name = "") {
    require_valid(b);
    if (spec.size() != b.n) throw InputError("extension spec needs one position per order");
    for (auto p : spec)
        if (p > b.size()) throw InputError("extension position " + std::to_string(p) + " is out of range");
    if (name.empty()) name = "p" + std::to_string(b.size());
    while (std::find(b.universe.begin(), b.universe.end(), name) != b.universe.end()) name += "'";
    MultiOrder out = b;
    std::size_t e = out.universe.size();
    out.universe.push_back(name);
    for (std::size_t i = 0; i < b.n; ++i)
        out.orders[i].insert(out.orders[i].begin() + static_cast<std::ptrdiff_t>(spec[i]), e);
    return out;
}

inline constexpr std::size_t default_generic_cap = 4096;

/// Iterated one-point extensions with uniformly drawn positions.
inline MultiOrder generate_generic(std::size_t n, std::size_t size, std::uint64_t seed,
                                   std::size_t cap = default_generic_cap) {
    if (n == 0) throw InputError("n must be at least 1");
    if (size > cap) throw BudgetExceeded("size " + std::to_string(size) + " exceeds the cap " + std::to_string(cap));
    Rng rng(seed);
    MultiOrder b{n, {}, std::vector<std::vector<std::size_t>>(n)};
    for (std::size_t k = 0; k < size; ++k) {
        ExtensionSpec spec(n);
        for (auto& p : spec) p = rng.below(b.size() + 1);
        b = one_point_extend(b, spec);
    }
    return b;
}

/// Every one-point configuration over every subset of at most k elements is
/// realized by an element of B outside the subset.
inline bool extension_property_level(const MultiOrder& b, std::size_t k) {
    require_valid(b);
    if (k > b.size()) throw InputError("k exceeds the size of the multi-order");
    auto pos = b.positions();
    for (std::size_t s = 0; s <= k; ++s) {
        std::vector<std::size_t> subset(s);
        std::function<bool(std::size_t, std::size_t)> over = [&](std::size_t depth, std::size_t from) -> bool {
            if (depth < s) {
                for (std::size_t e = from; e < b.size(); ++e) {
                    subset[depth] = e;
                    if (!over(depth + 1, e + 1)) return false;
                }
                return true;
            }
            // Configurations realized by outside elements.
            std::set<std::vector<std::size_t>> realized;
            for (std::size_t e = 0; e < b.size(); ++e) {
                if (std::find(subset.begin(), subset.end(), e) != subset.end()) continue;
                std::vector<std::size_t> cfg(b.n, 0);
                for (std::size_t i = 0; i < b.n; ++i)
                    for (auto t : subset) cfg[i] += pos[i][t] < pos[i][e];
                realized.insert(cfg);
            }
            std::size_t want = 1;
            for (std::size_t i = 0; i < b.n; ++i) want *= s + 1;
            return realized.size() == want;
        };
        if (!over(0, 0)) return false;
    }
    return true;
}

struct ComparabilityResult {
    bool comparable = true;
    std::size_t first = 0, second = 0, order = 0; // counterexample when not comparable
};

/// Whether every two distinct points differ in every coordinate, i.e. are
/// comparable in each coordinatewise strict order.
inline ComparabilityResult pairwise_comparable(const std::vector<std::vector<Rational>>& pts) {
    for (std::size_t x = 0; x < pts.size(); ++x)
        for (std::size_t y = x + 1; y < pts.size(); ++y) {
            if (pts[x] == pts[y]) throw InputError("duplicate point in pairwise_comparable");
            if (pts[x].size() != pts[y].size()) throw InputError("points of different dimension");
        }
    for (std::size_t x = 0; x < pts.size(); ++x)
        for (std::size_t y = x + 1; y < pts.size(); ++y)
            for (std::size_t i = 0; i < pts[x].size(); ++i)
                if (pts[x][i] == pts[y][i]) return {false, x, y, i};
    return {};
}

/// A finite picture of a multi-order in a host context: element a is sent to
/// the tuple g[a], which is substituted for the object variables of φ.
template <class Ctx>
struct PictureWitness {
    MultiOrder source;
    std::vector<typename Ctx::Param> g;
    PartitionedFormula phi;
};

struct MopReport {
    std::size_t total = 0;
    std::size_t definable = 0;
    std::vector<MultiCut> missing;
    bool exhaustive = true;      // false when the parameter budget cut the search short
    std::size_t params_tried = 0;
};

namespace detail {

inline std::vector<bool> picture_row(const FiniteContext& ctx, const PartitionedFormula& phi,
                                     const std::vector<Tuple>& g, const Tuple& b) {
    std::vector<std::string> slots = phi.object_vars;
    slots.insert(slots.end(), phi.param_vars.begin(), phi.param_vars.end());
    Evaluator ev(ctx.structure(), phi.body, slots);
    std::vector<bool> row;
    for (const auto& a : g) {
        Tuple v = a;
        v.insert(v.end(), b.begin(), b.end());
        row.push_back(ev(v));
    }
    return row;
}

inline std::vector<bool> picture_row(const DloContext&, const PartitionedFormula& phi,
                                     const std::vector<std::vector<Rational>>& g, const std::vector<Rational>& b) {
    std::vector<std::string> slots = phi.object_vars;
    slots.insert(slots.end(), phi.param_vars.begin(), phi.param_vars.end());
    dlo::QfEvaluator ev(dlo::qe_dlo(phi.body), slots);
    std::vector<bool> row;
    for (const auto& a : g) {
        std::vector<Rational> v = a;
        v.insert(v.end(), b.begin(), b.end());
        row.push_back(ev(v));
    }
    return row;
}

inline std::vector<Tuple> picture_params(const FiniteContext& ctx, const PictureWitness<FiniteContext>& w) {
    return ctx.params(ctx.full(), w.phi, 1);
}

inline std::vector<std::vector<Rational>> picture_params(const DloContext&, const PictureWitness<DloContext>& w) {
    std::set<Rational> ks;
    collect_numbers(w.phi.body, ks);
    for (const auto& p : w.g) ks.insert(p.begin(), p.end());
    return DloContext::tuples_over(dlo::grid({ks.begin(), ks.end()}, std::max<std::size_t>(1, w.phi.param_arity())),
                                   w.phi.param_arity());
}

} // namespace detail

/// For each multi-cut (X_0, ..., X_{n-1}) of the source, looks for parameters
/// b_i with X_i = {a : φ(g(a), b_i)}. Parameters range over every tuple of a
/// finite host, or over a grid meeting every order type over the picture's
/// values in the dense order.
template <class Ctx>
MopReport check_mop_witness(const Ctx& ctx, const PictureWitness<Ctx>& w, std::size_t budget = 1000000) {
    require_valid(w.source);
    if (w.g.size() != w.source.size()) throw InputError("the picture must send every element somewhere");
    for (std::size_t x = 0; x < w.g.size(); ++x)
        for (std::size_t y = x + 1; y < w.g.size(); ++y)
            if (w.g[x] == w.g[y]) throw InputError("the picture map is not injective");
    for (const auto& p : w.g)
        if (p.size() != w.phi.object_arity()) throw InputError("picture point of the wrong arity");

    MopReport rep;
    std::set<std::vector<bool>> definable;
    auto params = detail::picture_params(ctx, w);
    for (const auto& b : params) {
        if (rep.params_tried == budget) {
            rep.exhaustive = false;
            break;
        }
        ++rep.params_tried;
        definable.insert(detail::picture_row(ctx, w.phi, w.g, b));
    }
    auto cuts = enumerate_multicuts(w.source);
    rep.total = cuts.size();
    for (const auto& z : cuts) {
        bool ok = true;
        for (std::size_t i = 0; i < w.source.n && ok; ++i) {
            std::vector<bool> x(w.source.size(), false);
            for (std::size_t p = 0; p < z.cuts[i]; ++p) x[w.source.orders[i][p]] = true;
            ok = definable.count(x) > 0;
        }
        if (ok) ++rep.definable;
        else rep.missing.push_back(z);
    }
    return rep;
}

} // namespace opdim
