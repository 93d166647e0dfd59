#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "opdim/context.hpp"
#include "opdim/error.hpp"
#include "opdim/multiorder.hpp"
#include "opdim/ominimal.hpp"
#include "opdim/parser.hpp"
#include "opdim/patterns.hpp"
#include "opdim/ranks.hpp"
#include "opdim/structure.hpp"

namespace opdim::io {

using json = nlohmann::ordered_json;

/// The universe cap, overridable through OPDIM_MAX_UNIVERSE.
inline std::size_t max_universe() {
    if (const char* env = std::getenv("OPDIM_MAX_UNIVERSE")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        throw InputError("OPDIM_MAX_UNIVERSE must be a positive integer");
    }
    return default_max_universe;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
}

namespace detail {

template <class T>
T get(const json& j, const char* key, const std::string& what) {
    if (!j.is_object() || !j.contains(key)) throw InputError(what + " lacks the field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InputError(what + " has a malformed field '" + key + "'");
    }
}

} // namespace detail

inline FiniteStructure structure_from_json(const json& j) {
    const std::string what = "structure";
    json sig = j.contains("signature") ? j.at("signature") : json::object();
    Signature s;
    if (sig.contains("relations"))
        for (const auto& r : sig.at("relations"))
            s.relations.push_back({detail::get<std::string>(r, "name", "relation symbol"),
                                   detail::get<std::size_t>(r, "arity", "relation symbol")});
    if (sig.contains("constants")) s.constants = detail::get<std::vector<std::string>>(sig, "constants", "signature");
    auto universe = detail::get<std::vector<std::string>>(j, "universe", what);
    FiniteStructure::Builder b(s, universe);
    if (j.contains("relations")) {
        if (!j.at("relations").is_object()) throw InputError("structure relations must be an object");
        for (const auto& [name, tuples] : j.at("relations").items()) {
            if (!s.find_relation(name)) throw InputError("relation '" + name + "' is not in the signature");
            for (const auto& t : tuples) {
                if (!t.is_array()) throw InputError("relation '" + name + "' lists a non-tuple");
                b.add(name, t.get<std::vector<std::string>>());
            }
        }
    }
    if (j.contains("constants"))
        for (const auto& [name, elem] : j.at("constants").items()) {
            auto it = std::find(universe.begin(), universe.end(), elem.get<std::string>());
            if (it == universe.end()) throw InputError("constant '" + name + "' names an unknown element");
            b.constant(name, static_cast<std::size_t>(it - universe.begin()));
        }
    return std::move(b).build(max_universe());
}

inline json structure_to_json(const FiniteStructure& m) {
    json sig = {{"relations", json::array()}, {"constants", m.signature().constants}};
    json rels = json::object();
    for (const auto& r : m.signature().relations) {
        sig["relations"].push_back({{"name", r.name}, {"arity", r.arity}});
        json ts = json::array();
        for (const auto& t : m.tuples(r.name)) {
            json row = json::array();
            for (auto e : t) row.push_back(m.element_name(e));
            ts.push_back(row);
        }
        rels[r.name] = ts;
    }
    json consts = json::object();
    for (const auto& [c, e] : m.constants()) consts[c] = m.element_name(e);
    return {{"signature", sig}, {"universe", m.universe()}, {"relations", rels}, {"constants", consts}};
}

inline MultiOrder multiorder_from_json(const json& j) {
    auto n = detail::get<std::size_t>(j, "n", "multi-order");
    auto universe = detail::get<std::vector<std::string>>(j, "universe", "multi-order");
    auto orders = detail::get<std::vector<std::vector<std::string>>>(j, "orders", "multi-order");
    auto b = make_multiorder(n, universe, orders);
    if (auto v = validate(b)) throw InputError("invalid multi-order at order " + std::to_string(v->order) + ": " + v->message);
    return b;
}

inline json multiorder_to_json(const MultiOrder& b) {
    json orders = json::array();
    for (const auto& o : b.orders) {
        json row = json::array();
        for (auto e : o) row.push_back(b.universe[e]);
        orders.push_back(row);
    }
    return {{"n", b.n}, {"universe", b.universe}, {"orders", orders}};
}

inline json rank_to_json(const RankValue& r) {
    if (r.at_least_cap) return {{"at_least", r.cap}};
    return {{"exact", r.value}};
}

template <class Ctx>
json param_to_json(const Ctx& ctx, const typename Ctx::Param& b) {
    return ctx.show_param(b);
}

template <class Ctx>
json rank_witness_to_json(const Ctx& ctx, const RankWitness<Ctx>& w, const FormulaSet& delta) {
    json inst = json::array();
    for (const auto& r : w.instances)
        inst.push_back({{"formula", to_string(delta[r.formula].body)}, {"param", param_to_json(ctx, r.param)}});
    json cells = json::array();
    for (const auto& c : w.cells) cells.push_back(rank_witness_to_json(ctx, c, delta));
    json out = {{"rank", rank_to_json(w.rank)}, {"point", ctx.show_point(w.set)}};
    if (!inst.empty()) out["instances"] = inst;
    if (!cells.empty()) out["cells"] = cells;
    return out;
}

template <class Ctx>
json pattern_to_json(const Ctx& ctx, const Pattern<Ctx>& p) {
    json formulas = json::array(), witnesses = json::array();
    for (const auto& f : p.formulas) formulas.push_back(to_string(f.body));
    for (const auto& row : p.witnesses) {
        json r = json::array();
        for (const auto& b : row) r.push_back(param_to_json(ctx, b));
        witnesses.push_back(r);
    }
    json params = json::array();
    for (const auto& f : p.formulas) params.push_back(f.param_vars);
    return {{"depth", p.depth()}, {"length", p.length}, {"formulas", formulas}, {"params", params},
            {"witnesses", witnesses}};
}

/// Formulas are read in the signature given; the object variables are
/// `vars`, and every other free variable is a parameter, unless "params"
/// lists them explicitly per formula.
template <class Ctx>
Pattern<Ctx> pattern_from_json(const Ctx& ctx, const json& j, const Signature& sig,
                               const std::vector<std::string>& vars) {
    Pattern<Ctx> p;
    p.length = detail::get<std::size_t>(j, "length", "pattern");
    auto formulas = detail::get<std::vector<std::string>>(j, "formulas", "pattern");
    if (j.contains("depth") && detail::get<std::size_t>(j, "depth", "pattern") != formulas.size())
        throw InputError("pattern depth does not match its formulas");
    std::vector<std::vector<std::string>> params;
    if (j.contains("params")) params = detail::get<std::vector<std::vector<std::string>>>(j, "params", "pattern");
    for (std::size_t i = 0; i < formulas.size(); ++i) {
        Formula body = parse_formula(formulas[i], sig);
        if (i < params.size()) p.formulas.push_back(make_partitioned(body, vars, params[i]));
        else p.formulas.push_back(partition(body, vars));
    }
    auto rows = detail::get<std::vector<std::vector<std::vector<std::string>>>>(j, "witnesses", "pattern");
    for (const auto& row : rows) {
        std::vector<typename Ctx::Param> r;
        for (const auto& b : row) r.push_back(ctx.parse_param(b));
        p.witnesses.push_back(std::move(r));
    }
    return p;
}

inline json box_to_json(const std::vector<std::pair<Rational, Rational>>& box) {
    json out = json::array();
    for (const auto& [lo, hi] : box) out.push_back({to_string(lo), to_string(hi)});
    return out;
}

inline json dimension_to_json(const DimensionReport& r) {
    json out = {{"dim", r.empty ? json("empty") : json(r.dim)}, {"method", to_string(r.method)}};
    if (r.method == DimensionMethod::projection && !r.empty) {
        out["coords"] = r.coords;
        out["box"] = box_to_json(r.box);
    }
    return out;
}

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

} // namespace opdim::io
