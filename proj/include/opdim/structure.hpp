#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "opdim/error.hpp"
#include "opdim/signature.hpp"

namespace opdim {

/// Universe size bound; searches over a structure are exhaustive, so every
/// structure is kept small.
inline constexpr std::size_t default_max_universe = 64;

using Tuple = std::vector<std::size_t>;

/// A finite relational model. Elements are opaque ids; their index order is
/// used only for deterministic iteration.
class FiniteStructure {
public:
    class Builder;

    const Signature& signature() const { return sig_; }
    std::size_t size() const { return universe_.size(); }
    const std::vector<std::string>& universe() const { return universe_; }
    const std::string& element_name(std::size_t i) const { return universe_.at(i); }

    std::size_t element_index(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw InputError("unknown element '" + name + "'");
        return it->second;
    }
    std::optional<std::size_t> find_element(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t constant(const std::string& name) const {
        auto it = constants_.find(name);
        if (it == constants_.end()) throw InputError("unknown constant '" + name + "'");
        return it->second;
    }
    const std::map<std::string, std::size_t>& constants() const { return constants_; }

    bool holds(std::size_t relation, const std::size_t* args) const {
        const Table& t = tables_[relation];
        std::size_t code = 0;
        for (std::size_t i = 0; i < t.arity; ++i) code = code * size() + args[i];
        return t.bits[code];
    }
    bool holds(const std::string& relation, const Tuple& args) const {
        std::size_t r = sig_.relation_index(relation);
        if (args.size() != sig_.relations[r].arity) throw InputError("arity mismatch for '" + relation + "'");
        return holds(r, args.data());
    }

    /// All tuples of a relation in lexicographic index order.
    std::vector<Tuple> tuples(const std::string& relation) const {
        std::size_t r = sig_.relation_index(relation);
        const Table& t = tables_[r];
        std::vector<Tuple> out;
        Tuple cur(t.arity, 0);
        for (std::size_t code = 0; code < t.bits.size(); ++code) {
            if (t.bits[code]) {
                std::size_t c = code;
                for (std::size_t i = t.arity; i-- > 0;) {
                    cur[i] = c % size();
                    c /= size();
                }
                out.push_back(cur);
            }
        }
        return out;
    }

    /// Induced substructure on `keep` (in the given order). Constants must be kept.
    FiniteStructure induced(const std::vector<std::size_t>& keep) const;

    /// Isomorphic copy: element i is renamed to the element at position perm[i].
    FiniteStructure relabeled(const std::vector<std::size_t>& perm) const;

    friend bool operator==(const FiniteStructure& a, const FiniteStructure& b) {
        if (!(a.sig_ == b.sig_) || a.universe_ != b.universe_ || a.constants_ != b.constants_) return false;
        for (std::size_t r = 0; r < a.tables_.size(); ++r)
            if (a.tables_[r].bits != b.tables_[r].bits) return false;
        return true;
    }

private:
    struct Table {
        std::size_t arity = 0;
        std::vector<bool> bits;
    };

    FiniteStructure() = default;

    Signature sig_;
    std::vector<std::string> universe_;
    std::map<std::string, std::size_t> index_;
    std::vector<Table> tables_;
    std::map<std::string, std::size_t> constants_;
};

class FiniteStructure::Builder {
public:
    Builder(Signature sig, std::vector<std::string> universe) {
        sig.validate();
        s_.sig_ = std::move(sig);
        s_.universe_ = std::move(universe);
        for (std::size_t i = 0; i < s_.universe_.size(); ++i)
            if (!s_.index_.emplace(s_.universe_[i], i).second)
                throw InputError("duplicate element '" + s_.universe_[i] + "'");
        for (const auto& r : s_.sig_.relations) {
            double cells = 1;
            for (std::size_t i = 0; i < r.arity; ++i) cells *= static_cast<double>(s_.universe_.size());
            if (cells > double(1u << 26)) throw BudgetExceeded("relation table for '" + r.name + "' is too large");
            std::size_t n = 1;
            for (std::size_t i = 0; i < r.arity; ++i) n *= s_.universe_.size();
            s_.tables_.push_back({r.arity, std::vector<bool>(n, false)});
        }
    }

    Builder& add(const std::string& relation, const Tuple& args) {
        std::size_t r = s_.sig_.relation_index(relation);
        const Table& t = s_.tables_[r];
        if (args.size() != t.arity) throw InputError("tuple of wrong arity for relation '" + relation + "'");
        std::size_t code = 0;
        for (auto a : args) {
            if (a >= s_.size()) throw InputError("tuple element outside the universe in '" + relation + "'");
            code = code * s_.size() + a;
        }
        s_.tables_[r].bits[code] = true;
        return *this;
    }
    Builder& add(const std::string& relation, const std::vector<std::string>& names) {
        Tuple t;
        for (const auto& n : names) t.push_back(s_.element_index(n));
        return add(relation, t);
    }
    Builder& constant(const std::string& name, std::size_t element) {
        if (!s_.sig_.has_constant(name)) throw InputError("'" + name + "' is not a constant of the signature");
        if (element >= s_.size()) throw InputError("constant '" + name + "' interpreted outside the universe");
        s_.constants_[name] = element;
        return *this;
    }

    FiniteStructure build(std::size_t max_universe = default_max_universe, bool allow_empty = false) && {
        if (s_.universe_.empty() && !allow_empty) throw InputError("empty universe");
        if (s_.universe_.size() > max_universe)
            throw BudgetExceeded("universe of size " + std::to_string(s_.universe_.size()) + " exceeds the cap " +
                                 std::to_string(max_universe));
        for (const auto& c : s_.sig_.constants)
            if (!s_.constants_.count(c)) throw InputError("constant '" + c + "' is not interpreted");
        return std::move(s_);
    }

private:
    FiniteStructure s_;
};

inline FiniteStructure FiniteStructure::induced(const std::vector<std::size_t>& keep) const {
    std::vector<std::string> names;
    std::vector<std::ptrdiff_t> where(size(), -1);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        names.push_back(element_name(keep[i]));
        where[keep.at(i)] = static_cast<std::ptrdiff_t>(i);
    }
    Builder b(sig_, names);
    for (const auto& r : sig_.relations) {
        for (const auto& t : tuples(r.name)) {
            Tuple mapped;
            bool inside = true;
            for (auto e : t) {
                if (where[e] < 0) {
                    inside = false;
                    break;
                }
                mapped.push_back(static_cast<std::size_t>(where[e]));
            }
            if (inside) b.add(r.name, mapped);
        }
    }
    for (const auto& [name, e] : constants_) {
        if (where[e] < 0) throw InputError("substructure drops the interpretation of constant '" + name + "'");
        b.constant(name, static_cast<std::size_t>(where[e]));
    }
    return std::move(b).build(default_max_universe, true);
}

inline FiniteStructure FiniteStructure::relabeled(const std::vector<std::size_t>& perm) const {
    if (perm.size() != size()) throw InputError("permutation has the wrong length");
    Builder b(sig_, universe_);
    for (const auto& r : sig_.relations) {
        for (auto t : tuples(r.name)) {
            for (auto& e : t) e = perm[e];
            b.add(r.name, t);
        }
    }
    for (const auto& [name, e] : constants_) b.constant(name, perm[e]);
    return std::move(b).build(default_max_universe, true);
}

/// The k-element chain 0 < 1 < ... < k-1 with element ids "0", "1", ....
inline FiniteStructure make_chain(std::size_t k, const std::string& relation = "<") {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back(std::to_string(i));
    FiniteStructure::Builder b(Signature{{{relation, 2}}, {}, false}, names);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) b.add(relation, Tuple{i, j});
    return std::move(b).build();
}

/// A k-element set in the empty signature (pure equality).
inline FiniteStructure make_pure_set(std::size_t k) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back(std::to_string(i));
    return FiniteStructure::Builder(Signature{}, names).build();
}

} // namespace opdim
