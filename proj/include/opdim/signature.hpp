#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "opdim/error.hpp"

namespace opdim {

struct RelationSymbol {
    std::string name;
    std::size_t arity = 2;

    friend bool operator==(const RelationSymbol&, const RelationSymbol&) = default;
};

/// Purely relational signature with constants. `numerals` admits rational
/// literals as terms (the dense-order signature).
struct Signature {
    std::vector<RelationSymbol> relations;
    std::vector<std::string> constants;
    bool numerals = false;

    const RelationSymbol* find_relation(const std::string& name) const {
        auto it = std::find_if(relations.begin(), relations.end(), [&](const auto& r) { return r.name == name; });
        return it == relations.end() ? nullptr : &*it;
    }
    std::size_t relation_index(const std::string& name) const {
        for (std::size_t i = 0; i < relations.size(); ++i)
            if (relations[i].name == name) return i;
        throw InputError("unknown relation '" + name + "'");
    }
    bool has_constant(const std::string& name) const {
        return std::find(constants.begin(), constants.end(), name) != constants.end();
    }

    void validate() const {
        std::set<std::string> names;
        for (const auto& r : relations) {
            if (r.name.empty()) throw InputError("empty relation name");
            if (r.arity == 0) throw InputError("relation '" + r.name + "' must have positive arity");
            if (!names.insert(r.name).second) throw InputError("duplicate symbol '" + r.name + "'");
        }
        for (const auto& c : constants)
            if (!names.insert(c).second) throw InputError("duplicate symbol '" + c + "'");
    }

    friend bool operator==(const Signature&, const Signature&) = default;

    /// {<} with rational literals: the language of (Q,<).
    static Signature dense_order() { return Signature{{{"<", 2}}, {}, true}; }

    /// {<_0, ..., <_{n-1}}, the language of n-multi-orders.
    static Signature multi_order(std::size_t n) {
        Signature s;
        for (std::size_t i = 0; i < n; ++i) s.relations.push_back({"<" + std::to_string(i), 2});
        return s;
    }
};

} // namespace opdim
