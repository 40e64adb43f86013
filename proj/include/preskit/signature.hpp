#pragma once

#include <map>
#include <string>

#include "preskit/errors.hpp"

namespace preskit {

/// A first-order signature: function symbols (arity >= 0, arity 0 are the
/// constants) and relation symbols (arity >= 1). Names are unique across
/// both kinds.
struct Signature {
    std::map<std::string, int> functions;
    std::map<std::string, int> relations;

    bool has_function(const std::string& name) const { return functions.count(name) != 0; }
    bool has_relation(const std::string& name) const { return relations.count(name) != 0; }

    int function_arity(const std::string& name) const {
        auto it = functions.find(name);
        if (it == functions.end()) throw ValidationError("unknown function symbol '" + name + "'");
        return it->second;
    }

    int relation_arity(const std::string& name) const {
        auto it = relations.find(name);
        if (it == relations.end()) throw ValidationError("unknown relation symbol '" + name + "'");
        return it->second;
    }

    void validate() const {
        for (const auto& [name, arity] : functions) {
            if (arity < 0) throw ValidationError("function '" + name + "' has negative arity");
            if (relations.count(name))
                throw ValidationError("symbol '" + name + "' declared as both function and relation");
        }
        for (const auto& [name, arity] : relations) {
            if (arity < 1) throw ValidationError("relation '" + name + "' must have arity >= 1");
        }
    }
};

} // namespace preskit
