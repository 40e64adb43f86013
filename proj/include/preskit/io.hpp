#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "preskit/blocktype.hpp"
#include "preskit/errors.hpp"
#include "preskit/parser.hpp"
#include "preskit/structure.hpp"

namespace preskit {

using Json = nlohmann::json;

inline Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        throw ParseError(what + ": " + e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace detail {

inline int require_int(const Json& j, const std::string& what) {
    if (!j.is_number_integer()) throw ParseError(what + " must be an integer");
    return j.get<int>();
}

inline Tuple read_tuple(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array of integers");
    Tuple t;
    for (const auto& e : j) t.push_back(require_int(e, what + " entry"));
    return t;
}

} // namespace detail

/// Default cap on universe sizes; every engine is exponential brute force.
inline constexpr int default_max_universe = 64;

/// Structure file:
/// {"universe": n, "functions": {name: {"arity": k, "table": [..]}},
///  "relations": {name: {"arity": k, "tuples": [[..]..]}},
///  "constants": {name: v}}
/// Table entries are listed in lexicographic order of the input tuples.
inline FiniteStructure load_structure(const std::string& text,
                                      int max_universe = default_max_universe) {
    Json j = parse_json(text, "structure file");
    if (!j.is_object() || !j.contains("universe"))
        throw ParseError("structure file must be an object with a \"universe\" field");
    FiniteStructure m;
    m.size = detail::require_int(j["universe"], "universe");
    if (m.size < 1) throw ValidationError("universe size must be positive");
    if (m.size > max_universe)
        throw ValidationError("universe size " + std::to_string(m.size) +
                              " exceeds the configured maximum " + std::to_string(max_universe));
    if (j.contains("functions")) {
        if (!j["functions"].is_object()) throw ParseError("\"functions\" must be an object");
        for (auto it = j["functions"].begin(); it != j["functions"].end(); ++it) {
            const auto& f = it.value();
            int arity = detail::require_int(f.at("arity"), "function '" + it.key() + "' arity");
            std::vector<int> table;
            for (const auto& e : f.at("table"))
                table.push_back(detail::require_int(e, "function '" + it.key() + "' table entry"));
            m.signature.functions[it.key()] = arity;
            m.function_tables[it.key()] = std::move(table);
        }
    }
    if (j.contains("constants")) {
        if (!j["constants"].is_object()) throw ParseError("\"constants\" must be an object");
        for (auto it = j["constants"].begin(); it != j["constants"].end(); ++it) {
            if (m.signature.functions.count(it.key()))
                throw ValidationError("symbol '" + it.key() + "' declared twice");
            m.signature.functions[it.key()] = 0;
            m.function_tables[it.key()] = {detail::require_int(it.value(), "constant '" + it.key() + "'")};
        }
    }
    if (j.contains("relations")) {
        if (!j["relations"].is_object()) throw ParseError("\"relations\" must be an object");
        for (auto it = j["relations"].begin(); it != j["relations"].end(); ++it) {
            const auto& r = it.value();
            int arity = detail::require_int(r.at("arity"), "relation '" + it.key() + "' arity");
            TupleSet tuples;
            for (const auto& e : r.at("tuples"))
                tuples.insert(detail::read_tuple(e, "relation '" + it.key() + "' tuple"));
            m.signature.relations[it.key()] = arity;
            m.relation_sets[it.key()] = std::move(tuples);
        }
    }
    m.validate();
    return m;
}

/// Byte-normal form: arity-0 functions are emitted under "constants",
/// objects carry sorted keys, tuple lists are sorted, two-space indent,
/// trailing newline.
inline std::string serialize_structure(const FiniteStructure& m) {
    Json j;
    j["universe"] = m.size;
    j["functions"] = Json::object();
    j["constants"] = Json::object();
    j["relations"] = Json::object();
    for (const auto& [name, arity] : m.signature.functions) {
        if (arity == 0) {
            j["constants"][name] = m.function_tables.at(name)[0];
        } else {
            j["functions"][name] = Json{{"arity", arity}, {"table", m.function_tables.at(name)}};
        }
    }
    for (const auto& [name, arity] : m.signature.relations) {
        Json tuples = Json::array();
        for (const auto& t : m.relation_sets.at(name)) tuples.push_back(t);
        j["relations"][name] = Json{{"arity", arity}, {"tuples", tuples}};
    }
    return j.dump(2) + "\n";
}

/// Property file: {"arity": k, "tuples": [[..]..]}.
inline Property load_property(const std::string& text) {
    Json j = parse_json(text, "property file");
    if (!j.is_object() || !j.contains("arity") || !j.contains("tuples"))
        throw ParseError("property file must carry \"arity\" and \"tuples\"");
    Property p(detail::require_int(j["arity"], "arity"), {});
    if (p.arity < 0) throw ValidationError("property arity must be nonnegative");
    for (const auto& e : j["tuples"]) p.tuples.insert(detail::read_tuple(e, "property tuple"));
    for (const auto& t : p.tuples)
        if (static_cast<int>(t.size()) != p.arity)
            throw ValidationError("property tuple has length " + std::to_string(t.size()) +
                                  ", expected arity " + std::to_string(p.arity));
    return p;
}

inline Json property_to_json(const Property& p) {
    Json tuples = Json::array();
    for (const auto& t : p.tuples) tuples.push_back(t);
    return Json{{"arity", p.arity}, {"tuples", tuples}};
}

inline std::string serialize_property(const Property& p) { return property_to_json(p).dump(2) + "\n"; }

/// Partition file: {"blocks": [[..]..]} with arity-1 blocks as element lists.
inline NamedPartition load_partition(const std::string& text) {
    Json j = parse_json(text, "partition file");
    if (!j.is_object() || !j.contains("blocks"))
        throw ParseError("partition file must carry \"blocks\"");
    NamedPartition part;
    for (const auto& b : j["blocks"]) {
        Property block(1, {});
        for (const auto& e : b) block.tuples.insert(Tuple{detail::require_int(e, "partition element")});
        part.blocks.push_back(std::move(block));
    }
    return part;
}

inline Json partition_to_json(const NamedPartition& part) {
    Json blocks = Json::array();
    for (const auto& b : part.blocks) {
        Json arr = Json::array();
        for (const auto& t : b.tuples) arr.push_back(t[0]);
        blocks.push_back(arr);
    }
    return Json{{"blocks", blocks}};
}

/// Type file: {"parameterBlocks": [["x1","x2"],..], "resultBlock": ["y"],
/// "formulas": ["<formula text>"..]}.
inline BlockType load_block_type(const std::string& text, const Signature& sig) {
    Json j = parse_json(text, "type file");
    if (!j.is_object() || !j.contains("resultBlock") || !j.contains("formulas"))
        throw ParseError("type file must carry \"resultBlock\" and \"formulas\"");
    BlockType t;
    if (j.contains("parameterBlocks"))
        for (const auto& b : j["parameterBlocks"]) {
            std::vector<std::string> blk;
            for (const auto& v : b) blk.push_back(v.get<std::string>());
            t.parameter_blocks.push_back(std::move(blk));
        }
    for (const auto& v : j["resultBlock"]) t.result_block.push_back(v.get<std::string>());
    for (const auto& f : j["formulas"]) t.formulas.push_back(parse_formula(f.get<std::string>(), sig));
    t.validate(sig);
    return t;
}

inline Json block_type_to_json(const BlockType& t) {
    Json blocks = Json::array();
    for (const auto& b : t.parameter_blocks) blocks.push_back(b);
    Json formulas = Json::array();
    for (const auto& f : t.formulas) formulas.push_back(f.unparse());
    return Json{{"parameterBlocks", blocks}, {"resultBlock", t.result_block}, {"formulas", formulas}};
}

/// Suite file: {"suite": [<type object>..]}.
inline FormulaSuite load_suite(const std::string& text, const Signature& sig) {
    Json j = parse_json(text, "suite file");
    if (!j.is_object() || !j.contains("suite")) throw ParseError("suite file must carry \"suite\"");
    FormulaSuite s;
    for (const auto& e : j["suite"]) s.entries.push_back(load_block_type(e.dump(), sig));
    s.validate(sig);
    return s;
}

} // namespace preskit
