#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "preskit/algebra.hpp"
#include "preskit/eval.hpp"
#include "preskit/graphs.hpp"
#include "preskit/io.hpp"
#include "preskit/modelbuild.hpp"
#include "preskit/orbits.hpp"
#include "preskit/preserve.hpp"

namespace preskit {

/// Exit codes: 0 property holds / success, 1 property fails, 2 input error,
/// 3 budget exceeded.
struct RunReport {
    Json body;
    int exit_code = 0;
    double elapsed_ms = 0.0;
};

namespace cli_detail {

struct GlobalOptions {
    long long budget = EvalOptions{}.budget;
    unsigned long long seed = 20240901ULL;
    int json_indent = 2;
    int max_universe = default_max_universe;

    EvalOptions eval() const { return EvalOptions{budget}; }
};

/// Inline JSON when the argument starts with '{', file contents otherwise.
inline std::string resolve_input(const std::string& arg) {
    if (!arg.empty() && arg[0] == '{') return arg;
    return read_file(arg);
}

inline FiniteStructure arg_structure(const std::string& arg, const GlobalOptions& g) {
    return load_structure(resolve_input(arg), g.max_universe);
}

/// A type argument: a type file, inline type JSON, or bare formula text.
/// For bare text the first `props` free variables (sorted) become
/// single-variable parameter blocks and the rest the result block.
inline BlockType arg_type(const std::string& arg, const Signature& sig, std::size_t props) {
    std::string text = arg;
    bool is_json = !arg.empty() && arg[0] == '{';
    if (!is_json && std::filesystem::exists(arg)) {
        text = read_file(arg);
        is_json = !text.empty() && text[0] == '{';
    }
    if (is_json) return load_block_type(text, sig);
    Formula f = parse_formula(text, sig);
    std::vector<std::string> vars(f.free_vars().begin(), f.free_vars().end());
    if (vars.size() < props + 1)
        throw ValidationError("formula needs at least " + std::to_string(props + 1) +
                              " free variables for " + std::to_string(props) +
                              " parameter properties");
    BlockType t;
    for (std::size_t i = 0; i < props; ++i) t.parameter_blocks.push_back({vars[i]});
    t.result_block.assign(vars.begin() + static_cast<long>(props), vars.end());
    t.formulas = {std::move(f)};
    t.validate(sig);
    return t;
}

/// Parameter tuples: blocks separated by ';', elements by ','. Empty text
/// means no parameter blocks.
inline std::vector<Tuple> parse_params(const std::string& text) {
    std::vector<Tuple> out;
    if (text.empty()) return out;
    std::stringstream blocks(text);
    std::string block;
    while (std::getline(blocks, block, ';')) {
        Tuple t;
        std::stringstream items(block);
        std::string item;
        while (std::getline(items, item, ',')) {
            if (item.empty()) continue;
            try {
                t.push_back(std::stoi(item));
            } catch (const std::exception&) {
                throw ValidationError("bad parameter element '" + item + "'");
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

inline Json param_tuple_json(const ParamTuple& p) {
    Json arr = Json::array();
    for (const auto& t : p) arr.push_back(t);
    return arr;
}

inline Json report_json(const PreservationReport& rep) {
    Json verdicts = Json::object();
    Json witnesses = Json::object();
    for (Mode m : all_modes) {
        verdicts[mode_name(m)] = rep.verdict(m);
        if (auto w = rep.witness(m)) witnesses[mode_name(m)] = param_tuple_json(*w);
    }
    Json flags = Json::array();
    for (const auto& t : rep.empty_solution_flags) flags.push_back(t);
    return Json{{"verdicts", verdicts},
                {"witnesses", witnesses},
                {"emptyProductFlag", rep.empty_product_flag},
                {"emptySolutionFlags", flags}};
}

inline Json trace_json(const Trace& tr) {
    Json family = Json::array();
    for (const auto& o : tr.family) {
        Json members = Json::array();
        for (const auto& t : o.members.tuples) members.push_back(t);
        family.push_back(Json{{"representative", o.representative}, {"members", members}});
    }
    return Json{{"arity", tr.arity}, {"family", family}, {"disjoint", tr.disjoint_flag}};
}

inline Json structure_json(const FiniteStructure& m) {
    return parse_json(serialize_structure(m), "serialized structure");
}

} // namespace cli_detail

inline Json corpus_summary(const std::string& directory, const cli_detail::GlobalOptions& g,
                           std::ostream& err);

/// Parses and runs one command line; the report body goes to `out`, the
/// timing diagnostic to `err` (kept out of the body so reports stay
/// byte-stable).
inline RunReport dispatch(const std::vector<std::string>& args, std::ostream& out,
                          std::ostream& err) {
    auto started = std::chrono::steady_clock::now();
    RunReport run;
    cli_detail::GlobalOptions g;

    CLI::App app{"preservation-semantics toolkit for finite first-order structures", "preskit"};
    app.require_subcommand(1);
    app.add_option("--budget", g.budget, "work budget for the brute-force engines");
    app.add_option("--seed", g.seed, "seed echoed into reports for randomized suites");
    app.add_option("--json-indent", g.json_indent, "indent of the report JSON");
    app.add_option("--max-universe", g.max_universe, "largest accepted universe size");

    std::string arg_structure_path, arg_type_text, arg_props, arg_target, arg_mode;
    std::string arg_params, arg_formula, arg_assign, arg_prop, arg_equiv, arg_partition, arg_op;
    std::string arg_theory, arg_suite, arg_sub, arg_dir;
    int arg_k = 2, arg_n = 2, arg_counting = 0;

    CLI::App* c_eval = app.add_subcommand("eval", "evaluate a formula or a type's solution set");
    c_eval->add_option("--structure", arg_structure_path)->required();
    c_eval->add_option("--formula", arg_formula);
    c_eval->add_option("--assign", arg_assign);
    c_eval->add_option("--type", arg_type_text);
    c_eval->add_option("--params", arg_params);

    CLI::App* c_check = app.add_subcommand("check", "preservation verdicts for a type");
    c_check->add_option("--structure", arg_structure_path)->required();
    c_check->add_option("--type", arg_type_text)->required();
    c_check->add_option("--props", arg_props);
    c_check->add_option("--target", arg_target)->required();
    c_check->add_option("--mode", arg_mode);

    CLI::App* c_trace = app.add_subcommand("trace", "canonical trace of a type");
    c_trace->add_option("--structure", arg_structure_path)->required();
    c_trace->add_option("--type", arg_type_text)->required();
    c_trace->add_option("--params", arg_params);

    CLI::App* c_aut = app.add_subcommand("aut", "automorphism group generators and order");
    c_aut->add_option("--structure", arg_structure_path)->required();

    CLI::App* c_algebra = app.add_subcommand("algebra", "subalgebra and congruence checks");
    c_algebra->require_subcommand(1);
    CLI::App* c_sub = c_algebra->add_subcommand("sub", "subuniverse test");
    c_sub->add_option("--structure", arg_structure_path)->required();
    c_sub->add_option("--prop", arg_prop)->required();
    CLI::App* c_cong = c_algebra->add_subcommand("cong", "congruence test");
    c_cong->add_option("--structure", arg_structure_path)->required();
    c_cong->add_option("--equiv", arg_equiv)->required();
    CLI::App* c_congs = c_algebra->add_subcommand("congs", "enumerate all congruences");
    c_congs->add_option("--structure", arg_structure_path)->required();
    CLI::App* c_graded = c_algebra->add_subcommand("graded", "graded partition check");
    c_graded->add_option("--structure", arg_structure_path)->required();
    c_graded->add_option("--partition", arg_partition)->required();
    c_graded->add_option("--op", arg_op)->required();

    CLI::App* c_graph = app.add_subcommand("graph", "graph characterizations");
    c_graph->require_subcommand(1);
    CLI::App* c_partite = c_graph->add_subcommand("partite", "k-partition search and check");
    c_partite->add_option("--structure", arg_structure_path)->required();
    c_partite->add_option("--k", arg_k);
    c_partite->add_option("--partition", arg_partition);
    CLI::App* c_components = c_graph->add_subcommand("components", "connected components");
    c_components->add_option("--structure", arg_structure_path)->required();
    c_components->add_option("--prop", arg_prop);
    CLI::App* c_diameter = c_graph->add_subcommand("diameter", "distance witnesses");
    c_diameter->add_option("--structure", arg_structure_path)->required();
    CLI::App* c_subdiv = c_graph->add_subcommand("subdivide", "edge subdivision with layers");
    c_subdiv->add_option("--structure", arg_structure_path)->required();
    c_subdiv->add_option("--n", arg_n);

    CLI::App* c_henkin = app.add_subcommand("henkin", "canonical model of a ground theory");
    c_henkin->add_option("--theory", arg_theory)->required();
    c_henkin->add_option("--suite", arg_suite);

    CLI::App* c_tv = app.add_subcommand("tv", "Tarski-Vaught test over a formula suite");
    c_tv->add_option("--structure", arg_structure_path)->required();
    c_tv->add_option("--sub", arg_sub)->required();
    c_tv->add_option("--suite", arg_suite);
    c_tv->add_option("--counting", arg_counting);

    CLI::App* c_corpus = app.add_subcommand("corpus", "run a fixture corpus");
    c_corpus->add_option("directory", arg_dir)->required();

    Json result;
    int exit_code = 0;
    try {
        try {
            std::vector<std::string> reversed(args.rbegin(), args.rend());
            app.parse(std::move(reversed));
        } catch (const CLI::CallForHelp&) {
            std::ostringstream help;
            help << app.help();
            out << help.str();
            run.exit_code = 0;
            return run;
        } catch (const CLI::ParseError& e) {
            throw ValidationError(std::string("argument error: ") + e.what());
        }
        EvalOptions opts = g.eval();

        if (c_eval->parsed()) {
            FiniteStructure m = cli_detail::arg_structure(arg_structure_path, g);
            if (!arg_formula.empty()) {
                Formula f = parse_formula(arg_formula, m.signature);
                Assignment a;
                if (!arg_assign.empty())
                    for (const auto& pair : cli_detail::split_list(arg_assign)) {
                        auto eq = pair.find('=');
                        if (eq == std::string::npos)
                            throw ValidationError("bad assignment '" + pair + "'");
                        a.values[pair.substr(0, eq)] = std::stoi(pair.substr(eq + 1));
                    }
                bool value = eval_formula(m, f, a, opts);
                result = Json{{"value", value}};
                exit_code = value ? 0 : 1;
            } else if (!arg_type_text.empty()) {
                auto params = cli_detail::parse_params(arg_params);
                BlockType t = cli_detail::arg_type(arg_type_text, m.signature, params.size());
                Property sol = solution_set(m, t, params, opts);
                result = Json{{"solutionSet", property_to_json(sol)}};
            } else {
                throw ValidationError("eval needs --formula or --type");
            }
        } else if (c_check->parsed()) {
            FiniteStructure m = cli_detail::arg_structure(arg_structure_path, g);
            std::vector<Property> ps;
            if (!arg_props.empty())
                for (const auto& item : cli_detail::split_list(arg_props))
                    ps.push_back(load_property(cli_detail::resolve_input(item)));
            BlockType t = cli_detail::arg_type(arg_type_text, m.signature, ps.size());
            Property q = load_property(cli_detail::resolve_input(arg_target));
            PreservationReport rep = full_report(m, t, ps, q, opts);
            result = cli_detail::report_json(rep);
            if (!arg_mode.empty()) exit_code = rep.verdict(parse_mode(arg_mode)) ? 0 : 1;
        } else if (c_trace->parsed()) {
            FiniteStructure m = cli_detail::arg_structure(arg_structure_path, g);
            auto params = cli_detail::parse_params(arg_params);
            BlockType t = cli_detail::arg_type(arg_type_text, m.signature, params.size());
            Trace tr = canonical_trace(m, t, params, opts);
            result = cli_detail::trace_json(tr);
        } else if (c_aut->parsed()) {
            FiniteStructure m = cli_detail::arg_structure(arg_structure_path, g);
            AutomorphismGroup group = automorphisms(m, opts);
            Json gens = Json::array();
            for (const auto& p : group.generators) gens.push_back(p);
            result = Json{{"order", group.order},
                          {"generators", gens},
                          {"chainOrbitSizes", group.chain_orbit_sizes}};
        } else if (c_sub->parsed()) {
            FiniteStructure m = cli_detail::arg_structure(arg_structure_path, g);
            Property p = load_property(cli_detail::resolve_input(arg_prop));
            auto v = is_subuniverse(m, p, opts);
            result = Json{{"viaPreservation", v.via_preservation}, {"viaClosure", v.via_closure}};
            exit_code = v.via_closure ? 0 : 1;
        } else if (c_cong->parsed()) {
            FiniteStructure m = cli_detail::arg_structure(arg_structure_path, g);
            auto e = EquivalenceRelation::from_property(
                m.size, load_property(cli_detail::resolve_input(arg_equiv)));
            auto v = is_congruence(m, e, opts);
            result = Json{{"viaPreservation", v.via_preservation},
                          {"viaCompatibility", v.via_compatibility}};
            exit_code = v.via_compatibility ? 0 : 1;
        } else if (c_congs->parsed()) {
            FiniteStructure m = cli_detail::arg_structure(arg_structure_path, g);
            Json list = Json::array();
            for (const auto& e : enumerate_congruences(m, opts)) {
                Json blocks = Json::array();
                for (const auto& b : e.blocks()) blocks.push_back(std::vector<int>(b.begin(), b.end()));
                list.push_back(Json{{"blocks", blocks}});
            }
            result = Json{{"congruences", list}, {"count", list.size()}};
        } else if (c_graded->parsed()) {
            FiniteStructure m = cli_detail::arg_structure(arg_structure_path, g);
            NamedPartition part = load_partition(cli_detail::resolve_input(arg_partition));
            auto v = check_graded_partition(m, arg_op, part, opts);
            Json grades = Json::object();
            for (const auto& [idx, target] : v.grade_map) {
                std::string key;
                for (std::size_t i = 0; i < idx.size(); ++i)
                    key += (i ? "," : "") + std::to_string(idx[i]);
                grades[key] = target;
            }
            result = Json{{"ok", v.ok}, {"gradeMap", grades}};
            exit_code = v.ok ? 0 : 1;
        } else if (c_partite->parsed()) {
            Graph graph = Graph::from_structure(cli_detail::arg_structure(arg_structure_path, g));
            if (!arg_partition.empty()) {
                NamedPartition part = load_partition(cli_detail::resolve_input(arg_partition));
                bool ok = check_partition(graph, part, opts);
                result = Json{{"proper", ok}};
                exit_code = ok ? 0 : 1;
            } else {
                auto part = find_k_partition(graph, arg_k, opts);
                if (part) {
                    result = Json{{"found", true}, {"partition", partition_to_json(*part)}};
                } else {
                    result = Json{{"found", false}};
                    exit_code = 1;
                }
            }
        } else if (c_components->parsed()) {
            Graph graph = Graph::from_structure(cli_detail::arg_structure(arg_structure_path, g));
            Json comps = Json::array();
            for (const auto& c : minimal_preserved_sets(graph, opts)) {
                Json arr = Json::array();
                for (const auto& t : c.tuples) arr.push_back(t[0]);
                comps.push_back(arr);
            }
            result = Json{{"components", comps},
                          {"shape", graph_shape_name(emptiness_completeness(graph, opts))}};
            if (!arg_prop.empty()) {
                Property p = load_property(cli_detail::resolve_input(arg_prop));
                auto v = component_analysis(graph, p, opts);
                result["isUnionOfComponents"] = v.is_union_of_components;
                result["viaPreservation"] = v.via_preservation;
                exit_code = v.is_union_of_components ? 0 : 1;
            }
        } else if (c_diameter->parsed()) {
            Graph graph = Graph::from_structure(cli_detail::arg_structure(arg_structure_path, g));
            auto rep = distance_witnesses(graph, opts);
            Json witnesses = Json::object();
            for (const auto& [n, w] : rep.witnesses)
                witnesses[std::to_string(n)] = w ? Json(*w) : Json(nullptr);
            result = Json{{"witnesses", witnesses}, {"diameter", rep.diameter}};
        } else if (c_subdiv->parsed()) {
            Graph graph = Graph::from_structure(cli_detail::arg_structure(arg_structure_path, g));
            auto sd = subdivide(graph, arg_n, opts);
            Json layers = Json::array();
            for (const auto& layer : sd.layers) {
                Json arr = Json::array();
                for (const auto& t : layer.tuples) arr.push_back(t[0]);
                layers.push_back(arr);
            }
            result = Json{{"graph", cli_detail::structure_json(sd.graph.structure)},
                          {"layers", layers}};
        } else if (c_henkin->parsed()) {
            Json tj = parse_json(cli_detail::resolve_input(arg_theory), "theory file");
            std::vector<std::string> constants, sentences;
            for (const auto& c : tj.at("constants")) constants.push_back(c.get<std::string>());
            for (const auto& s : tj.at("sentences")) sentences.push_back(s.get<std::string>());
            GroundTheory t = make_ground_theory(constants, sentences, tj.value("depth", 0));
            CanonicalModel cm = build_canonical_model(t, opts);
            FormulaSuite suite;
            if (!arg_suite.empty()) {
                suite = load_suite(cli_detail::resolve_input(arg_suite), cm.model.signature);
            } else {
                // Default suite: every relation and function shape.
                for (const auto& [name, arity] : t.signature.relations) {
                    auto xs = detail::fresh_vars(t.signature, "x", arity - 1);
                    std::string y = detail::fresh_var(t.signature, "y");
                    std::vector<Term> terms;
                    std::vector<std::vector<std::string>> blocks;
                    for (const auto& x : xs) {
                        terms.push_back(Term::var(x));
                        blocks.push_back({x});
                    }
                    terms.push_back(Term::var(y));
                    suite.entries.push_back(
                        BlockType{blocks, {y}, {Formula::atom(name, std::move(terms))}});
                }
                for (const auto& [name, arity] : t.signature.functions)
                    if (arity >= 1) suite.entries.push_back(function_graph_type(t.signature, name));
            }
            HenkinReport rep = check_preserving_condition(cm.model, suite, opts);
            Json class_map = Json::object();
            for (const auto& [c, e] : cm.class_map) class_map[c] = e;
            result = Json{{"model", cli_detail::structure_json(cm.model)},
                          {"classMap", class_map},
                          {"instances", rep.instances.size()},
                          {"violations", rep.violations}};
            exit_code = rep.pass ? 0 : 1;
        } else if (c_tv->parsed()) {
            FiniteStructure m = cli_detail::arg_structure(arg_structure_path, g);
            Property small = load_property(cli_detail::resolve_input(arg_sub));
            auto emb = SubstructureEmbedding::make(std::move(m), std::move(small), opts);
            FormulaSuite suite;
            if (!arg_suite.empty())
                suite = load_suite(cli_detail::resolve_input(arg_suite), emb.big.signature);
            if (arg_counting > 0) {
                FormulaSuite counting = counting_suite(arg_counting, emb.big.signature);
                for (auto& e : counting.entries) suite.entries.push_back(std::move(e));
            }
            if (suite.entries.empty())
                throw ValidationError("tv needs --suite or --counting");
            TvReport rep = tarski_vaught_test(emb, suite, opts);
            Json instances = Json::array();
            for (const auto& inst : rep.instances)
                instances.push_back(Json{{"suiteIndex", inst.suite_index},
                                         {"params", cli_detail::param_tuple_json(inst.params)},
                                         {"class", tv_class_name(inst.cls)}});
            result = Json{{"instances", instances},
                          {"disjoint", rep.disjoint},
                          {"preserving", rep.preserving},
                          {"fail", rep.failed},
                          {"pass", rep.pass}};
            exit_code = rep.pass ? 0 : 1;
        } else if (c_corpus->parsed()) {
            result = corpus_summary(arg_dir, g, err);
            exit_code = result.at("failed").get<int>() == 0 ? 0 : 1;
        }
    } catch (const BudgetError& e) {
        err << "budget error: " << e.what() << "\n";
        result = Json{{"error", e.what()}};
        exit_code = 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        result = Json{{"error", e.what()}};
        exit_code = 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        result = Json{{"error", e.what()}};
        exit_code = 2;
    }

    run.body = Json{{"command", args},
                    {"result", result},
                    {"budget", Json{{"limit", g.budget}, {"maxUniverse", g.max_universe}}},
                    {"exit", exit_code}};
    run.exit_code = exit_code;
    out << run.body.dump(g.json_indent) << "\n";
    auto finished = std::chrono::steady_clock::now();
    run.elapsed_ms = std::chrono::duration<double, std::milli>(finished - started).count();
    err << "# elapsed_ms " << run.elapsed_ms << "\n";
    return run;
}

/// Runs every *.case.json under the directory: each case carries "argv"
/// (arguments; "./"-prefixed paths resolve against the case's directory)
/// and "expected" (the report body). Reports are compared after JSON
/// normalization; output order follows case names.
inline Json corpus_summary(const std::string& directory, const cli_detail::GlobalOptions& g,
                           std::ostream& err) {
    (void)g;
    namespace fs = std::filesystem;
    if (!fs::is_directory(directory))
        throw ValidationError("corpus directory '" + directory + "' does not exist");
    std::vector<fs::path> cases;
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (entry.path().extension() == ".json" &&
            entry.path().stem().string().ends_with(".case"))
            cases.push_back(entry.path());
    }
    std::sort(cases.begin(), cases.end());
    int passed = 0, failed = 0;
    Json details = Json::array();
    for (const auto& path : cases) {
        Json spec = parse_json(read_file(path.string()), "corpus case " + path.string());
        if (!spec.contains("expected"))
            throw ValidationError("corpus case '" + path.string() + "' lacks an expectation");
        std::vector<std::string> raw, argv;
        for (const auto& a : spec.at("argv")) {
            std::string s = a.get<std::string>();
            raw.push_back(s);
            if (s.rfind("./", 0) == 0) s = (path.parent_path() / s.substr(2)).string();
            argv.push_back(std::move(s));
        }
        std::ostringstream case_out, case_err;
        RunReport rep = dispatch(argv, case_out, case_err);
        rep.body["command"] = raw; // path resolution must not leak into the comparison
        bool ok = rep.body == spec.at("expected");
        if (ok) ++passed;
        else {
            ++failed;
            err << "corpus case failed: " << path.filename().string() << "\n";
            err << "  expected: " << spec.at("expected").dump() << "\n";
            err << "  actual:   " << rep.body.dump() << "\n";
        }
        details.push_back(Json{{"case", path.filename().string()}, {"pass", ok}});
    }
    return Json{{"cases", details}, {"total", passed + failed}, {"passed", passed},
                {"failed", failed}};
}

} // namespace preskit
