#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "preskit/algebra.hpp"
#include "preskit/errors.hpp"
#include "preskit/eval.hpp"
#include "preskit/parser.hpp"
#include "preskit/preserve.hpp"
#include "preskit/structure.hpp"

namespace preskit {

namespace detail {

/// Infers the signature of a theory from raw sentence texts: an applied
/// identifier is a function when its application continues as a term
/// (followed by = or !=, or nested inside arguments), a relation otherwise.
/// Bare identifiers from the constant list are constants.
class SignatureScanner {
  public:
    SignatureScanner(const std::vector<std::string>& texts, const std::set<std::string>& constants)
        : constants_(constants) {
        for (const auto& t : texts) {
            tokenize(t);
            pos_ = 0;
            formula();
            if (pos_ != toks_.size()) throw ParseError("unexpected trailing input in sentence: " + t);
            toks_.clear();
        }
    }

    Signature result() const {
        Signature sig;
        sig.functions = functions_;
        for (const auto& c : constants_) {
            if (functions_.count(c) || relations_.count(c))
                throw ValidationError("constant '" + c + "' also used as an applied symbol");
            sig.functions[c] = 0;
        }
        sig.relations = relations_;
        sig.validate();
        return sig;
    }

  private:
    const std::set<std::string>& constants_;
    std::vector<std::string> toks_;
    std::size_t pos_ = 0;
    std::map<std::string, int> functions_, relations_;

    void tokenize(const std::string& text) {
        std::size_t i = 0;
        while (i < text.size()) {
            char c = text[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            if (std::isalnum(static_cast<unsigned char>(c))) {
                std::size_t start = i;
                while (i < text.size() &&
                       (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
                    ++i;
                toks_.push_back(text.substr(start, i - start));
                continue;
            }
            if (text.compare(i, 3, "<->") == 0) {
                toks_.push_back("<->");
                i += 3;
                continue;
            }
            if (text.compare(i, 2, "->") == 0 || text.compare(i, 2, "!=") == 0) {
                toks_.push_back(text.substr(i, 2));
                i += 2;
                continue;
            }
            toks_.push_back(std::string(1, c));
            ++i;
        }
    }

    const std::string& tok(std::size_t off = 0) const {
        static const std::string end;
        return pos_ + off < toks_.size() ? toks_[pos_ + off] : end;
    }

    bool eat(const std::string& t) {
        if (tok() != t) return false;
        ++pos_;
        return true;
    }

    void record(std::map<std::string, int>& table, const std::string& name, int arity,
                const char* kind) {
        auto [it, fresh] = table.emplace(name, arity);
        if (!fresh && it->second != arity)
            throw ParseError(std::string(kind) + " '" + name + "' used with inconsistent arities");
    }

    std::size_t matching_paren(std::size_t open) const {
        int depth = 0;
        for (std::size_t i = open; i < toks_.size(); ++i) {
            if (toks_[i] == "(") ++depth;
            if (toks_[i] == ")" && --depth == 0) return i;
        }
        throw ParseError("unbalanced parentheses in sentence");
    }

    void formula() { iff(); }
    void iff() {
        imp();
        if (eat("<->")) iff();
    }
    void imp() {
        orf();
        if (eat("->")) imp();
    }
    void orf() {
        andf();
        while (eat("|")) andf();
    }
    void andf() {
        unary();
        while (eat("&")) unary();
    }
    void unary() {
        if (eat("!")) {
            unary();
            return;
        }
        if (tok() == "forall" || tok() == "exists") {
            ++pos_;
            ++pos_; // bound variable
            if (!eat(".")) throw ParseError("expected '.' after quantified variable");
            formula();
            return;
        }
        atom();
    }
    void atom() {
        if (tok() == "true" || tok() == "false") {
            ++pos_;
            return;
        }
        if (eat("(")) {
            formula();
            if (!eat(")")) throw ParseError("expected ')'");
            return;
        }
        if (tok().empty() || !std::isalnum(static_cast<unsigned char>(tok()[0])))
            throw ParseError("expected an atom near '" + tok() + "'");
        if (tok(1) == "(") {
            std::size_t close = matching_paren(pos_ + 1);
            const std::string& after = close + 1 < toks_.size() ? toks_[close + 1] : tok(toks_.size());
            if (after == "=" || after == "!=") {
                term();
                ++pos_; // the (in)equality
                term();
            } else {
                std::string head = tok();
                ++pos_;
                eat("(");
                int arity = 0;
                if (!eat(")")) {
                    term();
                    ++arity;
                    while (eat(",")) {
                        term();
                        ++arity;
                    }
                    if (!eat(")")) throw ParseError("expected ')'");
                }
                record(relations_, head, arity, "relation");
            }
            return;
        }
        term();
        if (!eat("=") && !eat("!=")) throw ParseError("expected '=' or '!=' after term");
        term();
    }
    void term() {
        std::string head = tok();
        if (head.empty() || !std::isalnum(static_cast<unsigned char>(head[0])))
            throw ParseError("expected a term near '" + head + "'");
        ++pos_;
        if (std::isdigit(static_cast<unsigned char>(head[0]))) return; // element literal
        if (tok() == "(") {
            eat("(");
            int arity = 0;
            if (!eat(")")) {
                term();
                ++arity;
                while (eat(",")) {
                    term();
                    ++arity;
                }
                if (!eat(")")) throw ParseError("expected ')'");
            }
            record(functions_, head, arity, "function");
        }
        // bare identifiers are constants or variables; nothing to record
    }
};

} // namespace detail

/// A finite ground Henkin theory: designated constants, sentences, and a
/// term-depth bound at which the ground atomic diagram must be decided.
struct GroundTheory {
    Signature signature; // constants included as arity-0 functions
    std::vector<std::string> constants;
    std::vector<Formula> sentences;
    int depth = 0;
};

namespace detail {

struct TheoryAnalysis {
    std::vector<Term> terms;
    std::vector<int> term_depth;
    std::map<std::string, int> index; // by printed term
    std::vector<int> cls;             // canonical class per term (least index)
    std::set<std::pair<int, int>> negatives; // class pairs stated apart
    std::map<std::string, std::map<Tuple, bool>> facts; // relation -> class tuple -> value
};

class TheoryAnalyzer {
  public:
    TheoryAnalyzer(const GroundTheory& t) : t_(t) { run(); }
    TheoryAnalysis take() { return std::move(a_); }

  private:
    const GroundTheory& t_;
    TheoryAnalysis a_;
    std::vector<int> uf_;

    int find(int v) {
        while (uf_[static_cast<std::size_t>(v)] != v) {
            uf_[static_cast<std::size_t>(v)] = uf_[static_cast<std::size_t>(uf_[static_cast<std::size_t>(v)])];
            v = uf_[static_cast<std::size_t>(v)];
        }
        return v;
    }
    void unite(int x, int y) {
        x = find(x);
        y = find(y);
        if (x == y) return;
        if (y < x) std::swap(x, y);
        uf_[static_cast<std::size_t>(y)] = x;
    }

    int add_term(const Term& term) {
        std::string key = term.to_string();
        auto it = a_.index.find(key);
        if (it != a_.index.end()) return it->second;
        for (const auto& arg : term.args()) add_term(arg);
        int id = static_cast<int>(a_.terms.size());
        a_.terms.push_back(term);
        a_.term_depth.push_back(term.depth());
        a_.index[key] = id;
        if (a_.terms.size() > 4096) throw BudgetError("ground term table too large");
        return id;
    }

    void enumerate_terms() {
        for (const auto& c : t_.constants) add_term(Term::app(c));
        std::size_t level_start = 0;
        for (int d = 1; d <= t_.depth; ++d) {
            std::size_t level_end = a_.terms.size();
            (void)level_start;
            for (const auto& [name, arity] : t_.signature.functions) {
                if (arity == 0) continue;
                std::vector<Term> pool(a_.terms.begin(), a_.terms.begin() + static_cast<long>(level_end));
                std::vector<std::size_t> idx(static_cast<std::size_t>(arity), 0);
                if (pool.empty()) continue;
                while (true) {
                    std::vector<Term> args;
                    for (int i = 0; i < arity; ++i) args.push_back(pool[idx[static_cast<std::size_t>(i)]]);
                    add_term(Term::app(name, std::move(args)));
                    int i = arity - 1;
                    while (i >= 0) {
                        if (++idx[static_cast<std::size_t>(i)] < pool.size()) break;
                        idx[static_cast<std::size_t>(i)] = 0;
                        --i;
                    }
                    if (i < 0) break;
                }
            }
            level_start = level_end;
        }
    }

    void collect_atomic(const Formula& f, bool positive) {
        if (f.kind() == FormulaKind::Not) {
            collect_atomic(f.child(), !positive);
            return;
        }
        if (f.kind() == FormulaKind::Equal) {
            if (!f.terms()[0].is_ground() || !f.terms()[1].is_ground()) return;
            int a = add_term(f.terms()[0]);
            int b = add_term(f.terms()[1]);
            if (positive) pos_eq_.emplace_back(a, b);
            else neg_eq_.emplace_back(a, b);
            return;
        }
        if (f.kind() == FormulaKind::Atom) {
            for (const auto& term : f.terms())
                if (!term.is_ground()) return;
            std::vector<int> ids;
            for (const auto& term : f.terms()) ids.push_back(add_term(term));
            rel_facts_.push_back({f.relation(), std::move(ids), positive});
        }
    }

    void run() {
        enumerate_terms();
        for (const auto& s : t_.sentences) collect_atomic(s, true);

        uf_.resize(a_.terms.size());
        for (std::size_t i = 0; i < uf_.size(); ++i) uf_[i] = static_cast<int>(i);
        for (auto [x, y] : pos_eq_) unite(x, y);
        // Congruence closure over the term table.
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < a_.terms.size(); ++i)
                for (std::size_t j = i + 1; j < a_.terms.size(); ++j) {
                    const Term& ti = a_.terms[i];
                    const Term& tj = a_.terms[j];
                    if (ti.is_variable() || tj.is_variable()) continue;
                    if (ti.name() != tj.name() || ti.args().size() != tj.args().size()) continue;
                    if (ti.args().empty()) continue;
                    bool same_args = true;
                    for (std::size_t k = 0; k < ti.args().size(); ++k)
                        if (find(a_.index.at(ti.args()[k].to_string())) !=
                            find(a_.index.at(tj.args()[k].to_string()))) {
                            same_args = false;
                            break;
                        }
                    if (same_args && find(static_cast<int>(i)) != find(static_cast<int>(j))) {
                        unite(static_cast<int>(i), static_cast<int>(j));
                        changed = true;
                    }
                }
        }
        a_.cls.resize(a_.terms.size());
        for (std::size_t i = 0; i < a_.terms.size(); ++i) a_.cls[i] = find(static_cast<int>(i));

        for (auto [x, y] : neg_eq_) {
            int cx = find(x), cy = find(y);
            if (cx == cy)
                throw ValidationError("theory inconsistent: " + a_.terms[static_cast<std::size_t>(x)].to_string() +
                                      " = " + a_.terms[static_cast<std::size_t>(y)].to_string() +
                                      " is both asserted and denied");
            a_.negatives.emplace(std::min(cx, cy), std::max(cx, cy));
        }
        for (const auto& fact : rel_facts_) {
            Tuple ct;
            for (int id : fact.ids) ct.push_back(find(id));
            auto [it, fresh] = a_.facts[fact.rel].emplace(ct, fact.positive);
            if (!fresh && it->second != fact.positive)
                throw ValidationError("theory inconsistent: relation '" + fact.rel +
                                      "' both asserted and denied on a tuple");
        }
    }

    struct RelFact {
        std::string rel;
        std::vector<int> ids;
        bool positive;
    };
    std::vector<std::pair<int, int>> pos_eq_, neg_eq_;
    std::vector<RelFact> rel_facts_;
};

} // namespace detail

/// Builds a ground theory from texts: infers the signature, parses the
/// sentences, and checks decided-atom completeness at the declared depth
/// together with consistency of the equational part.
inline GroundTheory make_ground_theory(const std::vector<std::string>& constants,
                                       const std::vector<std::string>& sentence_texts, int depth) {
    if (constants.empty()) throw ValidationError("a ground theory needs at least one constant");
    if (depth < 0) throw ValidationError("term depth must be nonnegative");
    std::set<std::string> cset(constants.begin(), constants.end());
    if (cset.size() != constants.size()) throw ValidationError("duplicate constant name");

    GroundTheory t;
    t.signature = detail::SignatureScanner(sentence_texts, cset).result();
    t.constants = constants;
    t.depth = depth;
    for (const auto& text : sentence_texts) {
        Formula f = parse_formula(text, t.signature);
        if (!f.free_vars().empty())
            throw ValidationError("sentence has free variables: " + text);
        t.sentences.push_back(std::move(f));
    }

    detail::TheoryAnalysis a = detail::TheoryAnalyzer(t).take();
    // Completeness over terms within the declared depth: equalities first.
    std::set<int> bounded_classes;
    for (std::size_t i = 0; i < a.terms.size(); ++i)
        if (a.term_depth[i] <= depth) bounded_classes.insert(a.cls[i]);
    std::vector<int> classes(bounded_classes.begin(), bounded_classes.end());
    for (std::size_t i = 0; i < classes.size(); ++i)
        for (std::size_t j = i + 1; j < classes.size(); ++j)
            if (!a.negatives.count({classes[i], classes[j]}))
                throw ValidationError(
                    "theory not complete: equality of " +
                    a.terms[static_cast<std::size_t>(classes[i])].to_string() + " and " +
                    a.terms[static_cast<std::size_t>(classes[j])].to_string() + " is undecided");
    // Then relation atoms over the bounded classes.
    for (const auto& [name, arity] : t.signature.relations) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(arity), 0);
        while (true) {
            Tuple ct;
            for (int i = 0; i < arity; ++i) ct.push_back(classes[idx[static_cast<std::size_t>(i)]]);
            auto relit = a.facts.find(name);
            if (relit == a.facts.end() || !relit->second.count(ct)) {
                std::string args;
                for (int i = 0; i < arity; ++i) {
                    if (i) args += ", ";
                    args += a.terms[static_cast<std::size_t>(ct[static_cast<std::size_t>(i)])].to_string();
                }
                throw ValidationError("theory not complete: " + name + "(" + args + ") is undecided");
            }
            int i = arity - 1;
            while (i >= 0) {
                if (++idx[static_cast<std::size_t>(i)] < classes.size()) break;
                idx[static_cast<std::size_t>(i)] = 0;
                --i;
            }
            if (i < 0) break;
        }
    }
    return t;
}

/// The canonical model and the constant-to-element map.
struct CanonicalModel {
    FiniteStructure model;
    std::map<std::string, int> class_map;
};

/// Reads the model off the theory: elements are the constant classes,
/// function values and relation memberships come from the decided atoms.
/// Undecided function values raise a distinct not-Henkin-complete error.
inline CanonicalModel build_canonical_model(const GroundTheory& t, const EvalOptions& opts = {}) {
    detail::TheoryAnalysis a = detail::TheoryAnalyzer(t).take();

    // Constant classes in declaration order of their least constants.
    std::map<int, int> element_of_class;
    std::vector<int> class_rep_term;
    for (const auto& c : t.constants) {
        int cls = a.cls[static_cast<std::size_t>(a.index.at(c))];
        if (!element_of_class.count(cls)) {
            int e = static_cast<int>(class_rep_term.size());
            element_of_class[cls] = e;
            class_rep_term.push_back(cls);
        }
    }
    int n = static_cast<int>(class_rep_term.size());

    CanonicalModel out;
    out.model.size = n;
    out.model.signature = t.signature;
    for (const auto& c : t.constants)
        out.class_map[c] = element_of_class.at(a.cls[static_cast<std::size_t>(a.index.at(c))]);

    auto class_of_term = [&](const Term& term) -> std::optional<int> {
        auto it = a.index.find(term.to_string());
        if (it == a.index.end()) return std::nullopt;
        int cls = a.cls[static_cast<std::size_t>(it->second)];
        auto eit = element_of_class.find(cls);
        if (eit == element_of_class.end()) return std::nullopt;
        return eit->second;
    };
    // A constant per element, in element order, for table reads.
    std::vector<Term> rep_constant(static_cast<std::size_t>(n), Term::var("?"));
    for (const auto& c : t.constants) {
        int e = out.class_map.at(c);
        if (rep_constant[static_cast<std::size_t>(e)].is_variable())
            rep_constant[static_cast<std::size_t>(e)] = Term::app(c);
    }

    for (const auto& [name, arity] : t.signature.functions) {
        std::vector<int>& table = out.model.function_tables[name];
        for_each_tuple(n, arity, [&](const Tuple& args) {
            std::vector<Term> arg_terms;
            for (int e : args) arg_terms.push_back(rep_constant[static_cast<std::size_t>(e)]);
            Term applied = Term::app(name, std::move(arg_terms));
            auto value = class_of_term(applied);
            if (!value)
                throw ValidationError("not Henkin-complete: value of " + applied.to_string() +
                                      " is not equated to any constant");
            table.push_back(*value);
        });
    }
    for (const auto& [name, arity] : t.signature.relations) {
        TupleSet& tuples = out.model.relation_sets[name];
        auto relit = a.facts.find(name);
        for_each_tuple(n, arity, [&](const Tuple& args) {
            Tuple ct;
            for (int e : args) ct.push_back(class_rep_term[static_cast<std::size_t>(e)]);
            if (relit != a.facts.end()) {
                auto it = relit->second.find(ct);
                if (it != relit->second.end() && it->second) tuples.insert(args);
            }
        });
    }
    out.model.validate();

    // The quantifier-free fragment must hold in the built model.
    for (const auto& s : t.sentences) {
        if (s.quantifier_depth() > 0) continue;
        if (!eval_formula(out.model, s, {}, opts))
            throw ValidationError("theory inconsistent: sentence fails in the canonical model: " +
                                  s.unparse());
    }
    return out;
}

/// One checked instance of the preserving condition.
struct HenkinInstance {
    std::size_t suite_index = 0;
    ParamTuple params;
    bool antecedent = false; // M satisfies exists x phi(params, x)
    bool preserving = false; // existential partial preservation into M
};

struct HenkinReport {
    std::vector<HenkinInstance> instances;
    int violations = 0;
    bool pass = true;
};

/// Whenever the model satisfies exists x phi(classes, x), the formula must
/// be existentially partially preserving into the universe. Violations
/// indicate a build bug.
inline HenkinReport check_preserving_condition(const FiniteStructure& m, const FormulaSuite& suite,
                                               const EvalOptions& opts = {}) {
    suite.validate(m.signature);
    HenkinReport rep;
    Property universe = Property::full(m.size, 1);
    for (std::size_t s = 0; s < suite.entries.size(); ++s) {
        const BlockType& phi = suite.entries[s];
        std::vector<Property> full_blocks;
        for (int i = 0; i < phi.block_count(); ++i)
            full_blocks.push_back(Property::full(m.size, phi.block_arity(i)));
        detail::for_each_param_choice(phi, full_blocks, [&](const ParamTuple& choice) {
            HenkinInstance inst;
            inst.suite_index = s;
            inst.params = choice;
            inst.antecedent = !solution_set(m, phi, choice, opts).empty();
            std::vector<Property> singles;
            for (std::size_t i = 0; i < choice.size(); ++i)
                singles.emplace_back(phi.block_arity(static_cast<int>(i)), TupleSet{choice[i]});
            inst.preserving = check_preservation(m, phi, singles, universe,
                                                 Mode::ExistsPartiallyPreserved, opts);
            if (inst.antecedent && !inst.preserving) {
                ++rep.violations;
                rep.pass = false;
            }
            rep.instances.push_back(std::move(inst));
            return true;
        });
    }
    return rep;
}

/// A substructure given by its closed universe inside a bigger structure.
struct SubstructureEmbedding {
    FiniteStructure big;
    Property small; // arity 1

    static SubstructureEmbedding make(FiniteStructure big, Property small,
                                      const EvalOptions& opts = {}) {
        auto verdict = is_subuniverse(big, small, opts);
        if (!verdict.via_closure || !verdict.via_preservation)
            throw ValidationError("subset is not closed under the structure's functions");
        return SubstructureEmbedding{std::move(big), std::move(small)};
    }
};

enum class TvClass { Disjoint, Preserving, Fail };

inline std::string tv_class_name(TvClass c) {
    switch (c) {
        case TvClass::Disjoint: return "disjoint";
        case TvClass::Preserving: return "preserving";
        case TvClass::Fail: return "fail";
    }
    throw InternalError("unreachable classification");
}

struct TvInstance {
    std::size_t suite_index = 0;
    ParamTuple params;
    TvClass cls = TvClass::Disjoint;
};

struct TvReport {
    std::vector<TvInstance> instances;
    int disjoint = 0, preserving = 0, failed = 0;
    bool pass = true;
};

/// Classifies every (suite formula, parameter tuple over N) instance:
/// Disjoint when the big structure has no solution, Preserving when some
/// solution lies in N, Fail otherwise. The suite passes when nothing fails.
inline TvReport tarski_vaught_test(const SubstructureEmbedding& e, const FormulaSuite& suite,
                                   const EvalOptions& opts = {}) {
    suite.validate(e.big.signature);
    TvReport rep;
    Property universe = Property::full(e.big.size, 1);
    auto nelems = e.small.elements();
    for (std::size_t s = 0; s < suite.entries.size(); ++s) {
        const BlockType& phi = suite.entries[s];
        std::vector<Property> n_blocks;
        for (int i = 0; i < phi.block_count(); ++i) {
            std::vector<Property> copies(static_cast<std::size_t>(phi.block_arity(i)), e.small);
            n_blocks.push_back(cartesian_product(copies));
        }
        detail::for_each_param_choice(phi, n_blocks, [&](const ParamTuple& choice) {
            TvInstance inst;
            inst.suite_index = s;
            inst.params = choice;
            std::vector<Property> singles;
            for (std::size_t i = 0; i < choice.size(); ++i)
                singles.emplace_back(phi.block_arity(static_cast<int>(i)), TupleSet{choice[i]});
            bool disjoint = check_preservation(e.big, phi, singles, universe,
                                               Mode::ExistentiallyDisjoint, opts);
            if (disjoint) {
                inst.cls = TvClass::Disjoint;
                ++rep.disjoint;
            } else if (check_preservation(e.big, phi, singles, e.small,
                                          Mode::ExistsPartiallyPreserved, opts)) {
                inst.cls = TvClass::Preserving;
                ++rep.preserving;
            } else {
                inst.cls = TvClass::Fail;
                ++rep.failed;
                rep.pass = false;
            }
            rep.instances.push_back(std::move(inst));
            return true;
        });
    }
    return rep;
}

/// phi_j(x1..xj, y) = y != x1 & ... & y != xj for j = 1..k; detects proper
/// substructures of size up to k by pigeonhole.
inline FormulaSuite counting_suite(int k, const Signature& sig = {}) {
    if (k < 1) throw ValidationError("counting suite needs k >= 1");
    FormulaSuite suite;
    auto xs = detail::fresh_vars(sig, "x", k);
    std::string y = detail::fresh_var(sig, "y");
    for (int j = 1; j <= k; ++j) {
        std::vector<Formula> conj;
        std::vector<std::vector<std::string>> blocks;
        for (int i = 0; i < j; ++i) {
            conj.push_back(Formula::negation(
                Formula::equal(Term::var(y), Term::var(xs[static_cast<std::size_t>(i)]))));
            blocks.push_back({xs[static_cast<std::size_t>(i)]});
        }
        suite.entries.push_back(BlockType{blocks, {y}, {Formula::conjoin(conj)}});
    }
    return suite;
}

} // namespace preskit
