#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "preskit/errors.hpp"
#include "preskit/signature.hpp"

namespace preskit {

/// A first-order term: a variable, a function application, or a numeric
/// literal naming a universe element directly. Constants are arity-0
/// applications. Immutable; cheap to copy.
class Term {
  public:
    static Term var(std::string name) {
        return Term(std::make_shared<const Node>(Node{Kind::Var, std::move(name), {}, 0}));
    }
    static Term app(std::string symbol, std::vector<Term> args = {}) {
        return Term(std::make_shared<const Node>(Node{Kind::App, std::move(symbol), std::move(args), 0}));
    }
    static Term element(int value) {
        return Term(std::make_shared<const Node>(Node{Kind::Elem, std::to_string(value), {}, value}));
    }

    bool is_variable() const { return node_->kind == Kind::Var; }
    bool is_element() const { return node_->kind == Kind::Elem; }
    int element_value() const { return node_->element; }
    const std::string& name() const { return node_->name; }
    const std::vector<Term>& args() const { return node_->args; }

    std::string to_string() const {
        std::string out = name();
        if (!is_variable() && !args().empty()) {
            out += '(';
            for (std::size_t i = 0; i < args().size(); ++i) {
                if (i) out += ", ";
                out += args()[i].to_string();
            }
            out += ')';
        }
        return out;
    }

    int depth() const {
        if (is_variable() || args().empty()) return 0;
        int d = 0;
        for (const auto& a : args()) d = std::max(d, a.depth());
        return d + 1;
    }

    bool is_ground() const {
        if (is_variable()) return false;
        for (const auto& a : args())
            if (!a.is_ground()) return false;
        return true;
    }

    void collect_vars(std::set<std::string>& out) const {
        if (is_variable()) out.insert(name());
        else
            for (const auto& a : args()) a.collect_vars(out);
    }

    void validate_against(const Signature& sig) const {
        if (is_element()) return;
        if (is_variable()) {
            if (sig.has_function(name()) || sig.has_relation(name()))
                throw ValidationError("variable '" + name() + "' clashes with a signature symbol");
            return;
        }
        int arity = sig.function_arity(name());
        if (static_cast<int>(args().size()) != arity)
            throw ValidationError("function '" + name() + "' used with " +
                                  std::to_string(args().size()) + " arguments, arity is " +
                                  std::to_string(arity));
        for (const auto& a : args()) a.validate_against(sig);
    }

    bool operator==(const Term& o) const {
        if (node_ == o.node_) return true;
        if (node_->kind != o.node_->kind || name() != o.name()) return false;
        if (args().size() != o.args().size()) return false;
        for (std::size_t i = 0; i < args().size(); ++i)
            if (!(args()[i] == o.args()[i])) return false;
        return true;
    }

  private:
    enum class Kind { Var, App, Elem };
    struct Node {
        Kind kind;
        std::string name;
        std::vector<Term> args;
        int element;
    };
    explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

enum class FormulaKind {
    Truth,
    Falsity,
    Atom,
    Equal,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Exists,
    Forall,
};

/// A first-order formula with equality. Immutable tree, value semantics.
class Formula {
  public:
    static Formula truth() { return make(FormulaKind::Truth); }
    static Formula falsity() { return make(FormulaKind::Falsity); }
    static Formula atom(std::string relation, std::vector<Term> terms) {
        auto n = node(FormulaKind::Atom);
        n->name = std::move(relation);
        n->terms = std::move(terms);
        return Formula(std::move(n));
    }
    static Formula equal(Term lhs, Term rhs) {
        auto n = node(FormulaKind::Equal);
        n->terms = {std::move(lhs), std::move(rhs)};
        return Formula(std::move(n));
    }
    static Formula negation(Formula f) {
        auto n = node(FormulaKind::Not);
        n->children = {std::move(f)};
        return Formula(std::move(n));
    }
    static Formula conjunction(Formula a, Formula b) { return binary(FormulaKind::And, std::move(a), std::move(b)); }
    static Formula disjunction(Formula a, Formula b) { return binary(FormulaKind::Or, std::move(a), std::move(b)); }
    static Formula implication(Formula a, Formula b) { return binary(FormulaKind::Implies, std::move(a), std::move(b)); }
    static Formula biconditional(Formula a, Formula b) { return binary(FormulaKind::Iff, std::move(a), std::move(b)); }
    static Formula exists(std::string v, Formula f) { return quant(FormulaKind::Exists, std::move(v), std::move(f)); }
    static Formula forall(std::string v, Formula f) { return quant(FormulaKind::Forall, std::move(v), std::move(f)); }

    /// Conjunction of a nonempty list, right-nested; empty list gives truth.
    static Formula conjoin(const std::vector<Formula>& fs) {
        if (fs.empty()) return truth();
        Formula out = fs.back();
        for (int i = static_cast<int>(fs.size()) - 2; i >= 0; --i)
            out = conjunction(fs[static_cast<std::size_t>(i)], out);
        return out;
    }

    /// Disjunction of a nonempty list, right-nested; empty list gives falsity.
    static Formula disjoin(const std::vector<Formula>& fs) {
        if (fs.empty()) return falsity();
        Formula out = fs.back();
        for (int i = static_cast<int>(fs.size()) - 2; i >= 0; --i)
            out = disjunction(fs[static_cast<std::size_t>(i)], out);
        return out;
    }

    FormulaKind kind() const { return node_->kind; }
    const std::string& relation() const { return node_->name; }
    const std::string& bound_var() const { return node_->name; }
    const std::vector<Term>& terms() const { return node_->terms; }
    const Formula& child(std::size_t i = 0) const { return node_->children[i]; }
    std::size_t child_count() const { return node_->children.size(); }

    std::set<std::string> free_vars() const {
        std::set<std::string> out;
        collect_free(out);
        return out;
    }

    std::set<std::string> bound_vars() const {
        std::set<std::string> out;
        collect_bound(out);
        return out;
    }

    int quantifier_depth() const {
        int d = 0;
        for (const auto& c : node_->children) d = std::max(d, c.quantifier_depth());
        if (kind() == FormulaKind::Exists || kind() == FormulaKind::Forall) ++d;
        return d;
    }

    void validate_against(const Signature& sig) const {
        switch (kind()) {
            case FormulaKind::Truth:
            case FormulaKind::Falsity: return;
            case FormulaKind::Atom: {
                int arity = sig.relation_arity(relation());
                if (static_cast<int>(terms().size()) != arity)
                    throw ValidationError("relation '" + relation() + "' used with " +
                                          std::to_string(terms().size()) + " arguments, arity is " +
                                          std::to_string(arity));
                for (const auto& t : terms()) t.validate_against(sig);
                return;
            }
            case FormulaKind::Equal:
                terms()[0].validate_against(sig);
                terms()[1].validate_against(sig);
                return;
            case FormulaKind::Exists:
            case FormulaKind::Forall:
                if (sig.has_function(bound_var()) || sig.has_relation(bound_var()))
                    throw ValidationError("bound variable '" + bound_var() +
                                          "' clashes with a signature symbol");
                child().validate_against(sig);
                return;
            default:
                for (const auto& c : node_->children) c.validate_against(sig);
                return;
        }
    }

    /// Text form, parseable by parse_formula.
    std::string unparse() const {
        std::string out;
        print(out, 0);
        return out;
    }

    /// Renames free variables; refuses mappings whose targets collide with
    /// bound variables (no capture-avoiding machinery needed here).
    Formula rename_free(const std::map<std::string, std::string>& mapping) const {
        for (const auto& v : bound_vars())
            for (const auto& [from, to] : mapping)
                if (to == v || from == v)
                    throw ValidationError("renaming collides with bound variable '" + v + "'");
        return rename_impl(mapping);
    }

    bool operator==(const Formula& o) const {
        if (node_ == o.node_) return true;
        if (kind() != o.kind() || node_->name != o.node_->name) return false;
        if (terms().size() != o.terms().size() || child_count() != o.child_count()) return false;
        for (std::size_t i = 0; i < terms().size(); ++i)
            if (!(terms()[i] == o.terms()[i])) return false;
        for (std::size_t i = 0; i < child_count(); ++i)
            if (!(child(i) == o.child(i))) return false;
        return true;
    }

  private:
    struct Node {
        FormulaKind kind;
        std::string name; // relation symbol or bound variable
        std::vector<Term> terms;
        std::vector<Formula> children;
    };

    static std::shared_ptr<Node> node(FormulaKind k) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        return n;
    }
    static Formula make(FormulaKind k) { return Formula(node(k)); }
    static Formula binary(FormulaKind k, Formula a, Formula b) {
        auto n = node(k);
        n->children = {std::move(a), std::move(b)};
        return Formula(std::move(n));
    }
    static Formula quant(FormulaKind k, std::string v, Formula f) {
        auto n = node(k);
        n->name = std::move(v);
        n->children = {std::move(f)};
        return Formula(std::move(n));
    }

    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    void collect_free(std::set<std::string>& out) const {
        switch (kind()) {
            case FormulaKind::Atom:
            case FormulaKind::Equal:
                for (const auto& t : terms()) t.collect_vars(out);
                return;
            case FormulaKind::Exists:
            case FormulaKind::Forall: {
                std::set<std::string> inner;
                child().collect_free(inner);
                inner.erase(bound_var());
                out.insert(inner.begin(), inner.end());
                return;
            }
            default:
                for (const auto& c : node_->children) c.collect_free(out);
                return;
        }
    }

    void collect_bound(std::set<std::string>& out) const {
        if (kind() == FormulaKind::Exists || kind() == FormulaKind::Forall) out.insert(bound_var());
        for (const auto& c : node_->children) c.collect_bound(out);
    }

    static Term rename_term(const Term& t, const std::map<std::string, std::string>& mapping) {
        if (t.is_variable()) {
            auto it = mapping.find(t.name());
            return it == mapping.end() ? t : Term::var(it->second);
        }
        if (t.is_element()) return t;
        std::vector<Term> args;
        args.reserve(t.args().size());
        for (const auto& a : t.args()) args.push_back(rename_term(a, mapping));
        return Term::app(t.name(), std::move(args));
    }

    Formula rename_impl(const std::map<std::string, std::string>& mapping) const {
        auto n = std::make_shared<Node>(*node_);
        for (auto& t : n->terms) t = rename_term(t, mapping);
        for (auto& c : n->children) c = c.rename_impl(mapping);
        return Formula(std::move(n));
    }

    static void print_term(std::string& out, const Term& t) {
        out += t.name();
        if (!t.is_variable() && !t.args().empty()) {
            out += '(';
            for (std::size_t i = 0; i < t.args().size(); ++i) {
                if (i) out += ", ";
                print_term(out, t.args()[i]);
            }
            out += ')';
        }
    }

    // Precedence levels, loosest to tightest: iff 1, implies 2, or 3, and 4,
    // not 5, atoms 6. Quantifiers print parenthesized in operand position.
    int prec() const {
        switch (kind()) {
            case FormulaKind::Iff: return 1;
            case FormulaKind::Implies: return 2;
            case FormulaKind::Or: return 3;
            case FormulaKind::And: return 4;
            case FormulaKind::Not: return 5;
            case FormulaKind::Exists:
            case FormulaKind::Forall: return 0;
            default: return 6;
        }
    }

    void print(std::string& out, int parent_prec) const {
        int p = prec();
        bool parens = p < parent_prec || ((kind() == FormulaKind::Exists || kind() == FormulaKind::Forall) && parent_prec > 0);
        if (parens) out += '(';
        switch (kind()) {
            case FormulaKind::Truth: out += "true"; break;
            case FormulaKind::Falsity: out += "false"; break;
            case FormulaKind::Atom:
                out += relation();
                out += '(';
                for (std::size_t i = 0; i < terms().size(); ++i) {
                    if (i) out += ", ";
                    print_term(out, terms()[i]);
                }
                out += ')';
                break;
            case FormulaKind::Equal:
                print_term(out, terms()[0]);
                out += " = ";
                print_term(out, terms()[1]);
                break;
            case FormulaKind::Not:
                out += '!';
                child().print(out, 5);
                break;
            case FormulaKind::And: // left-associative
                child(0).print(out, 4);
                out += " & ";
                child(1).print(out, 5);
                break;
            case FormulaKind::Or: // left-associative
                child(0).print(out, 3);
                out += " | ";
                child(1).print(out, 4);
                break;
            case FormulaKind::Implies: // right-associative
                child(0).print(out, 3);
                out += " -> ";
                child(1).print(out, 2);
                break;
            case FormulaKind::Iff: // right-associative
                child(0).print(out, 2);
                out += " <-> ";
                child(1).print(out, 1);
                break;
            case FormulaKind::Exists:
            case FormulaKind::Forall:
                out += (kind() == FormulaKind::Exists) ? "exists " : "forall ";
                out += bound_var();
                out += ". ";
                child().print(out, 0);
                break;
        }
        if (parens) out += ')';
    }

    std::shared_ptr<const Node> node_;
};

} // namespace preskit
