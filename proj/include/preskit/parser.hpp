#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "preskit/errors.hpp"
#include "preskit/formula.hpp"
#include "preskit/signature.hpp"

namespace preskit {
namespace detail {

// Grammar:
//   formula := quant | iff
//   quant   := ("forall" | "exists") ident "." formula
//   iff     := imp ("<->" iff)?            right-assoc
//   imp     := or ("->" imp)?              right-assoc
//   or      := and ("|" and)*              left-assoc
//   and     := unary ("&" unary)*          left-assoc
//   unary   := "!" unary | quant | atom
//   atom    := "true" | "false" | "(" formula ")"
//            | rel "(" term {"," term} ")"
//            | term ("=" | "!=") term
//   term    := ident ("(" term {"," term} ")")? | number
// Identifiers: [a-zA-Z][a-zA-Z0-9_]*. Symbol kind is resolved via the
// signature; undeclared identifiers are variables. Numbers name universe
// elements directly.
class FormulaParser {
  public:
    FormulaParser(std::string_view text, const Signature& sig) : text_(text), sig_(sig) {}

    Formula parse() {
        Formula f = parse_formula();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return f;
    }

  private:
    std::string_view text_;
    const Signature& sig_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("formula syntax error at position " + std::to_string(pos_) + ": " + msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(std::string_view tok) {
        skip_ws();
        if (text_.substr(pos_, tok.size()) != tok) return false;
        // "!" must not swallow the first half of "!=".
        if (tok == "!" && pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') return false;
        pos_ += tok.size();
        return true;
    }

    bool peek_ident() {
        skip_ws();
        return pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]));
    }

    bool peek_number() {
        skip_ws();
        return pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]));
    }

    Term number() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        return Term::element(std::stoi(std::string(text_.substr(start, pos_ - start))));
    }

    std::string ident() {
        skip_ws();
        if (!peek_ident()) fail("expected identifier");
        std::size_t start = pos_;
        ++pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    bool keyword_ahead(std::string_view kw) {
        skip_ws();
        if (text_.substr(pos_, kw.size()) != kw) return false;
        std::size_t after = pos_ + kw.size();
        if (after < text_.size() &&
            (std::isalnum(static_cast<unsigned char>(text_[after])) || text_[after] == '_'))
            return false;
        return true;
    }

    Formula parse_formula() {
        if (keyword_ahead("forall") || keyword_ahead("exists")) return parse_quant();
        return parse_iff();
    }

    Formula parse_quant() {
        bool universal = keyword_ahead("forall");
        ident(); // consume the keyword
        std::string v = ident();
        if (sig_.has_function(v) || sig_.has_relation(v))
            fail("quantified variable '" + v + "' clashes with a signature symbol");
        if (!eat(".")) fail("expected '.' after quantified variable");
        Formula body = parse_formula();
        return universal ? Formula::forall(v, std::move(body)) : Formula::exists(v, std::move(body));
    }

    Formula parse_iff() {
        Formula lhs = parse_imp();
        if (eat("<->")) return Formula::biconditional(std::move(lhs), parse_iff());
        return lhs;
    }

    Formula parse_imp() {
        Formula lhs = parse_or();
        if (eat("->")) return Formula::implication(std::move(lhs), parse_imp());
        return lhs;
    }

    Formula parse_or() {
        Formula f = parse_and();
        while (eat("|")) f = Formula::disjunction(std::move(f), parse_and());
        return f;
    }

    Formula parse_and() {
        Formula f = parse_unary();
        while (eat("&")) f = Formula::conjunction(std::move(f), parse_unary());
        return f;
    }

    Formula parse_unary() {
        if (eat("!")) return Formula::negation(parse_unary());
        if (keyword_ahead("forall") || keyword_ahead("exists")) return parse_quant();
        return parse_atom();
    }

    Formula parse_atom() {
        if (keyword_ahead("true")) {
            ident();
            return Formula::truth();
        }
        if (keyword_ahead("false")) {
            ident();
            return Formula::falsity();
        }
        if (eat("(")) {
            Formula f = parse_formula();
            if (!eat(")")) fail("expected ')'");
            return f;
        }
        if (peek_number()) {
            Term lhs = number();
            bool negated = false;
            if (eat("!=")) negated = true;
            else if (!eat("=")) fail("expected '=' or '!=' after term");
            Formula eq = Formula::equal(std::move(lhs), parse_term());
            return negated ? Formula::negation(std::move(eq)) : eq;
        }
        if (!peek_ident()) fail("expected an atom");
        // Relation atom or the left-hand term of an (in)equality.
        std::size_t save = pos_;
        std::string head = ident();
        if (sig_.has_relation(head)) {
            if (!eat("(")) fail("relation '" + head + "' requires arguments");
            std::vector<Term> args;
            args.push_back(parse_term());
            while (eat(",")) args.push_back(parse_term());
            if (!eat(")")) fail("expected ')'");
            int arity = sig_.relation_arity(head);
            if (static_cast<int>(args.size()) != arity)
                fail("relation '" + head + "' takes " + std::to_string(arity) + " arguments, got " +
                     std::to_string(args.size()));
            return Formula::atom(std::move(head), std::move(args));
        }
        pos_ = save;
        Term lhs = parse_term();
        bool negated = false;
        if (eat("!=")) negated = true;
        else if (!eat("=")) fail("expected '=' or '!=' after term");
        Term rhs = parse_term();
        Formula eq = Formula::equal(std::move(lhs), std::move(rhs));
        return negated ? Formula::negation(std::move(eq)) : eq;
    }

    Term parse_term() {
        if (peek_number()) return number();
        std::string head = ident();
        if (sig_.has_relation(head)) fail("relation '" + head + "' used as a term");
        if (sig_.has_function(head)) {
            int arity = sig_.function_arity(head);
            std::vector<Term> args;
            if (eat("(")) {
                if (!eat(")")) {
                    args.push_back(parse_term());
                    while (eat(",")) args.push_back(parse_term());
                    if (!eat(")")) fail("expected ')'");
                }
            }
            if (static_cast<int>(args.size()) != arity)
                fail("function '" + head + "' takes " + std::to_string(arity) + " arguments, got " +
                     std::to_string(args.size()));
            return Term::app(std::move(head), std::move(args));
        }
        return Term::var(std::move(head));
    }
};

} // namespace detail

/// Parses formula text against a signature. Undeclared identifiers become
/// variables; syntax errors carry the offending position.
inline Formula parse_formula(std::string_view text, const Signature& sig) {
    return detail::FormulaParser(text, sig).parse();
}

} // namespace preskit
