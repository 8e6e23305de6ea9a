#pragma once

#include "appc/error.hpp"

#include <cctype>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace appc::ltl {

/// `Release` never comes out of the parser; it appears only in negation
/// normal form.
enum class Op { True, False, Atom, Not, And, Or, Next, Until, Release, Globally, Finally };

struct Node;
using Formula = std::shared_ptr<const Node>;

struct Node
{
    Op op;
    std::string atom;
    Formula lhs;
    Formula rhs;
};

inline Formula make(Op op, Formula lhs = nullptr, Formula rhs = nullptr)
{
    return std::make_shared<const Node>(Node{op, {}, std::move(lhs), std::move(rhs)});
}
inline Formula top() { return make(Op::True); }
inline Formula bottom() { return make(Op::False); }
inline Formula atom(std::string name) { return std::make_shared<const Node>(Node{Op::Atom, std::move(name), {}, {}}); }
inline Formula negate(Formula f) { return make(Op::Not, std::move(f)); }
inline Formula conj(Formula a, Formula b) { return make(Op::And, std::move(a), std::move(b)); }
inline Formula disj(Formula a, Formula b) { return make(Op::Or, std::move(a), std::move(b)); }
inline Formula next(Formula f) { return make(Op::Next, std::move(f)); }
inline Formula until(Formula a, Formula b) { return make(Op::Until, std::move(a), std::move(b)); }
inline Formula release(Formula a, Formula b) { return make(Op::Release, std::move(a), std::move(b)); }
inline Formula always(Formula f) { return make(Op::Globally, std::move(f)); }
inline Formula eventually(Formula f) { return make(Op::Finally, std::move(f)); }

/// Fully parenthesized rendering; also serves as a structural key.
inline std::string to_string(const Formula& f)
{
    switch (f->op) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Atom: return f->atom;
    case Op::Not: return "!" + to_string(f->lhs);
    case Op::Next: return "X " + to_string(f->lhs);
    case Op::Globally: return "G " + to_string(f->lhs);
    case Op::Finally: return "F " + to_string(f->lhs);
    case Op::And: return "(" + to_string(f->lhs) + " & " + to_string(f->rhs) + ")";
    case Op::Or: return "(" + to_string(f->lhs) + " | " + to_string(f->rhs) + ")";
    case Op::Until: return "(" + to_string(f->lhs) + " U " + to_string(f->rhs) + ")";
    case Op::Release: return "(" + to_string(f->lhs) + " R " + to_string(f->rhs) + ")";
    }
    return {};
}

inline bool is_unary(Op op) { return op == Op::Not || op == Op::Next || op == Op::Globally || op == Op::Finally; }
inline bool is_binary(Op op) { return op == Op::And || op == Op::Or || op == Op::Until || op == Op::Release; }

inline void collect_atoms(const Formula& f, std::set<std::string>& out)
{
    if (f->op == Op::Atom)
        out.insert(f->atom);
    if (f->lhs)
        collect_atoms(f->lhs, out);
    if (f->rhs)
        collect_atoms(f->rhs, out);
}

inline std::set<std::string> atoms(const Formula& f)
{
    std::set<std::string> out;
    collect_atoms(f, out);
    return out;
}

/// Top-level conjuncts, left to right.
inline std::vector<Formula> conjuncts(const Formula& f)
{
    if (f->op != Op::And)
        return {f};
    auto out = conjuncts(f->lhs);
    auto rest = conjuncts(f->rhs);
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

namespace detail {

class Parser
{
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Formula parse()
    {
        Formula f = implication();
        skip_space();
        if (pos_ != text_.size())
            error("unexpected '" + std::string(1, text_[pos_]) + "'");
        return f;
    }

private:
    [[noreturn]] void error(const std::string& what) const
    {
        throw ParseError("LTL syntax error: " + what + " at position " + std::to_string(pos_ + 1), 1, pos_ + 1);
    }

    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool accept(std::string_view token)
    {
        skip_space();
        if (text_.substr(pos_, token.size()) == token) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    // Binary `&`/`|` but not the `->` arrow.
    bool accept_operator(char c)
    {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            if (pos_ < text_.size() && text_[pos_] == c)
                ++pos_;
            return true;
        }
        return false;
    }

    Formula implication()
    {
        Formula lhs = disjunction();
        if (accept("->"))
            return disj(negate(lhs), implication());
        return lhs;
    }

    Formula disjunction()
    {
        Formula f = conjunction();
        while (accept_operator('|'))
            f = disj(f, conjunction());
        return f;
    }

    Formula conjunction()
    {
        Formula f = until_expr();
        while (accept_operator('&'))
            f = conj(f, until_expr());
        return f;
    }

    Formula until_expr()
    {
        Formula lhs = unary();
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == 'U' && !ident_char_at(pos_ + 1)) {
            ++pos_;
            return until(lhs, until_expr());
        }
        return lhs;
    }

    [[nodiscard]] bool ident_char_at(std::size_t i) const
    {
        return i < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[i])) || text_[i] == '_');
    }

    Formula unary()
    {
        skip_space();
        if (pos_ >= text_.size())
            error("unexpected end of formula");
        char c = text_[pos_];
        if (c == '!' || c == '~') {
            ++pos_;
            return negate(unary());
        }
        if (c == 'X' || c == 'G' || c == 'F') {
            ++pos_;
            Formula sub = unary();
            if (c == 'X')
                return next(sub);
            return c == 'G' ? always(sub) : eventually(sub);
        }
        return primary();
    }

    Formula primary()
    {
        skip_space();
        if (accept("(")) {
            Formula f = implication();
            if (!accept(")"))
                error("expected ')'");
            return f;
        }
        if (pos_ < text_.size() &&
            (std::islower(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            std::size_t start = pos_;
            while (ident_char_at(pos_))
                ++pos_;
            std::string name(text_.substr(start, pos_ - start));
            if (name == "true")
                return top();
            if (name == "false")
                return bottom();
            return atom(name);
        }
        if (pos_ >= text_.size())
            error("unexpected end of formula");
        error("unexpected '" + std::string(1, text_[pos_]) + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Grammar (loosest first): `->` (right assoc, sugar for !a | b), `|`, `&`,
/// `U` (right assoc), then the prefix operators `!`, `X`, `G`, `F`.
/// Atoms start with a lower-case letter or `_`; `true` and `false` are
/// reserved.
inline Formula parse(std::string_view text) { return detail::Parser(text).parse(); }

/// Negation normal form over {true, false, a, !a, &, |, X, U, R}.
inline Formula to_nnf(const Formula& f, bool negated = false)
{
    switch (f->op) {
    case Op::True: return negated ? bottom() : top();
    case Op::False: return negated ? top() : bottom();
    case Op::Atom: return negated ? negate(f) : f;
    case Op::Not: return to_nnf(f->lhs, !negated);
    case Op::And:
        return negated ? disj(to_nnf(f->lhs, true), to_nnf(f->rhs, true))
                       : conj(to_nnf(f->lhs), to_nnf(f->rhs));
    case Op::Or:
        return negated ? conj(to_nnf(f->lhs, true), to_nnf(f->rhs, true))
                       : disj(to_nnf(f->lhs), to_nnf(f->rhs));
    case Op::Next: return next(to_nnf(f->lhs, negated));
    case Op::Until:
        return negated ? release(to_nnf(f->lhs, true), to_nnf(f->rhs, true))
                       : until(to_nnf(f->lhs), to_nnf(f->rhs));
    case Op::Release:
        return negated ? until(to_nnf(f->lhs, true), to_nnf(f->rhs, true))
                       : release(to_nnf(f->lhs), to_nnf(f->rhs));
    case Op::Globally:
        // G p = false R p;  !G p = true U !p
        return negated ? until(top(), to_nnf(f->lhs, true)) : release(bottom(), to_nnf(f->lhs));
    case Op::Finally:
        return negated ? release(bottom(), to_nnf(f->lhs, true)) : until(top(), to_nnf(f->lhs));
    }
    return f;
}

} // namespace appc::ltl
