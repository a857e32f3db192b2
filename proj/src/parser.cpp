// Recursive-descent parser for the pseudocode grammar:
//
//   Pseudocode ::= Goal Steps
//   Goal       ::= 'GOAL:' Description ';'
//   Steps      ::= 'STEPS:' (Statement)+
//   Statement  ::= SimpleStmt | WhileStmt | IfStmt | ForStmt
//   SimpleStmt ::= Description ';'
//   WhileStmt  ::= 'while' '(' Cond ')' '{' (Statement)+ '}'
//   IfStmt     ::= 'if' '(' Cond ')' '{' (Statement)+ '}'
//                  ( 'elif' '(' Cond ')' '{' (Statement)+ '}' )*
//                  ( 'else' '{' (Statement)+ '}' )?
//   ForStmt    ::= 'for' '(' Cond ')' '{' (Statement)+ '}'
//   Cond       ::= SimpleStmt

#include "codezoom/grammar.hpp"

namespace codezoom {

namespace {

enum class Tok { Goal, Steps, Text, Semi, LParen, RParen, LBrace, RBrace, End };

std::string describe(Tok t)
{
    switch (t) {
    case Tok::Goal: return "'GOAL:'";
    case Tok::Steps: return "'STEPS:'";
    case Tok::Text: return "description";
    case Tok::Semi: return "';'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::End: return "end of input";
    }
    return "?";
}

struct Token {
    Tok kind;
    std::string text; // Text tokens only, surrounding whitespace removed
    int line;
    int column;
};

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_delimiter(char c)
{
    return c == ';' || c == '(' || c == ')' || c == '{' || c == '}';
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance_token(); }

    const Token& peek() const { return current_; }

    const Token& peek2()
    {
        if (!lookahead_) {
            Lexer copy = *this;
            copy.advance_token();
            lookahead_ = copy.current_;
        }
        return *lookahead_;
    }

    Token next()
    {
        Token t = current_;
        advance_token();
        return t;
    }

private:
    void bump()
    {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void advance_token()
    {
        lookahead_.reset();
        while (pos_ < src_.size() && is_space(src_[pos_]))
            bump();
        Token t{Tok::End, {}, line_, col_};
        if (pos_ >= src_.size()) {
            current_ = t;
            return;
        }
        char c = src_[pos_];
        if (is_delimiter(c)) {
            t.kind = c == ';'   ? Tok::Semi
                     : c == '(' ? Tok::LParen
                     : c == ')' ? Tok::RParen
                     : c == '{' ? Tok::LBrace
                                : Tok::RBrace;
            bump();
            current_ = t;
            return;
        }
        for (auto [keyword, kind] : {std::pair{std::string_view("GOAL:"), Tok::Goal},
                                     std::pair{std::string_view("STEPS:"), Tok::Steps}}) {
            if (src_.substr(pos_).starts_with(keyword)) {
                for (std::size_t i = 0; i < keyword.size(); ++i)
                    bump();
                t.kind = kind;
                current_ = t;
                return;
            }
        }
        std::size_t begin = pos_;
        while (pos_ < src_.size() && !is_delimiter(src_[pos_]))
            bump();
        std::string_view run = src_.substr(begin, pos_ - begin);
        while (!run.empty() && is_space(run.back()))
            run.remove_suffix(1);
        t.kind = Tok::Text;
        t.text = std::string(run);
        current_ = t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token current_{Tok::End, {}, 1, 1};
    std::optional<Token> lookahead_;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) {}

    PseudoProgram program()
    {
        expect(Tok::Goal);
        Description goal = description("goal");
        expect(Tok::Semi);
        expect(Tok::Steps);
        Block steps = statements("STEPS", Tok::End);
        expect(Tok::End);
        return PseudoProgram{std::move(goal), std::move(steps)};
    }

private:
    [[noreturn]] void fail(const Token& at, std::string message, std::vector<std::string> expected)
    {
        throw ParseError(at.line, at.column, std::move(message), std::move(expected));
    }

    Token expect(Tok kind)
    {
        const Token& t = lex_.peek();
        if (t.kind != kind)
            fail(t, "expected " + describe(kind) + " but found " + describe(t.kind), {describe(kind)});
        return lex_.next();
    }

    Description description(const char* what)
    {
        const Token& t = lex_.peek();
        if (t.kind != Tok::Text)
            fail(t, std::string("expected ") + what + " text but found " + describe(t.kind), {"description"});
        if (auto why = Description::violation(t.text))
            fail(t, *why, {"description"});
        return Description(lex_.next().text);
    }

    bool keyword_ahead(std::string_view word, Tok follow)
    {
        const Token& t = lex_.peek();
        return t.kind == Tok::Text && t.text == word && lex_.peek2().kind == follow;
    }

    Description condition()
    {
        expect(Tok::LParen);
        Description cond = description("condition");
        expect(Tok::Semi);
        expect(Tok::RParen);
        return cond;
    }

    Block braced_block(const char* owner)
    {
        expect(Tok::LBrace);
        Block body = statements(owner, Tok::RBrace);
        expect(Tok::RBrace);
        return body;
    }

    Block statements(const char* owner, Tok terminator)
    {
        Block out;
        while (lex_.peek().kind != terminator && lex_.peek().kind != Tok::End)
            out.push_back(statement());
        if (out.empty())
            fail(lex_.peek(), std::string(owner) + " block must contain at least one statement",
                 {"statement"});
        return out;
    }

    Statement statement()
    {
        if (keyword_ahead("while", Tok::LParen)) {
            lex_.next();
            Description cond = condition();
            Block body = braced_block("while");
            return Statement{WhileStmt{std::move(cond), std::move(body)}};
        }
        if (keyword_ahead("for", Tok::LParen)) {
            lex_.next();
            Description cond = condition();
            Block body = braced_block("for");
            return Statement{ForStmt{std::move(cond), std::move(body)}};
        }
        if (keyword_ahead("if", Tok::LParen)) {
            lex_.next();
            IfStmt chain{condition(), {}, {}, std::nullopt};
            chain.then = braced_block("if");
            while (keyword_ahead("elif", Tok::LParen)) {
                lex_.next();
                Description cond = condition();
                Block body = braced_block("elif");
                chain.elifs.push_back(ElifArm{std::move(cond), std::move(body)});
            }
            if (keyword_ahead("else", Tok::LBrace)) {
                lex_.next();
                chain.else_ = braced_block("else");
            }
            return Statement{std::move(chain)};
        }
        const Token& t = lex_.peek();
        if (t.kind != Tok::Text)
            fail(t, "expected a statement but found " + describe(t.kind), {"statement"});
        if (lex_.peek2().kind == Tok::LParen)
            fail(lex_.peek2(), "'(' may only follow if, elif, while or for", {"';'"});
        Description text = description("statement");
        expect(Tok::Semi);
        return Statement{SimpleStmt{std::move(text)}};
    }

    Lexer lex_;
};

} // namespace

PseudoProgram parse(std::string_view text)
{
    return Parser(text).program();
}

} // namespace codezoom
