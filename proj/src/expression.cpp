#include "wavefront/expression.hpp"

#include <cctype>
#include <cstdlib>
#include <memory>

namespace wavefront::coeffs {

namespace {

struct Node {
    enum Op { number, var, r2, add, sub, mul, div, neg, pow, exp } op = number;
    cplx value = 0.0;
    int index = 0;
    std::shared_ptr<const Node> lhs, rhs;

    cplx eval(const CVec& z) const {
        switch (op) {
            case number: return value;
            case var: return z[index];
            case r2: return (z.array() * z.array()).sum();
            case add: return lhs->eval(z) + rhs->eval(z);
            case sub: return lhs->eval(z) - rhs->eval(z);
            case mul: return lhs->eval(z) * rhs->eval(z);
            case div: return lhs->eval(z) / rhs->eval(z);
            case neg: return -lhs->eval(z);
            case pow: {
                // integer power by repeated squaring keeps holomorphy exact
                cplx base = lhs->eval(z), acc = 1.0;
                int e = index;
                while (e > 0) {
                    if (e & 1) acc *= base;
                    base *= base;
                    e >>= 1;
                }
                return acc;
            }
            case exp: return std::exp(lhs->eval(z));
        }
        return 0.0;
    }
};

using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

class Parser {
public:
    Parser(const std::string& s, int n) : s_(s), n_(n) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return e;
    }

private:
    const std::string& s_;
    int n_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("expression '" + s_ + "': " + what + " at column " + std::to_string(pos_ + 1));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr l = term();
        for (;;) {
            if (accept('+')) l = make(Node::add, l, term());
            else if (accept('-')) l = make(Node::sub, l, term());
            else return l;
        }
    }
    NodePtr term() {
        NodePtr l = unary();
        for (;;) {
            if (accept('*')) l = make(Node::mul, l, unary());
            else if (accept('/')) l = make(Node::div, l, unary());
            else return l;
        }
    }
    NodePtr unary() {
        if (accept('-')) return make(Node::neg, unary());
        if (accept('+')) return unary();
        return power();
    }
    NodePtr power() {
        NodePtr base = atom();
        if (!accept('^')) return base;
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("exponent must be a nonnegative integer");
        auto n = std::make_shared<Node>();
        n->op = Node::pow;
        n->lhs = base;
        n->index = std::stoi(s_.substr(start, pos_ - start));
        return n;
    }
    NodePtr atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!accept(')')) fail("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            auto n = std::make_shared<Node>();
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string id = s_.substr(start, pos_ - start);
            if (id == "exp") {
                if (!accept('(')) fail("expected '(' after exp");
                NodePtr e = expr();
                if (!accept(')')) fail("missing ')'");
                return make(Node::exp, e);
            }
            if (id == "r2") return make(Node::r2);
            auto n = std::make_shared<Node>();
            n->op = Node::var;
            if (id == "x" && n_ == 1) return n;
            if (id.size() > 1 && id[0] == 'x' && id.find_first_not_of("0123456789", 1) == std::string::npos) {
                const int j = std::stoi(id.substr(1));
                if (j >= 1 && j <= n_) {
                    n->index = j - 1;
                    return n;
                }
            }
            pos_ = start;
            fail("unknown identifier '" + id + "'");
        }
        fail("unexpected character");
    }
};

}  // namespace

Evaluator parse_expression(const std::string& text, int n) {
    NodePtr root = Parser(text, n).parse();
    return [root](const CVec& z) { return root->eval(z); };
}

}  // namespace wavefront::coeffs
