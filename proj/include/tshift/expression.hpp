#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tshift/errors.hpp"

namespace tshift {

// Arithmetic expression language of the problem files.
//
//   expr  := term (('+' | '-') term)*
//   term  := power (('*' | '/') power)*
//   power := unary ('^' power)?          right-associative
//   unary := '-' unary | atom            unary minus binds tighter than '^'
//   atom  := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos exp ln sqrt abs sign (unary), pow intpow (binary).
// Constants: pi, e.  Anything else is a variable resolved at evaluation time.
class Expression {
 public:
  enum class Kind { number, variable, constant, negate, binary, call };

  struct Node;
  using NodePtr = std::shared_ptr<const Node>;

  struct Node {
    Kind kind;
    double number = 0.0;
    std::string name;  // variable / constant / function name
    char op = 0;       // + - * / ^
    std::vector<NodePtr> args;
    int line = 1;
    int col = 1;
  };

  static Expression parse(const std::string& src);

  const NodePtr& root() const { return root_; }

  double evaluate(const std::map<std::string, double>& env) const {
    return eval(*root_, env);
  }

  // verifies that every variable is among the allowed names
  void check_variables(const std::vector<std::string>& allowed) const {
    walk(*root_, [&](const Node& n) {
      if (n.kind != Kind::variable) return;
      for (const auto& name : allowed)
        if (name == n.name) return;
      throw UnknownIdentifierError(n.line, n.col, n.name);
    });
  }

  std::string to_string() const { return print(*root_, 0); }

  bool same_structure(const Expression& other) const {
    return equal(*root_, *other.root_);
  }

 private:
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  template <class F>
  static void walk(const Node& n, F&& f) {
    f(n);
    for (const auto& a : n.args) walk(*a, f);
  }

  static bool equal(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.op != b.op || a.name != b.name ||
        a.args.size() != b.args.size())
      return false;
    if (a.kind == Kind::number && a.number != b.number) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
      if (!equal(*a.args[i], *b.args[i])) return false;
    return true;
  }

  static double eval(const Node& n, const std::map<std::string, double>& env) {
    switch (n.kind) {
      case Kind::number:
        return n.number;
      case Kind::constant:
        return n.name == "pi" ? M_PI : M_E;
      case Kind::variable: {
        const auto it = env.find(n.name);
        if (it == env.end()) throw UnknownIdentifierError(n.line, n.col, n.name);
        return it->second;
      }
      case Kind::negate:
        return -eval(*n.args[0], env);
      case Kind::binary: {
        const double a = eval(*n.args[0], env);
        const double b = eval(*n.args[1], env);
        switch (n.op) {
          case '+': return a + b;
          case '-': return a - b;
          case '*': return a * b;
          case '/':
            if (b == 0.0) throw EvalDomainError("division by zero");
            return a / b;
          case '^': return power(a, b);
        }
        throw EvalDomainError("unknown operator");
      }
      case Kind::call: {
        const double a = eval(*n.args[0], env);
        if (n.name == "sin") return std::sin(a);
        if (n.name == "cos") return std::cos(a);
        if (n.name == "exp") return std::exp(a);
        if (n.name == "ln") {
          if (!(a > 0.0)) throw EvalDomainError("ln of a non-positive value");
          return std::log(a);
        }
        if (n.name == "sqrt") {
          if (a < 0.0) throw EvalDomainError("sqrt of a negative value");
          return std::sqrt(a);
        }
        if (n.name == "abs") return std::abs(a);
        if (n.name == "sign") return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
        const double b = eval(*n.args[1], env);
        if (n.name == "pow") return power(a, b);
        // intpow: the exponent must sit on an integer
        if (std::abs(b - std::llround(b)) > 1e-9)
          throw EvalDomainError("intpow exponent " + std::to_string(b) +
                                " is not an integer");
        return std::pow(a, static_cast<double>(std::llround(b)));
      }
    }
    throw EvalDomainError("unreachable expression node");
  }

  static double power(double a, double b) {
    if (a == 0.0 && b < 0.0) throw EvalDomainError("zero raised to a negative power");
    if (a < 0.0 && b != std::floor(b))
      throw EvalDomainError("negative base with a non-integer exponent");
    return std::pow(a, b);
  }

  // precedence levels for printing with minimal parentheses
  static int prec(const Node& n) {
    switch (n.kind) {
      case Kind::binary:
        return n.op == '+' || n.op == '-' ? 1 : (n.op == '^' ? 3 : 2);
      case Kind::negate:
        return 4;
      default:
        return 5;
    }
  }

  static std::string print(const Node& n, int context) {
    std::string out;
    switch (n.kind) {
      case Kind::number: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", n.number);
        out = buf;
        break;
      }
      case Kind::variable:
      case Kind::constant:
        out = n.name;
        break;
      case Kind::negate:
        out = "-" + print(*n.args[0], prec(n));
        break;
      case Kind::binary: {
        const int p = prec(n);
        const bool right_assoc = n.op == '^';
        out = print(*n.args[0], right_assoc ? p + 1 : p) + n.op +
              print(*n.args[1], right_assoc ? p : p + 1);
        break;
      }
      case Kind::call: {
        out = n.name + "(" + print(*n.args[0], 0);
        for (std::size_t i = 1; i < n.args.size(); ++i)
          out += ", " + print(*n.args[i], 0);
        out += ")";
        break;
      }
    }
    if (prec(n) < context) out = "(" + out + ")";
    return out;
  }

  NodePtr root_;
};

namespace expr_detail {

struct Token {
  enum class Type { number, ident, op, lparen, rparen, comma, end };
  Type type = Type::end;
  double number = 0.0;
  std::string text;
  char op = 0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      bump();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) return;
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      lex_number();
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      tok_.type = Token::Type::ident;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        tok_.text += src_[pos_];
        bump();
      }
    } else if (c == '(') {
      tok_.type = Token::Type::lparen;
      bump();
    } else if (c == ')') {
      tok_.type = Token::Type::rparen;
      bump();
    } else if (c == ',') {
      tok_.type = Token::Type::comma;
      bump();
    } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      tok_.type = Token::Type::op;
      tok_.op = c;
      bump();
    } else {
      throw SyntaxError(line_, col_, std::string("unexpected character '") + c + "'");
    }
  }

  void lex_number() {
    tok_.type = Token::Type::number;
    std::string text;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        text += src_[pos_];
        bump();
      }
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      text += '.';
      bump();
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      text += 'e';
      bump();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
        text += src_[pos_];
        bump();
      }
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
        throw SyntaxError(line_, col_, "malformed exponent in numeric literal");
      digits();
    }
    tok_.number = std::stod(text);
    tok_.text = text;
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

inline int arity_of(const std::string& fn) {
  if (fn == "sin" || fn == "cos" || fn == "exp" || fn == "ln" || fn == "sqrt" ||
      fn == "abs" || fn == "sign")
    return 1;
  if (fn == "pow" || fn == "intpow") return 2;
  return -1;
}

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  Expression::NodePtr parse() {
    auto e = expr();
    const auto& t = lex_.peek();
    if (t.type != Token::Type::end)
      throw SyntaxError(t.line, t.col, "expected an operator or the end of input");
    return e;
  }

 private:
  using Node = Expression::Node;
  using Kind = Expression::Kind;

  static Expression::NodePtr make(Node n) {
    return std::make_shared<const Node>(std::move(n));
  }

  Expression::NodePtr expr() {
    auto lhs = term();
    while (lex_.peek().type == Token::Type::op &&
           (lex_.peek().op == '+' || lex_.peek().op == '-')) {
      const Token t = lex_.take();
      auto rhs = term();
      lhs = make({Kind::binary, 0.0, "", t.op, {lhs, rhs}, t.line, t.col});
    }
    return lhs;
  }

  Expression::NodePtr term() {
    auto lhs = power();
    while (lex_.peek().type == Token::Type::op &&
           (lex_.peek().op == '*' || lex_.peek().op == '/')) {
      const Token t = lex_.take();
      auto rhs = power();
      lhs = make({Kind::binary, 0.0, "", t.op, {lhs, rhs}, t.line, t.col});
    }
    return lhs;
  }

  Expression::NodePtr power() {
    auto base = unary();
    if (lex_.peek().type == Token::Type::op && lex_.peek().op == '^') {
      const Token t = lex_.take();
      auto exponent = power();  // right-associative
      return make({Kind::binary, 0.0, "", '^', {base, exponent}, t.line, t.col});
    }
    return base;
  }

  Expression::NodePtr unary() {
    if (lex_.peek().type == Token::Type::op && lex_.peek().op == '-') {
      const Token t = lex_.take();
      auto inner = unary();
      return make({Kind::negate, 0.0, "", 0, {inner}, t.line, t.col});
    }
    return atom();
  }

  Expression::NodePtr atom() {
    const Token t = lex_.take();
    switch (t.type) {
      case Token::Type::number:
        return make({Kind::number, t.number, "", 0, {}, t.line, t.col});
      case Token::Type::ident: {
        if (lex_.peek().type == Token::Type::lparen) {
          const int expected = arity_of(t.text);
          if (expected < 0) throw UnknownIdentifierError(t.line, t.col, t.text);
          lex_.take();  // '('
          std::vector<Expression::NodePtr> args;
          args.push_back(expr());
          while (lex_.peek().type == Token::Type::comma) {
            lex_.take();
            args.push_back(expr());
          }
          expect(Token::Type::rparen, "')'");
          if (static_cast<int>(args.size()) != expected)
            throw ArityError(t.line, t.col, t.text, expected,
                             static_cast<int>(args.size()));
          return make({Kind::call, 0.0, t.text, 0, std::move(args), t.line, t.col});
        }
        if (t.text == "pi" || t.text == "e")
          return make({Kind::constant, 0.0, t.text, 0, {}, t.line, t.col});
        return make({Kind::variable, 0.0, t.text, 0, {}, t.line, t.col});
      }
      case Token::Type::lparen: {
        auto inner = expr();
        expect(Token::Type::rparen, "')'");
        return inner;
      }
      default:
        throw SyntaxError(t.line, t.col,
                          "expected a number, identifier or '(' here");
    }
  }

  void expect(Token::Type type, const std::string& what) {
    const Token t = lex_.take();
    if (t.type != type) throw SyntaxError(t.line, t.col, "expected " + what);
  }

  Lexer lex_;
};

}  // namespace expr_detail

inline Expression Expression::parse(const std::string& src) {
  expr_detail::Parser parser(src);
  return Expression(parser.parse());
}

}  // namespace tshift
