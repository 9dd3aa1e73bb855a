// Copyright 2026 The FinTeam Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "finteam/expr.hpp"

#include <cmath>
#include <cstdlib>
#include <unordered_map>

#include "finteam/error.hpp"
#include "finteam/text_util.hpp"

namespace finteam {

ExprPtr Expr::make_number(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Number;
  e->number = v;
  return e;
}

ExprPtr Expr::make_variable(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Variable;
  e->name = std::move(name);
  return e;
}

ExprPtr Expr::make_unary(ExprPtr operand) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Unary;
  e->op = '-';
  e->args = {std::move(operand)};
  return e;
}

ExprPtr Expr::make_binary(char op, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->op = op;
  e->args = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprPtr Expr::make_call(std::string name, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Call;
  e->name = std::move(name);
  e->args = std::move(args);
  return e;
}

namespace {

const std::unordered_map<std::string, int> kFunctions = {
    {"sqrt", 1}, {"abs", 1}, {"ln", 1},  {"log10", 1},
    {"exp", 1},  {"min", 2}, {"max", 2}, {"pow", 2},
};

struct Token {
  enum class Type { Number, Ident, Op, LParen, RParen, Comma, End };
  Type type = Type::End;
  double number = 0.0;
  std::string text;
  char op = 0;
  size_t offset = 0;
};

// Lexer over UTF-8 bytes. Full-width and Unicode math symbols common in
// Chinese financial text are mapped onto their ASCII forms.
class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space();
    Token tok;
    tok.offset = pos_;
    if (pos_ >= text_.size()) {
      tok.type = Token::Type::End;
      return tok;
    }
    unsigned char c = static_cast<unsigned char>(text_[pos_]);
    if (std::isdigit(c) || (c == '.' && pos_ + 1 < text_.size() &&
                            std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      return lex_number();
    }
    if (std::isalpha(c) || c == '_') return lex_ident();
    if (c < 0x80) {
      ++pos_;
      switch (c) {
        case '+': case '-': case '*': case '/': case '^':
          tok.type = Token::Type::Op;
          tok.op = static_cast<char>(c);
          return tok;
        case '(':
          tok.type = Token::Type::LParen;
          return tok;
        case ')':
          tok.type = Token::Type::RParen;
          return tok;
        case ',':
          tok.type = Token::Type::Comma;
          return tok;
        default:
          throw ParseError("syntax-error",
                           "unexpected character '" + std::string(1, static_cast<char>(c)) + "'",
                           tok.offset);
      }
    }
    size_t p = pos_;
    char32_t cp = utf8_next(text_, p);
    char mapped = map_wide(cp);
    if (mapped != 0) {
      pos_ = p;
      switch (mapped) {
        case '(': tok.type = Token::Type::LParen; return tok;
        case ')': tok.type = Token::Type::RParen; return tok;
        case ',': tok.type = Token::Type::Comma; return tok;
        default:
          tok.type = Token::Type::Op;
          tok.op = mapped;
          return tok;
      }
    }
    // any other non-ASCII codepoint starts an identifier (CJK variable names)
    return lex_ident();
  }

  size_t pos() const { return pos_; }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      unsigned char c = static_cast<unsigned char>(text_[pos_]);
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos_;
        continue;
      }
      if (c >= 0x80) {
        size_t p = pos_;
        char32_t cp = utf8_next(text_, p);
        if (cp == 0x3000) {  // ideographic space
          pos_ = p;
          continue;
        }
      }
      break;
    }
  }

  static char map_wide(char32_t cp) {
    switch (cp) {
      case 0x2212: return '-';  // minus sign
      case 0x00D7: return '*';  // multiplication sign
      case 0x00F7: return '/';  // division sign
      case 0xFF08: return '(';
      case 0xFF09: return ')';
      case 0xFF0C: return ',';
      case 0xFF0B: return '+';
      case 0xFF0D: return '-';
      default: return 0;
    }
  }

  Token lex_number() {
    Token tok;
    tok.type = Token::Type::Number;
    tok.offset = pos_;
    size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' belongs to a following identifier, not the number
      }
    }
    std::string lit(text_.substr(start, pos_ - start));
    tok.number = std::strtod(lit.c_str(), nullptr);
    if (pos_ < text_.size() && text_[pos_] == '%') {
      ++pos_;
      tok.number /= 100.0;
    }
    return tok;
  }

  Token lex_ident() {
    Token tok;
    tok.type = Token::Type::Ident;
    tok.offset = pos_;
    size_t start = pos_;
    while (pos_ < text_.size()) {
      unsigned char c = static_cast<unsigned char>(text_[pos_]);
      if (std::isalnum(c) || c == '_') {
        ++pos_;
        continue;
      }
      if (c >= 0x80) {
        size_t p = pos_;
        char32_t cp = utf8_next(text_, p);
        if (map_wide(cp) != 0 || cp == 0x3000 || cp == 0xFFFD) break;
        pos_ = p;
        continue;
      }
      break;
    }
    tok.text = std::string(text_.substr(start, pos_ - start));
    return tok;
  }

  std::string_view text_;
  size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { advance(); }

  ExprPtr parse() {
    ExprPtr e = parse_sum();
    if (cur_.type != Token::Type::End) {
      if (cur_.type == Token::Type::RParen) {
        throw ParseError("unbalanced-parentheses", "unmatched ')'", cur_.offset);
      }
      throw ParseError("syntax-error", "trailing input", cur_.offset);
    }
    return e;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  ExprPtr parse_sum() {
    ExprPtr lhs = parse_product();
    while (cur_.type == Token::Type::Op && (cur_.op == '+' || cur_.op == '-')) {
      char op = cur_.op;
      advance();
      lhs = Expr::make_binary(op, std::move(lhs), parse_product());
    }
    return lhs;
  }

  ExprPtr parse_product() {
    ExprPtr lhs = parse_unary();
    while (cur_.type == Token::Type::Op && (cur_.op == '*' || cur_.op == '/')) {
      char op = cur_.op;
      advance();
      lhs = Expr::make_binary(op, std::move(lhs), parse_unary());
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (cur_.type == Token::Type::Op && cur_.op == '-') {
      advance();
      return Expr::make_unary(parse_unary());
    }
    if (cur_.type == Token::Type::Op && cur_.op == '+') {
      advance();
      return parse_unary();
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (cur_.type == Token::Type::Op && cur_.op == '^') {
      advance();
      // right-associative; exponent may carry a unary minus
      return Expr::make_binary('^', std::move(base), parse_unary());
    }
    return base;
  }

  ExprPtr parse_primary() {
    switch (cur_.type) {
      case Token::Type::Number: {
        double v = cur_.number;
        advance();
        // implicit multiplication: "2x" and "3(1+2)"
        if (cur_.type == Token::Type::Ident || cur_.type == Token::Type::LParen) {
          return Expr::make_binary('*', Expr::make_number(v), parse_power());
        }
        return Expr::make_number(v);
      }
      case Token::Type::Ident: {
        std::string name = cur_.text;
        size_t name_offset = cur_.offset;
        advance();
        if (cur_.type == Token::Type::LParen) {
          auto it = kFunctions.find(name);
          if (it == kFunctions.end()) {
            throw ParseError("unknown-function", "unknown function '" + name + "'", name_offset);
          }
          size_t open_offset = cur_.offset;
          advance();
          std::vector<ExprPtr> args;
          if (cur_.type != Token::Type::RParen) {
            args.push_back(parse_sum());
            while (cur_.type == Token::Type::Comma) {
              advance();
              args.push_back(parse_sum());
            }
          }
          if (cur_.type != Token::Type::RParen) {
            throw ParseError("unbalanced-parentheses", "expected ')'",
                             cur_.type == Token::Type::End ? lexer_.pos() : cur_.offset);
          }
          (void)open_offset;
          advance();
          if (static_cast<int>(args.size()) != it->second) {
            throw ParseError("syntax-error",
                             "function '" + name + "' expects " + std::to_string(it->second) +
                                 " argument(s)",
                             name_offset);
          }
          return Expr::make_call(name, std::move(args));
        }
        return Expr::make_variable(name);
      }
      case Token::Type::LParen: {
        advance();
        ExprPtr inner = parse_sum();
        if (cur_.type != Token::Type::RParen) {
          throw ParseError("unbalanced-parentheses", "expected ')'",
                           cur_.type == Token::Type::End ? lexer_.pos() : cur_.offset);
        }
        advance();
        return inner;
      }
      case Token::Type::End:
        throw ParseError("syntax-error", "unexpected end of expression", lexer_.pos());
      default:
        throw ParseError("syntax-error", "unexpected token", cur_.offset);
    }
  }

  Lexer lexer_;
  Token cur_;
};

double check_finite(double v) {
  if (!std::isfinite(v)) {
    throw Error("non-finite-result", "expression result is not finite");
  }
  return v;
}

}  // namespace

ExprPtr parse_expression(std::string_view text) {
  if (text.empty()) {
    throw ParseError("syntax-error", "empty expression", 0);
  }
  return Parser(text).parse();
}

double eval_expression(const Expr& expr, const Assignment* bindings) {
  switch (expr.kind) {
    case Expr::Kind::Number:
      return expr.number;
    case Expr::Kind::Variable: {
      if (bindings) {
        auto it = bindings->find(expr.name);
        if (it != bindings->end()) return it->second;
      }
      throw Error("unbound-variable", "unbound variable '" + expr.name + "'");
    }
    case Expr::Kind::Unary:
      return -eval_expression(*expr.args[0], bindings);
    case Expr::Kind::Binary: {
      double lhs = eval_expression(*expr.args[0], bindings);
      double rhs = eval_expression(*expr.args[1], bindings);
      switch (expr.op) {
        case '+': return check_finite(lhs + rhs);
        case '-': return check_finite(lhs - rhs);
        case '*': return check_finite(lhs * rhs);
        case '/':
          if (rhs == 0.0) throw Error("division-by-zero", "division by zero");
          return check_finite(lhs / rhs);
        case '^': {
          double v = std::pow(lhs, rhs);
          if (std::isnan(v)) {
            throw Error("domain-error", "invalid exponentiation");
          }
          return check_finite(v);
        }
        default:
          throw Error("syntax-error", "unknown operator");
      }
    }
    case Expr::Kind::Call: {
      const std::string& fn = expr.name;
      if (fn == "sqrt") {
        double a = eval_expression(*expr.args[0], bindings);
        if (a < 0.0) throw Error("domain-error", "sqrt of negative value");
        return check_finite(std::sqrt(a));
      }
      if (fn == "abs") return check_finite(std::abs(eval_expression(*expr.args[0], bindings)));
      if (fn == "ln") {
        double a = eval_expression(*expr.args[0], bindings);
        if (a <= 0.0) throw Error("domain-error", "ln of non-positive value");
        return check_finite(std::log(a));
      }
      if (fn == "log10") {
        double a = eval_expression(*expr.args[0], bindings);
        if (a <= 0.0) throw Error("domain-error", "log10 of non-positive value");
        return check_finite(std::log10(a));
      }
      if (fn == "exp") return check_finite(std::exp(eval_expression(*expr.args[0], bindings)));
      if (fn == "min") {
        return std::min(eval_expression(*expr.args[0], bindings),
                        eval_expression(*expr.args[1], bindings));
      }
      if (fn == "max") {
        return std::max(eval_expression(*expr.args[0], bindings),
                        eval_expression(*expr.args[1], bindings));
      }
      if (fn == "pow") {
        double v = std::pow(eval_expression(*expr.args[0], bindings),
                            eval_expression(*expr.args[1], bindings));
        if (std::isnan(v)) throw Error("domain-error", "invalid exponentiation");
        return check_finite(v);
      }
      throw Error("unknown-function", "unknown function '" + fn + "'");
    }
  }
  throw Error("syntax-error", "corrupt expression node");
}

namespace {

enum Level { kAdd = 1, kMul = 2, kUnary = 3, kPow = 4, kAtom = 5 };

int node_level(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Binary:
      if (e.op == '+' || e.op == '-') return kAdd;
      if (e.op == '*' || e.op == '/') return kMul;
      return kPow;
    case Expr::Kind::Unary:
      return kUnary;
    default:
      return kAtom;
  }
}

void print_node(const Expr& e, std::string& out, bool nested);

void print_child(const Expr& child, std::string& out, bool parens) {
  if (parens) {
    out += '(';
    print_node(child, out, true);
    out += ')';
  } else {
    print_node(child, out, true);
  }
}

void print_node(const Expr& e, std::string& out, bool nested) {
  switch (e.kind) {
    case Expr::Kind::Number: {
      bool neg = std::signbit(e.number) && e.number != 0.0;
      if (neg && nested) {
        out += '(';
        out += format_number_roundtrip(e.number);
        out += ')';
      } else {
        out += format_number_roundtrip(e.number);
      }
      return;
    }
    case Expr::Kind::Variable:
      out += e.name;
      return;
    case Expr::Kind::Unary: {
      const Expr& operand = *e.args[0];
      out += '-';
      int lv = node_level(operand);
      // unary binds tighter than * and +; ^ binds tighter than unary
      bool parens = lv < kUnary || operand.kind == Expr::Kind::Unary ||
                    (operand.kind == Expr::Kind::Number && std::signbit(operand.number));
      print_child(operand, out, parens);
      return;
    }
    case Expr::Kind::Binary: {
      const Expr& lhs = *e.args[0];
      const Expr& rhs = *e.args[1];
      int my = node_level(e);
      if (e.op == '^') {
        // right-associative: parenthesize a pow/unary left child
        print_child(lhs, out, node_level(lhs) <= kPow && node_level(lhs) != kAtom);
        out += '^';
        // exponent slot accepts unary directly; anything looser needs parens
        print_child(rhs, out, node_level(rhs) < kUnary);
      } else {
        // left-associative: equal level on the right needs parens
        print_child(lhs, out, node_level(lhs) < my);
        out += e.op;
        print_child(rhs, out, node_level(rhs) <= my);
      }
      return;
    }
    case Expr::Kind::Call: {
      out += e.name;
      out += '(';
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i > 0) out += ',';
        print_node(*e.args[i], out, false);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string print_expression(const Expr& expr) {
  std::string out;
  print_node(expr, out, false);
  return out;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Number:
      return a.number == b.number && std::signbit(a.number) == std::signbit(b.number);
    case Expr::Kind::Variable:
      return a.name == b.name;
    case Expr::Kind::Unary:
      return expr_equal(*a.args[0], *b.args[0]);
    case Expr::Kind::Binary:
      return a.op == b.op && expr_equal(*a.args[0], *b.args[0]) &&
             expr_equal(*a.args[1], *b.args[1]);
    case Expr::Kind::Call:
      if (a.name != b.name || a.args.size() != b.args.size()) return false;
      for (size_t i = 0; i < a.args.size(); ++i) {
        if (!expr_equal(*a.args[i], *b.args[i])) return false;
      }
      return true;
  }
  return false;
}

static void collect_vars(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == Expr::Kind::Variable) {
    for (const auto& v : out) {
      if (v == e.name) return;
    }
    out.push_back(e.name);
    return;
  }
  for (const auto& a : e.args) collect_vars(*a, out);
}

std::vector<std::string> expr_variables(const Expr& expr) {
  std::vector<std::string> vars;
  collect_vars(expr, vars);
  return vars;
}

}  // namespace finteam
