#include "stlcbf/stl/parse.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <utility>

namespace stlcbf::stl {

ParseError::ParseError(const std::string& msg, int line_, int col_)
    : std::runtime_error(std::to_string(line_) + ":" + std::to_string(col_) +
                         ": " + msg),
      line(line_),
      col(col_) {}

namespace {

enum class Tok {
  Ident,
  Number,
  LBracket,
  RBracket,
  LParen,
  RParen,
  Comma,
  Bar,
  Plus,
  Minus,
  Star,
  Slash,
  Le,
  Lt,
  Ge,
  Gt,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return cur_; }

  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r' ||
            src_[pos_] == '\n')) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
    cur_ = Token{};
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= src_.size()) {
      cur_.kind = Tok::End;
      return;
    }
    const char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t b = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_')) {
        ++pos_;
        ++col_;
      }
      cur_.kind = Tok::Ident;
      cur_.text = src_.substr(b, pos_ - b);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      std::size_t b = pos_;
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '.')) {
        ++pos_;
        ++col_;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t e = pos_ + 1;
        if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
        if (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) {
          while (e < src_.size() &&
                 std::isdigit(static_cast<unsigned char>(src_[e]))) {
            ++e;
          }
          col_ += static_cast<int>(e - pos_);
          pos_ = e;
        }
      }
      cur_.kind = Tok::Number;
      cur_.text = src_.substr(b, pos_ - b);
      cur_.number = std::strtod(cur_.text.c_str(), nullptr);
      return;
    }
    auto two = [&](char a, char b) {
      return c == a && pos_ + 1 < src_.size() && src_[pos_ + 1] == b;
    };
    if (two('<', '=')) {
      cur_.kind = Tok::Le;
      pos_ += 2;
      col_ += 2;
      return;
    }
    if (two('>', '=')) {
      cur_.kind = Tok::Ge;
      pos_ += 2;
      col_ += 2;
      return;
    }
    switch (c) {
      case '[': cur_.kind = Tok::LBracket; break;
      case ']': cur_.kind = Tok::RBracket; break;
      case '(': cur_.kind = Tok::LParen; break;
      case ')': cur_.kind = Tok::RParen; break;
      case ',': cur_.kind = Tok::Comma; break;
      case '|': cur_.kind = Tok::Bar; break;
      case '+': cur_.kind = Tok::Plus; break;
      case '-': cur_.kind = Tok::Minus; break;
      case '*': cur_.kind = Tok::Star; break;
      case '/': cur_.kind = Tok::Slash; break;
      case '<': cur_.kind = Tok::Lt; break;
      case '>': cur_.kind = Tok::Gt; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_,
                         col_);
    }
    ++pos_;
    ++col_;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token cur_;
};

class Parser {
 public:
  Parser(const std::string& text, int state_dim) : lex_(text), n_(state_dim) {}

  Specification parse(std::optional<double> horizon) {
    std::vector<TemporalBlock> blocks;
    blocks.push_back(parse_clause());
    while (lex_.peek().kind == Tok::Ident && lex_.peek().text == "and") {
      lex_.take();
      blocks.push_back(parse_clause());
    }
    expect(Tok::End, "end of specification");

    double max_b = 0.0;
    for (const auto& blk : blocks) max_b = std::max(max_b, blk.b);
    double T = horizon.value_or(max_b);
    if (max_b > T * (1.0 + 1e-12)) {
      throw ParseError("block interval end " + std::to_string(max_b) +
                           " exceeds horizon " + std::to_string(T),
                       1, 1);
    }
    Specification spec;
    spec.blocks = std::move(blocks);
    spec.horizon = T;
    spec.state_dim = n_;
    return spec;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, const Token& at) {
    throw ParseError(msg, at.line, at.col);
  }

  Token expect(Tok kind, const std::string& what) {
    if (lex_.peek().kind != kind) {
      fail("expected " + what, lex_.peek());
    }
    return lex_.take();
  }

  TemporalBlock parse_clause() {
    const Token head = lex_.peek();
    if (head.kind != Tok::Ident || (head.text != "G" && head.text != "F")) {
      if (head.kind == Tok::Ident && head.text == "U") {
        fail("the Until operator is outside the supported fragment", head);
      }
      fail("expected temporal block 'G[a,b](...)' or 'F[a,b](...)'", head);
    }
    lex_.take();
    TemporalBlock blk;
    blk.op = head.text == "G" ? TemporalOp::Always : TemporalOp::Eventually;
    expect(Tok::LBracket, "'['");
    blk.a = parse_number_expr();
    expect(Tok::Comma, "','");
    blk.b = parse_number_expr();
    expect(Tok::RBracket, "']'");
    if (blk.a < 0.0 || !(blk.a < blk.b)) {
      fail("temporal interval requires 0 <= a < b", head);
    }
    expect(Tok::LParen, "'('");
    blk.body = parse_or();
    expect(Tok::RParen, "')'");
    return blk;
  }

  FormulaPtr parse_or() {
    std::vector<FormulaPtr> parts;
    parts.push_back(parse_and());
    while (lex_.peek().kind == Tok::Ident && lex_.peek().text == "or") {
      lex_.take();
      parts.push_back(parse_and());
    }
    if (parts.size() == 1) return parts[0];
    return make_or(std::move(parts));
  }

  FormulaPtr parse_and() {
    std::vector<FormulaPtr> parts;
    parts.push_back(parse_term());
    while (lex_.peek().kind == Tok::Ident && lex_.peek().text == "and") {
      lex_.take();
      parts.push_back(parse_term());
    }
    if (parts.size() == 1) return parts[0];
    return make_and(std::move(parts));
  }

  FormulaPtr parse_term() {
    const Token t = lex_.peek();
    if (t.kind == Tok::LParen) {
      lex_.take();
      FormulaPtr f = parse_or();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (t.kind == Tok::Bar) return parse_abs_atom();
    if (t.kind == Tok::Ident) {
      if (t.text == "not") {
        lex_.take();
        return make_not(parse_term());
      }
      if (t.text == "true") {
        lex_.take();
        return make_true();
      }
      if (t.text == "G" || t.text == "F") {
        fail("nested temporal operators are outside the supported fragment", t);
      }
      if (t.text == "U") {
        fail("the Until operator is outside the supported fragment", t);
      }
      if (t.text.rfind("norm", 0) == 0) return parse_norm_atom();
      if (t.text.size() >= 2 && t.text[0] == 'x') return parse_affine_atom();
    }
    fail("expected predicate, 'not', 'true' or '('", t);
  }

  int parse_state_index(const Token& t) {
    // "x<k>", 1-based
    for (std::size_t i = 1; i < t.text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(t.text[i]))) {
        fail("expected state variable 'x<k>'", t);
      }
    }
    const int k = std::atoi(t.text.c_str() + 1);
    if (k < 1 || k > n_) {
      fail("state index " + t.text + " out of range for dimension " +
               std::to_string(n_),
           t);
    }
    return k - 1;
  }

  FormulaPtr parse_affine_atom() {
    const Token t = lex_.take();
    const int k = parse_state_index(t);
    const Token cmp = lex_.take();
    const double v = parse_number_expr();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n_);
    switch (cmp.kind) {
      case Tok::Le:
      case Tok::Lt:
        c[k] = -1.0;
        return make_atom(PredicateAtom::affine(std::move(c), v));
      case Tok::Ge:
      case Tok::Gt:
        c[k] = 1.0;
        return make_atom(PredicateAtom::affine(std::move(c), -v));
      default:
        fail("expected comparison operator", cmp);
    }
  }

  FormulaPtr parse_abs_atom() {
    // |xk| <= r  or  |xk - v| <= r, sugar for a two-atom conjunction
    const Token bar = expect(Tok::Bar, "'|'");
    const Token xt = lex_.peek();
    if (xt.kind != Tok::Ident || xt.text.empty() || xt.text[0] != 'x') {
      fail("expected state variable inside '|...|'", xt);
    }
    lex_.take();
    const int k = parse_state_index(xt);
    double v = 0.0;
    if (lex_.peek().kind == Tok::Minus) {
      lex_.take();
      v = parse_number_expr();
    } else if (lex_.peek().kind == Tok::Plus) {
      lex_.take();
      v = -parse_number_expr();
    }
    expect(Tok::Bar, "closing '|'");
    const Token cmp = lex_.take();
    if (cmp.kind != Tok::Le && cmp.kind != Tok::Lt) {
      fail("absolute-value atoms support '<=' only", cmp);
    }
    const double r = parse_number_expr();
    if (!(r > 0.0)) fail("absolute-value bound must be positive", bar);

    Eigen::VectorXd up = Eigen::VectorXd::Zero(n_);
    up[k] = -1.0;  // xk <= v + r
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(n_);
    lo[k] = 1.0;  // xk >= v - r
    std::vector<FormulaPtr> parts;
    parts.push_back(make_atom(PredicateAtom::affine(std::move(up), v + r)));
    parts.push_back(make_atom(PredicateAtom::affine(std::move(lo), -(v - r))));
    return make_and(std::move(parts));
  }

  FormulaPtr parse_norm_atom() {
    const Token t = lex_.take();
    NormOrder order;
    if (t.text == "norm1") {
      order = NormOrder::L1;
    } else if (t.text == "norm2") {
      order = NormOrder::L2;
    } else if (t.text == "norminf") {
      order = NormOrder::LInf;
    } else {
      fail("unknown norm '" + t.text + "' (use norm1, norm2 or norminf)", t);
    }
    expect(Tok::LParen, "'('");
    const Token xt = expect(Tok::Ident, "'x'");
    if (xt.text != "x") fail("norm atoms apply to the full state 'x'", xt);
    expect(Tok::Comma, "','");
    const Eigen::VectorXd center = parse_vector(t);
    expect(Tok::RParen, "')'");

    Eigen::VectorXd scale = Eigen::VectorXd::Ones(n_);
    if (lex_.peek().kind == Tok::Ident && lex_.peek().text == "scale") {
      const Token st = lex_.take();
      scale = parse_vector(st);
    }
    const Token cmp = lex_.take();
    const double r = parse_number_expr();
    if (!(r > 0.0)) fail("norm bound must be positive", cmp);
    PredicateAtom atom = PredicateAtom::norm(center, scale, r, order);
    switch (cmp.kind) {
      case Tok::Le:
      case Tok::Lt:
        return make_atom(std::move(atom));
      case Tok::Ge:
      case Tok::Gt:
        return make_not(make_atom(std::move(atom)));
      default:
        fail("expected comparison operator after norm atom", cmp);
    }
  }

  Eigen::VectorXd parse_vector(const Token& at) {
    expect(Tok::LBracket, "'['");
    std::vector<double> vals;
    vals.push_back(parse_number_expr());
    while (lex_.peek().kind == Tok::Comma) {
      lex_.take();
      vals.push_back(parse_number_expr());
    }
    expect(Tok::RBracket, "']'");
    if (static_cast<int>(vals.size()) != n_) {
      fail("vector literal has " + std::to_string(vals.size()) +
               " entries, state dimension is " + std::to_string(n_),
           at);
    }
    Eigen::VectorXd v(n_);
    for (int i = 0; i < n_; ++i) v[i] = vals[static_cast<std::size_t>(i)];
    return v;
  }

  // constant expression: literals and pi with + - * / and parentheses
  double parse_number_expr() { return parse_additive(); }

  double parse_additive() {
    double v = parse_multiplicative();
    for (;;) {
      if (lex_.peek().kind == Tok::Plus) {
        lex_.take();
        v += parse_multiplicative();
      } else if (lex_.peek().kind == Tok::Minus) {
        lex_.take();
        v -= parse_multiplicative();
      } else {
        return v;
      }
    }
  }

  double parse_multiplicative() {
    double v = parse_unary();
    for (;;) {
      if (lex_.peek().kind == Tok::Star) {
        lex_.take();
        v *= parse_unary();
      } else if (lex_.peek().kind == Tok::Slash) {
        lex_.take();
        const Token at = lex_.peek();
        const double d = parse_unary();
        if (d == 0.0) fail("division by zero in constant expression", at);
        v /= d;
      } else {
        return v;
      }
    }
  }

  double parse_unary() {
    if (lex_.peek().kind == Tok::Minus) {
      lex_.take();
      return -parse_unary();
    }
    return parse_primary();
  }

  double parse_primary() {
    const Token t = lex_.peek();
    if (t.kind == Tok::Number) {
      lex_.take();
      return t.number;
    }
    if (t.kind == Tok::Ident && t.text == "pi") {
      lex_.take();
      return 3.14159265358979323846;
    }
    if (t.kind == Tok::LParen) {
      lex_.take();
      const double v = parse_additive();
      expect(Tok::RParen, "')'");
      return v;
    }
    fail("expected number", t);
  }

  Lexer lex_;
  int n_;
};

}  // namespace

Specification parse_spec(const std::string& text, int state_dim,
                         std::optional<double> horizon) {
  if (state_dim < 1) {
    throw std::invalid_argument("parse_spec: state dimension must be >= 1");
  }
  Parser p(text, state_dim);
  return p.parse(horizon);
}

}  // namespace stlcbf::stl
