// Copyright 2026 The ctkkt Authors
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

#include "ctkkt/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <utility>

#include "ctkkt/errors.hpp"

namespace ctkkt {

namespace {

bool is_finite(double v) { return std::isfinite(v); }

bool is_integer_value(double v) {
  return is_finite(v) && v == std::floor(v) && std::abs(v) < 1e15;
}

std::shared_ptr<const Expr::Node> make_node(Expr::Node node) {
  return std::make_shared<const Expr::Node>(std::move(node));
}

}  // namespace

int arity(ExprKind kind) noexcept {
  switch (kind) {
    case ExprKind::kConstant:
    case ExprKind::kVarZ:
    case ExprKind::kVarT:
      return 0;
    case ExprKind::kNeg:
    case ExprKind::kSin:
    case ExprKind::kCos:
    case ExprKind::kExp:
    case ExprKind::kLog:
    case ExprKind::kSqrt:
      return 1;
    default:
      return 2;
  }
}

Expr::Expr() : node_(make_node(Expr::Node{})) {}

Expr Expr::constant(double value) {
  Node node;
  node.kind = ExprKind::kConstant;
  node.value = value;
  return Expr(make_node(std::move(node)));
}

Expr Expr::variable_z(int index, int source_pos) {
  if (index < 1) throw Error("state variable index must be >= 1");
  Node node;
  node.kind = ExprKind::kVarZ;
  node.var_index = index;
  node.source_pos = source_pos;
  return Expr(make_node(std::move(node)));
}

Expr Expr::variable_t(int source_pos) {
  Node node;
  node.kind = ExprKind::kVarT;
  node.source_pos = source_pos;
  return Expr(make_node(std::move(node)));
}

Expr Expr::unary(ExprKind kind, Expr operand, int source_pos) {
  if (arity(kind) != 1) throw Error("unary factory called with non-unary kind");

  if (operand.is_constant()) {
    const double x = operand.constant_value();
    double folded = 0.0;
    bool ok = true;
    switch (kind) {
      case ExprKind::kNeg: folded = -x; break;
      case ExprKind::kSin: folded = std::sin(x); break;
      case ExprKind::kCos: folded = std::cos(x); break;
      case ExprKind::kExp: folded = std::exp(x); break;
      case ExprKind::kLog: ok = x > 0.0; folded = ok ? std::log(x) : 0.0; break;
      case ExprKind::kSqrt: ok = x >= 0.0; folded = ok ? std::sqrt(x) : 0.0; break;
      default: ok = false; break;
    }
    // Out-of-domain constants are kept as nodes so evaluation reports them.
    if (ok && is_finite(folded)) return Expr::constant(folded);
  }
  if (kind == ExprKind::kNeg && operand.kind() == ExprKind::kNeg) {
    return operand.operand();
  }

  Node node;
  node.kind = kind;
  node.source_pos = source_pos;
  node.a = std::move(operand.node_);
  return Expr(make_node(std::move(node)));
}

Expr Expr::binary(ExprKind kind, Expr lhs, Expr rhs, int source_pos) {
  if (arity(kind) != 2) throw Error("binary factory called with non-binary kind");

  if (kind == ExprKind::kPow && !rhs.is_constant()) {
    throw Error("pow exponent must be a constant expression");
  }

  if (lhs.is_constant() && rhs.is_constant()) {
    const double x = lhs.constant_value();
    const double y = rhs.constant_value();
    double folded = 0.0;
    bool ok = true;
    switch (kind) {
      case ExprKind::kAdd: folded = x + y; break;
      case ExprKind::kSub: folded = x - y; break;
      case ExprKind::kMul: folded = x * y; break;
      case ExprKind::kDiv: ok = y != 0.0; folded = ok ? x / y : 0.0; break;
      case ExprKind::kPow:
        ok = !(x == 0.0 && y < 0.0) && !(x < 0.0 && !is_integer_value(y));
        folded = ok ? std::pow(x, y) : 0.0;
        break;
      default: ok = false; break;
    }
    if (ok && is_finite(folded)) return Expr::constant(folded);
  }

  switch (kind) {
    case ExprKind::kAdd:
      if (lhs.is_constant(0.0)) return rhs;
      if (rhs.is_constant(0.0)) return lhs;
      break;
    case ExprKind::kSub:
      if (rhs.is_constant(0.0)) return lhs;
      if (lhs.is_constant(0.0)) return unary(ExprKind::kNeg, std::move(rhs), source_pos);
      break;
    case ExprKind::kMul: {
      // Canonical form: constant factor on the left, so stacked constant
      // factors fold (e.g. 0.5 * (2 * z2) -> z2).
      if (rhs.is_constant() && !lhs.is_constant()) std::swap(lhs, rhs);
      if (lhs.is_constant()) {
        const double c = lhs.constant_value();
        if (c == 0.0) return Expr::constant(0.0);
        if (c == 1.0) return rhs;
        if (rhs.kind() == ExprKind::kMul && rhs.lhs().is_constant()) {
          const double folded = c * rhs.lhs().constant_value();
          if (is_finite(folded)) {
            return binary(ExprKind::kMul, Expr::constant(folded), rhs.rhs(), source_pos);
          }
        }
      }
      break;
    }
    case ExprKind::kDiv:
      if (rhs.is_constant(1.0)) return lhs;
      if (lhs.is_constant(0.0)) return Expr::constant(0.0);
      break;
    case ExprKind::kPow:
      if (rhs.is_constant(0.0)) return Expr::constant(1.0);
      if (rhs.is_constant(1.0)) return lhs;
      break;
    default:
      break;
  }

  Node node;
  node.kind = kind;
  node.source_pos = source_pos;
  node.a = std::move(lhs.node_);
  node.b = std::move(rhs.node_);
  return Expr(make_node(std::move(node)));
}

ExprKind Expr::kind() const noexcept { return node_->kind; }

double Expr::constant_value() const {
  if (node_->kind != ExprKind::kConstant) throw Error("node is not a constant");
  return node_->value;
}

int Expr::var_index() const {
  if (node_->kind != ExprKind::kVarZ) throw Error("node is not a state variable");
  return node_->var_index;
}

Expr Expr::operand() const { return Expr(node_->a); }
Expr Expr::lhs() const { return Expr(node_->a); }
Expr Expr::rhs() const { return Expr(node_->b); }
int Expr::source_pos() const noexcept { return node_->source_pos; }

bool Expr::is_constant() const noexcept { return node_->kind == ExprKind::kConstant; }

bool Expr::is_constant(double value) const noexcept {
  return is_constant() && node_->value == value;
}

// ---------------------------------------------------------------------------
// Evaluation

double eval_expr(const Expr& e, std::span<const double> z, double t) {
  switch (e.kind()) {
    case ExprKind::kConstant:
      return e.constant_value();
    case ExprKind::kVarZ: {
      const int idx = e.var_index();
      if (idx < 1 || static_cast<size_t>(idx) > z.size()) {
        throw EvalError("state variable z" + std::to_string(idx) +
                            " outside the provided state vector",
                        e.source_pos());
      }
      return z[static_cast<size_t>(idx - 1)];
    }
    case ExprKind::kVarT:
      return t;
    case ExprKind::kNeg:
      return -eval_expr(e.operand(), z, t);
    case ExprKind::kSin:
      return std::sin(eval_expr(e.operand(), z, t));
    case ExprKind::kCos:
      return std::cos(eval_expr(e.operand(), z, t));
    case ExprKind::kExp:
      return std::exp(eval_expr(e.operand(), z, t));
    case ExprKind::kLog: {
      const double x = eval_expr(e.operand(), z, t);
      if (x <= 0.0) throw EvalError("log of a non-positive value", e.source_pos());
      return std::log(x);
    }
    case ExprKind::kSqrt: {
      const double x = eval_expr(e.operand(), z, t);
      if (x < 0.0) throw EvalError("square root of a negative value", e.source_pos());
      return std::sqrt(x);
    }
    case ExprKind::kAdd:
      return eval_expr(e.lhs(), z, t) + eval_expr(e.rhs(), z, t);
    case ExprKind::kSub:
      return eval_expr(e.lhs(), z, t) - eval_expr(e.rhs(), z, t);
    case ExprKind::kMul:
      return eval_expr(e.lhs(), z, t) * eval_expr(e.rhs(), z, t);
    case ExprKind::kDiv: {
      const double den = eval_expr(e.rhs(), z, t);
      if (den == 0.0) throw EvalError("division by zero", e.source_pos());
      return eval_expr(e.lhs(), z, t) / den;
    }
    case ExprKind::kPow: {
      const double base = eval_expr(e.lhs(), z, t);
      const double exponent = e.rhs().constant_value();
      if (base == 0.0 && exponent < 0.0) {
        throw EvalError("zero base raised to a negative power", e.source_pos());
      }
      if (base < 0.0 && !is_integer_value(exponent)) {
        throw EvalError("negative base raised to a non-integer power", e.source_pos());
      }
      return std::pow(base, exponent);
    }
  }
  throw Error("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr diff(const Expr& e, VarRef var);

Expr d_mul(const Expr& a, const Expr& b, VarRef var) {
  return Expr::binary(ExprKind::kAdd,
                      Expr::binary(ExprKind::kMul, diff(a, var), b),
                      Expr::binary(ExprKind::kMul, a, diff(b, var)));
}

Expr diff(const Expr& e, VarRef var) {
  using K = ExprKind;
  switch (e.kind()) {
    case K::kConstant:
      return Expr::constant(0.0);
    case K::kVarZ:
      return Expr::constant(!var.is_t() && e.var_index() == var.z_index ? 1.0 : 0.0);
    case K::kVarT:
      return Expr::constant(var.is_t() ? 1.0 : 0.0);
    case K::kNeg:
      return Expr::unary(K::kNeg, diff(e.operand(), var));
    case K::kSin:
      return Expr::binary(K::kMul, Expr::unary(K::kCos, e.operand()),
                          diff(e.operand(), var));
    case K::kCos:
      return Expr::unary(
          K::kNeg, Expr::binary(K::kMul, Expr::unary(K::kSin, e.operand()),
                                diff(e.operand(), var)));
    case K::kExp:
      return Expr::binary(K::kMul, Expr::unary(K::kExp, e.operand()),
                          diff(e.operand(), var));
    case K::kLog:
      return Expr::binary(K::kDiv, diff(e.operand(), var), e.operand());
    case K::kSqrt:
      return Expr::binary(
          K::kDiv, diff(e.operand(), var),
          Expr::binary(K::kMul, Expr::constant(2.0),
                       Expr::unary(K::kSqrt, e.operand())));
    case K::kAdd:
      return Expr::binary(K::kAdd, diff(e.lhs(), var), diff(e.rhs(), var));
    case K::kSub:
      return Expr::binary(K::kSub, diff(e.lhs(), var), diff(e.rhs(), var));
    case K::kMul:
      return d_mul(e.lhs(), e.rhs(), var);
    case K::kDiv:
      // (a/b)' = (a'b - ab') / b^2
      return Expr::binary(
          K::kDiv,
          Expr::binary(K::kSub,
                       Expr::binary(K::kMul, diff(e.lhs(), var), e.rhs()),
                       Expr::binary(K::kMul, e.lhs(), diff(e.rhs(), var))),
          Expr::binary(K::kMul, e.rhs(), e.rhs()));
    case K::kPow: {
      const Expr& base = e.lhs();
      const double c = e.rhs().constant_value();
      if (is_integer_value(c)) {
        // c * base^(c-1) * base'
        return Expr::binary(
            K::kMul,
            Expr::binary(K::kMul, Expr::constant(c),
                         Expr::binary(K::kPow, base, Expr::constant(c - 1.0))),
            diff(base, var));
      }
      // Non-integer exponent: differentiate the exp(c*log(base)) form,
      // which restricts the domain to base > 0.
      const Expr lowered = Expr::unary(
          K::kExp, Expr::binary(K::kMul, Expr::constant(c),
                                Expr::unary(K::kLog, base)));
      return diff(lowered, var);
    }
  }
  throw Error("unreachable expression kind");
}

}  // namespace

Expr differentiate(const Expr& e, VarRef var) {
  if (var.z_index < 0) throw Error("invalid differentiation variable");
  return diff(e, var);
}

std::vector<Expr> gradient(const Expr& e, int n) {
  std::vector<Expr> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 1; i <= n; ++i) out.push_back(differentiate(e, VarRef::z(i)));
  return out;
}

std::vector<std::vector<Expr>> hessian(const Expr& e, int n) {
  const std::vector<Expr> grad = gradient(e, n);
  std::vector<std::vector<Expr>> out(static_cast<size_t>(n),
                                     std::vector<Expr>(static_cast<size_t>(n)));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Expr d = differentiate(grad[static_cast<size_t>(i)], VarRef::z(j + 1));
      out[static_cast<size_t>(i)][static_cast<size_t>(j)] = d;
      out[static_cast<size_t>(j)][static_cast<size_t>(i)] = d;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Precedence levels used by the printer: additive 1, multiplicative 2,
// unary minus 3, power 4, atoms 6. Negative constants print like a
// negation so they re-parse with the right binding.
int print_precedence(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::kAdd:
    case ExprKind::kSub:
      return 1;
    case ExprKind::kMul:
    case ExprKind::kDiv:
      return 2;
    case ExprKind::kNeg:
      return 3;
    case ExprKind::kPow:
      return 4;
    case ExprKind::kConstant:
      return e.constant_value() < 0.0 ? 3 : 6;
    default:
      return 6;
  }
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void print_rec(const Expr& e, int min_prec, std::string& out) {
  const int prec = print_precedence(e);
  const bool parens = prec < min_prec;
  if (parens) out.push_back('(');
  switch (e.kind()) {
    case ExprKind::kConstant:
      out += format_number(e.constant_value());
      break;
    case ExprKind::kVarZ:
      out += "z" + std::to_string(e.var_index());
      break;
    case ExprKind::kVarT:
      out.push_back('t');
      break;
    case ExprKind::kNeg:
      out.push_back('-');
      print_rec(e.operand(), 3, out);
      break;
    case ExprKind::kSin:
    case ExprKind::kCos:
    case ExprKind::kExp:
    case ExprKind::kLog:
    case ExprKind::kSqrt: {
      const char* name = e.kind() == ExprKind::kSin   ? "sin"
                         : e.kind() == ExprKind::kCos ? "cos"
                         : e.kind() == ExprKind::kExp ? "exp"
                         : e.kind() == ExprKind::kLog ? "log"
                                                      : "sqrt";
      out += name;
      out.push_back('(');
      print_rec(e.operand(), 0, out);
      out.push_back(')');
      break;
    }
    case ExprKind::kAdd:
    case ExprKind::kSub:
      print_rec(e.lhs(), 1, out);
      out += e.kind() == ExprKind::kAdd ? " + " : " - ";
      print_rec(e.rhs(), 2, out);
      break;
    case ExprKind::kMul:
    case ExprKind::kDiv:
      print_rec(e.lhs(), 2, out);
      out += e.kind() == ExprKind::kMul ? "*" : "/";
      print_rec(e.rhs(), 3, out);
      break;
    case ExprKind::kPow:
      print_rec(e.lhs(), 5, out);
      out.push_back('^');
      print_rec(e.rhs(), 4, out);
      break;
  }
  if (parens) out.push_back(')');
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print_rec(e, 0, out);
  return out;
}

bool identical(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return false;
  switch (arity(a.kind())) {
    case 0:
      if (a.kind() == ExprKind::kConstant)
        return a.constant_value() == b.constant_value();
      if (a.kind() == ExprKind::kVarZ) return a.var_index() == b.var_index();
      return true;
    case 1:
      return identical(a.operand(), b.operand());
    default:
      return identical(a.lhs(), b.lhs()) && identical(a.rhs(), b.rhs());
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view src, int n) : src_(src), n_(n) {}

  Expr parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("empty expression", 0);
    Expr e = parse_sum();
    skip_ws();
    if (pos_ < src_.size()) {
      throw ParseError("unexpected trailing input", static_cast<int>(pos_));
    }
    return e;
  }

 private:
  static constexpr int kMaxDepth = 200;

  void skip_ws() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r' ||
            src_[pos_] == '\n')) {
      ++pos_;
    }
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) {
      throw ParseError(std::string("expected ") + what, static_cast<int>(pos_));
    }
  }

  Expr parse_sum() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+')) {
        const int pos = static_cast<int>(pos_) - 1;
        e = Expr::binary(ExprKind::kAdd, std::move(e), parse_term(), pos);
      } else if (accept('-')) {
        const int pos = static_cast<int>(pos_) - 1;
        e = Expr::binary(ExprKind::kSub, std::move(e), parse_term(), pos);
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) {
        const int pos = static_cast<int>(pos_) - 1;
        e = Expr::binary(ExprKind::kMul, std::move(e), parse_unary(), pos);
      } else if (accept('/')) {
        const int pos = static_cast<int>(pos_) - 1;
        e = Expr::binary(ExprKind::kDiv, std::move(e), parse_unary(), pos);
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (++depth_ > kMaxDepth) {
      throw ParseError("expression nested too deeply", static_cast<int>(pos_));
    }
    Expr result = [&] {
      if (accept('-')) {
        const int pos = static_cast<int>(pos_) - 1;
        return Expr::unary(ExprKind::kNeg, parse_unary(), pos);
      }
      return parse_power();
    }();
    --depth_;
    return result;
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) {
      const int pos = static_cast<int>(pos_) - 1;
      Expr exponent = parse_unary();
      if (!exponent.is_constant()) {
        throw ParseError("pow exponent must be a constant expression", pos);
      }
      return Expr::binary(ExprKind::kPow, std::move(base), std::move(exponent), pos);
    }
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) {
      throw ParseError("unexpected end of expression", static_cast<int>(pos_));
    }
    const char c = src_[pos_];
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
      return parse_identifier();
    }
    if (accept('(')) {
      Expr e = parse_sum();
      expect(')', "')'");
      return e;
    }
    throw ParseError(std::string("unexpected character '") + c + "'",
                     static_cast<int>(pos_));
  }

  Expr parse_number() {
    const size_t start = pos_;
    while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t mark = pos_ + 1;
      if (mark < src_.size() && (src_[mark] == '+' || src_[mark] == '-')) ++mark;
      if (mark < src_.size() && src_[mark] >= '0' && src_[mark] <= '9') {
        pos_ = mark;
        while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
      }
    }
    const std::string_view token = src_.substr(start, pos_ - start);
    if (token == ".") {
      throw ParseError("malformed number literal", static_cast<int>(start));
    }
    double value = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
      throw ParseError("malformed number literal", static_cast<int>(start));
    }
    return Expr::constant(value);
  }

  Expr parse_identifier() {
    const size_t start = pos_;
    while (pos_ < src_.size() &&
           ((src_[pos_] >= 'a' && src_[pos_] <= 'z') ||
            (src_[pos_] >= 'A' && src_[pos_] <= 'Z') ||
            (src_[pos_] >= '0' && src_[pos_] <= '9') || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    const int pos = static_cast<int>(start);

    if (name == "t") return Expr::variable_t(pos);
    if (name.size() >= 2 && name[0] == 'z') {
      int index = 0;
      const auto res =
          std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size()) {
        if (index < 1 || index > n_) {
          throw ParseError("variable index out of range (z" +
                               std::to_string(index) + " when n=" +
                               std::to_string(n_) + ")",
                           pos);
        }
        return Expr::variable_z(index, pos);
      }
    }

    ExprKind fn;
    if (name == "sin") fn = ExprKind::kSin;
    else if (name == "cos") fn = ExprKind::kCos;
    else if (name == "exp") fn = ExprKind::kExp;
    else if (name == "log") fn = ExprKind::kLog;
    else if (name == "sqrt") fn = ExprKind::kSqrt;
    else throw ParseError("unknown identifier '" + std::string(name) + "'", pos);

    expect('(', "'(' after function name");
    Expr argument = parse_sum();
    expect(')', "')'");
    return Expr::unary(fn, std::move(argument), pos);
  }

  std::string_view src_;
  int n_;
  size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, int n) {
  if (n < 0) throw Error("dimension must be non-negative");
  return Parser(text, n).parse();
}

}  // namespace ctkkt
