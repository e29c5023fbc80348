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

// Symbolic expression trees over the state variables z1..zn and the time
// variable t, with exact differentiation. Expressions are immutable after
// construction; every operation here is pure and safe to call concurrently.
//
// Grammar accepted by parse_expr (see docs/expression_grammar.ebnf):
//
//   expr    = term    { ("+" | "-") term } ;
//   term    = unary   { ("*" | "/") unary } ;
//   unary   = "-" unary | power ;
//   power   = primary [ "^" unary ] ;          (right associative)
//   primary = number | "t" | "z" digits
//           | ("sin"|"cos"|"exp"|"log"|"sqrt") "(" expr ")"
//           | "(" expr ")" ;
//
// "^" binds tighter than unary minus, so -z1^2 is -(z1^2). Exponents must
// simplify to constants.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctkkt {

enum class ExprKind : std::uint8_t {
  kConstant,
  kVarZ,
  kVarT,
  kNeg,
  kSin,
  kCos,
  kExp,
  kLog,
  kSqrt,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
};

/// Number of children a node of the given kind carries (0, 1 or 2).
int arity(ExprKind kind) noexcept;

/// A differentiation variable: t, or one of z1..zn.
struct VarRef {
  int z_index = 0;  // 0 means t, k >= 1 means z_k

  static constexpr VarRef t() { return VarRef{0}; }
  static constexpr VarRef z(int index) { return VarRef{index}; }
  constexpr bool is_t() const { return z_index == 0; }
};

/// Immutable expression handle. Copies are cheap (shared subtrees).
///
/// The factory functions fold constants and apply 0/1 identities, so the
/// returned tree may be smaller than the requested one. Powers with a
/// non-constant exponent are rejected.
class Expr {
 public:
  /// Constant zero.
  Expr();

  static Expr constant(double value);
  static Expr variable_z(int index, int source_pos = -1);  // index >= 1
  static Expr variable_t(int source_pos = -1);
  static Expr unary(ExprKind kind, Expr operand, int source_pos = -1);
  static Expr binary(ExprKind kind, Expr lhs, Expr rhs, int source_pos = -1);

  ExprKind kind() const noexcept;
  double constant_value() const;  // kind() == kConstant
  int var_index() const;          // kind() == kVarZ
  Expr operand() const;           // unary nodes
  Expr lhs() const;               // binary nodes
  Expr rhs() const;               // binary nodes
  /// Byte offset in the source text this node was parsed from, or -1.
  int source_pos() const noexcept;

  bool is_constant() const noexcept;
  bool is_constant(double value) const noexcept;

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  ExprKind kind = ExprKind::kConstant;
  double value = 0.0;  // kConstant payload
  int var_index = 0;   // kVarZ payload, 1-based
  int source_pos = -1;
  std::shared_ptr<const Node> a;  // first child (unary operand / binary lhs)
  std::shared_ptr<const Node> b;  // second child (binary rhs)
};

/// Parses `text` into an expression over z1..zn and t. `n` is the declared
/// state dimension; z-indices outside 1..n are rejected. Throws ParseError
/// with the byte offset of the problem.
Expr parse_expr(std::string_view text, int n);

/// Evaluates at state z (length n) and time t. Throws EvalError on domain
/// violations, with the offending node's source offset when known.
double eval_expr(const Expr& e, std::span<const double> z, double t);

/// Exact symbolic derivative with respect to `var`, simplified by constant
/// folding and 0/1 identities.
Expr differentiate(const Expr& e, VarRef var);

/// (d/dz1 .. d/dzn) as expressions.
std::vector<Expr> gradient(const Expr& e, int n);

/// Symmetric n-by-n matrix of second derivatives. Entries (i,j) and (j,i)
/// share the same node.
std::vector<std::vector<Expr>> hessian(const Expr& e, int n);

/// Renders with minimal parentheses; parse_expr(to_string(e), n) evaluates
/// identically to e.
std::string to_string(const Expr& e);

/// Structural equality (same kinds, constants, indices and children).
bool identical(const Expr& a, const Expr& b);

}  // namespace ctkkt
