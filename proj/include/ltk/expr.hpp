#pragma once

// A small arithmetic expression language for Hamiltonians and generating
// functions supplied as text.
//
//   expr    := term  (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: exp ln sqrt pow sin cos abs.  Expressions are immutable once
// parsed; binding resolves every name against a slot layout and a parameter
// table, after which evaluation is a pure function of the slot vector.

#include <ltk/diff.hpp>

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace ltk::expr {

enum class Func { exp, ln, sqrt, pow, sin, cos, abs };

struct Node {
  enum class Kind { number, variable, negate, binary, call };

  Kind kind = Kind::number;
  double number = 0.0;
  std::string name;  // variable name
  char op = 0;       // '+', '-', '*', '/', '^' for binary
  Func func = Func::exp;
  std::vector<std::shared_ptr<const Node>> args;
  std::size_t offset = 0;  // 1-based source offset of the node's first byte
};

class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  const Node& root() const { return *root_; }
  bool empty() const { return !root_; }

  /// Names of all variables referenced, sorted and unique.
  std::vector<std::string> variables() const;

  /// Structural equality (source offsets are ignored).
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  std::shared_ptr<const Node> root_;
};

/// Parses UTF-8 text; throws ParseError carrying a 1-based byte offset.
Expr parse(std::string_view source);

/// Fully parenthesised rendering; parse(print(e)) == e.
std::string print(const Expr& e);
std::string print(const Node& n);

/// Resolution table for variable names: slot indices into the argument
/// vector plus named constant parameters.
struct Layout {
  std::map<std::string, Index> slots;
  std::map<std::string, double> params;

  Index dim() const { return static_cast<Index>(slots.size()); }
  Layout& slot(std::string name, Index index) {
    slots[std::move(name)] = index;
    return *this;
  }
  Layout& with_params(const std::map<std::string, double>& p) {
    for (const auto& [k, v] : p) params[k] = v;
    return *this;
  }
};

/// An expression compiled against a Layout.
class BoundExpr {
 public:
  template <FieldScalar T>
  T eval(const Vec<T>& slots) const;

  Index dim() const { return dim_; }
  const Expr& source() const { return expr_; }

 private:
  friend BoundExpr bind(const Expr& e, const Layout& layout);

  enum class Op { constant, slot, neg, add, sub, mul, div, ipow, rpow, exp, ln, sqrt, sin, cos, abs };
  struct Instr {
    Op op;
    double value = 0.0;  // constant, or integral exponent for ipow
    Index slot = 0;
    const Node* node = nullptr;
  };

  Expr expr_;
  std::vector<Instr> code_;
  Index dim_ = 0;
  std::size_t max_stack_ = 0;
};

/// Binds every variable; unresolved names raise BindError.
BoundExpr bind(const Expr& e, const Layout& layout);

/// Wraps a bound expression as a ScalarFn over its slot vector.
ScalarFn to_scalar_fn(const BoundExpr& b, std::string name = {});

/// Parse + bind + wrap.
ScalarFn compile(std::string_view source, const Layout& layout, std::string name = {});

/// Direct evaluation against a name -> value environment.
template <FieldScalar T>
T eval(const Expr& e, const std::map<std::string, T>& env);

extern template double BoundExpr::eval<double>(const Vec<double>&) const;
extern template D1 BoundExpr::eval<D1>(const Vec<D1>&) const;
extern template D2 BoundExpr::eval<D2>(const Vec<D2>&) const;
extern template D3 BoundExpr::eval<D3>(const Vec<D3>&) const;
extern template double eval<double>(const Expr&, const std::map<std::string, double>&);
extern template D1 eval<D1>(const Expr&, const std::map<std::string, D1>&);

}  // namespace ltk::expr
