#include <ltk/expr.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

namespace ltk::expr {

namespace {

using NodePtr = std::shared_ptr<const Node>;

struct FuncInfo {
  std::string_view name;
  Func func;
  std::size_t arity;
};

constexpr FuncInfo kFuncs[] = {
    {"exp", Func::exp, 1}, {"ln", Func::ln, 1},   {"sqrt", Func::sqrt, 1}, {"pow", Func::pow, 2},
    {"sin", Func::sin, 1}, {"cos", Func::cos, 1}, {"abs", Func::abs, 1},
};

std::string_view func_name(Func f) {
  for (const auto& fi : kFuncs)
    if (fi.func == f) return fi.name;
  return "?";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr run() {
    skip_ws();
    NodePtr root = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) fail_here("expected operator or end of input");
    return Expr(root);
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail_at(std::size_t pos, const std::string& msg) const {
    throw ParseError(pos + 1, msg);
  }

  [[noreturn]] void fail_here(const std::string& expected) const {
    if (pos_ >= src_.size()) {
      const std::size_t off = src_.empty() ? 0 : src_.size() - 1;
      fail_at(off, expected + ", found end of input");
    }
    fail_at(pos_, expected + ", found '" + std::string(1, src_[pos_]) + "'");
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make_binary(char op, NodePtr a, NodePtr b, std::size_t offset) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::binary;
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    n->offset = offset;
    return n;
  }

  NodePtr parse_expr() {
    skip_ws();
    const std::size_t start = pos_ + 1;
    NodePtr lhs = parse_term();
    while (true) {
      if (accept('+'))
        lhs = make_binary('+', lhs, parse_term(), start);
      else if (accept('-'))
        lhs = make_binary('-', lhs, parse_term(), start);
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    skip_ws();
    const std::size_t start = pos_ + 1;
    NodePtr lhs = parse_unary();
    while (true) {
      if (accept('*'))
        lhs = make_binary('*', lhs, parse_unary(), start);
      else if (accept('/'))
        lhs = make_binary('/', lhs, parse_unary(), start);
      else
        return lhs;
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    const std::size_t start = pos_ + 1;
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::negate;
      n->args = {parse_unary()};
      n->offset = start;
      return n;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    skip_ws();
    const std::size_t start = pos_ + 1;
    NodePtr base = parse_primary();
    if (accept('^')) return make_binary('^', base, parse_unary(), start);
    return base;
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t b = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return pos_ - b;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) fail_at(start, "expected digits in numeric literal");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail_here("expected exponent digits");
    }
    double v = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail_at(start, "malformed numeric literal");
    auto node = std::make_shared<Node>();
    node->kind = Node::Kind::number;
    node->number = v;
    node->offset = start + 1;
    return node;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail_here("expected operand");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      std::string name(src_.substr(start, pos_ - start));
      if (peek('(')) {
        const FuncInfo* info = nullptr;
        for (const auto& fi : kFuncs)
          if (fi.name == name) info = &fi;
        if (!info) fail_at(start, "unknown function '" + name + "'");
        accept('(');
        auto node = std::make_shared<Node>();
        node->kind = Node::Kind::call;
        node->func = info->func;
        node->offset = start + 1;
        node->args.push_back(parse_expr());
        while (accept(',')) node->args.push_back(parse_expr());
        if (!accept(')')) fail_here("expected ',' or ')'");
        if (node->args.size() != info->arity)
          fail_at(start, "function '" + name + "' takes " + std::to_string(info->arity) +
                             " argument(s), got " + std::to_string(node->args.size()));
        return node;
      }
      auto node = std::make_shared<Node>();
      node->kind = Node::Kind::variable;
      node->name = std::move(name);
      node->offset = start + 1;
      return node;
    }
    if (accept('(')) {
      NodePtr inner = parse_expr();
      if (!accept(')')) fail_here("expected ')'");
      return inner;
    }
    fail_here("expected operand");
  }
};

bool structurally_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case Node::Kind::number:
      if (a.number != b.number) return false;
      break;
    case Node::Kind::variable:
      if (a.name != b.name) return false;
      break;
    case Node::Kind::binary:
      if (a.op != b.op) return false;
      break;
    case Node::Kind::call:
      if (a.func != b.func) return false;
      break;
    case Node::Kind::negate:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

void collect_variables(const Node& n, std::set<std::string>& out) {
  if (n.kind == Node::Kind::variable) out.insert(n.name);
  for (const auto& a : n.args) collect_variables(*a, out);
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Value of a subtree free of slot variables (parameters are resolved).
bool constant_value(const Node& n, const Layout& layout, double& out) {
  switch (n.kind) {
    case Node::Kind::number:
      out = n.number;
      return true;
    case Node::Kind::variable: {
      if (layout.slots.count(n.name)) return false;
      auto it = layout.params.find(n.name);
      if (it == layout.params.end()) return false;
      out = it->second;
      return true;
    }
    case Node::Kind::negate: {
      double a;
      if (!constant_value(*n.args[0], layout, a)) return false;
      out = -a;
      return true;
    }
    case Node::Kind::binary: {
      double a, b;
      if (!constant_value(*n.args[0], layout, a) || !constant_value(*n.args[1], layout, b))
        return false;
      switch (n.op) {
        case '+': out = a + b; return true;
        case '-': out = a - b; return true;
        case '*': out = a * b; return true;
        case '/': out = a / b; return true;
        case '^': out = std::pow(a, b); return true;
      }
      return false;
    }
    case Node::Kind::call:
      return false;
  }
  return false;
}

bool is_integral(double v) { return std::isfinite(v) && v == std::round(v) && std::abs(v) < 1e9; }

}  // namespace

Expr parse(std::string_view source) { return Parser(source).run(); }

bool operator==(const Expr& a, const Expr& b) {
  if (a.empty() || b.empty()) return a.empty() == b.empty();
  return structurally_equal(*a.root_, *b.root_);
}

std::vector<std::string> Expr::variables() const {
  std::set<std::string> s;
  if (root_) collect_variables(*root_, s);
  return {s.begin(), s.end()};
}

std::string print(const Node& n) {
  switch (n.kind) {
    case Node::Kind::number:
      return format_number(n.number);
    case Node::Kind::variable:
      return n.name;
    case Node::Kind::negate:
      return "(-" + print(*n.args[0]) + ")";
    case Node::Kind::binary:
      return "(" + print(*n.args[0]) + " " + n.op + " " + print(*n.args[1]) + ")";
    case Node::Kind::call: {
      std::string s(func_name(n.func));
      s += "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) s += ", ";
        s += print(*n.args[i]);
      }
      return s + ")";
    }
  }
  return {};
}

std::string print(const Expr& e) { return e.empty() ? std::string() : print(e.root()); }

BoundExpr bind(const Expr& e, const Layout& layout) {
  if (e.empty()) throw BindError("cannot bind an empty expression");
  BoundExpr b;
  b.expr_ = e;
  b.dim_ = layout.dim();
  using Op = BoundExpr::Op;
  std::size_t depth = 0;

  auto emit = [&](auto&& self, const Node& n) -> void {
    auto push = [&](BoundExpr::Instr ins, int stack_delta) {
      b.code_.push_back(ins);
      depth = static_cast<std::size_t>(static_cast<long>(depth) + stack_delta);
      b.max_stack_ = std::max(b.max_stack_, depth);
    };
    switch (n.kind) {
      case Node::Kind::number:
        push({Op::constant, n.number, 0, &n}, +1);
        return;
      case Node::Kind::variable: {
        if (auto it = layout.slots.find(n.name); it != layout.slots.end()) {
          push({Op::slot, 0.0, it->second, &n}, +1);
          return;
        }
        if (auto it = layout.params.find(n.name); it != layout.params.end()) {
          push({Op::constant, it->second, 0, &n}, +1);
          return;
        }
        std::string known;
        for (const auto& [k, v] : layout.slots) known += (known.empty() ? "" : ", ") + k;
        for (const auto& [k, v] : layout.params) known += (known.empty() ? "" : ", ") + k;
        throw BindError("unresolved name '" + n.name + "' at offset " + std::to_string(n.offset) +
                        " (known: " + known + ")");
      }
      case Node::Kind::negate:
        self(self, *n.args[0]);
        push({Op::neg, 0.0, 0, &n}, 0);
        return;
      case Node::Kind::binary: {
        const bool is_pow = n.op == '^';
        double c = 0.0;
        if (is_pow && constant_value(*n.args[1], layout, c) && is_integral(c)) {
          self(self, *n.args[0]);
          push({Op::ipow, c, 0, &n}, 0);
          return;
        }
        self(self, *n.args[0]);
        self(self, *n.args[1]);
        Op op = Op::add;
        switch (n.op) {
          case '+': op = Op::add; break;
          case '-': op = Op::sub; break;
          case '*': op = Op::mul; break;
          case '/': op = Op::div; break;
          case '^': op = Op::rpow; break;
        }
        push({op, 0.0, 0, &n}, -1);
        return;
      }
      case Node::Kind::call: {
        if (n.func == Func::pow) {
          double c = 0.0;
          self(self, *n.args[0]);
          if (constant_value(*n.args[1], layout, c) && is_integral(c)) {
            push({Op::ipow, c, 0, &n}, 0);
            return;
          }
          self(self, *n.args[1]);
          push({Op::rpow, 0.0, 0, &n}, -1);
          return;
        }
        self(self, *n.args[0]);
        Op op = Op::exp;
        switch (n.func) {
          case Func::exp: op = Op::exp; break;
          case Func::ln: op = Op::ln; break;
          case Func::sqrt: op = Op::sqrt; break;
          case Func::sin: op = Op::sin; break;
          case Func::cos: op = Op::cos; break;
          case Func::abs: op = Op::abs; break;
          case Func::pow: break;
        }
        push({op, 0.0, 0, &n}, 0);
        return;
      }
    }
  };
  emit(emit, e.root());
  return b;
}

template <FieldScalar T>
T BoundExpr::eval(const Vec<T>& slots) const {
  using std::abs;
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  if (slots.size() != dim_)
    throw DimensionError("expression expects " + std::to_string(dim_) + " slots, got " +
                         std::to_string(slots.size()));
  auto domain = [](const Node* n, const char* what) -> DomainError {
    return DomainError(std::string(what) + " in '" + print(*n) + "'");
  };
  std::vector<T> st;
  st.reserve(max_stack_);
  for (const Instr& ins : code_) {
    switch (ins.op) {
      case Op::constant:
        st.emplace_back(ins.value);
        break;
      case Op::slot:
        st.push_back(slots[ins.slot]);
        break;
      case Op::neg:
        st.back() = -st.back();
        break;
      case Op::ipow: {
        const long n = static_cast<long>(ins.value);
        if (n < 0 && value_of(st.back()) == 0.0) throw domain(ins.node, "division by zero");
        st.back() = ipow(st.back(), n);
        break;
      }
      case Op::exp:
        st.back() = exp(st.back());
        break;
      case Op::ln:
        if (!(value_of(st.back()) > 0.0)) throw domain(ins.node, "ln of non-positive value");
        st.back() = log(st.back());
        break;
      case Op::sqrt:
        if (!(value_of(st.back()) >= 0.0)) throw domain(ins.node, "sqrt of negative value");
        st.back() = sqrt(st.back());
        break;
      case Op::sin:
        st.back() = sin(st.back());
        break;
      case Op::cos:
        st.back() = cos(st.back());
        break;
      case Op::abs:
        st.back() = abs(st.back());
        break;
      default: {
        T rhs = std::move(st.back());
        st.pop_back();
        T& lhs = st.back();
        switch (ins.op) {
          case Op::add: lhs = lhs + rhs; break;
          case Op::sub: lhs = lhs - rhs; break;
          case Op::mul: lhs = lhs * rhs; break;
          case Op::div:
            if (value_of(rhs) == 0.0) throw domain(ins.node, "division by zero");
            lhs = lhs / rhs;
            break;
          case Op::rpow:
            if (!(value_of(lhs) > 0.0))
              throw domain(ins.node, "non-integer power of non-positive base");
            if constexpr (std::is_same_v<T, double>)
              lhs = std::pow(lhs, rhs);
            else
              lhs = exp(rhs * log(lhs));
            break;
          default: break;
        }
      }
    }
  }
  return st.back();
}

template double BoundExpr::eval<double>(const Vec<double>&) const;
template D1 BoundExpr::eval<D1>(const Vec<D1>&) const;
template D2 BoundExpr::eval<D2>(const Vec<D2>&) const;
template D3 BoundExpr::eval<D3>(const Vec<D3>&) const;

ScalarFn to_scalar_fn(const BoundExpr& b, std::string name) {
  if (name.empty()) name = print(b.source());
  return ScalarFn(
      b.dim(), [b](const auto& x) { return b.eval(x); }, ScalarFn::Origin::expression,
      std::move(name));
}

ScalarFn compile(std::string_view source, const Layout& layout, std::string name) {
  return to_scalar_fn(bind(parse(source), layout), name.empty() ? std::string(source) : name);
}

template <FieldScalar T>
T eval(const Expr& e, const std::map<std::string, T>& env) {
  Layout layout;
  Vec<T> slots(static_cast<Index>(env.size()));
  Index i = 0;
  for (const auto& [k, v] : env) {
    layout.slot(k, i);
    slots[i++] = v;
  }
  try {
    return bind(e, layout).eval(slots);
  } catch (const BindError& err) {
    throw BindError(std::string("unbound variable: ") + err.what());
  }
}

template double eval<double>(const Expr&, const std::map<std::string, double>&);
template D1 eval<D1>(const Expr&, const std::map<std::string, D1>&);

}  // namespace ltk::expr
