#pragma once

// Tiny arithmetic expression language for user-supplied analytic functions.
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := ('+'|'-') unary | power
//   power := atom ('^' unary)?
//   atom  := number | x | y | z | pi | fname '(' expr ')' | '(' expr ')'
//   fname := exp | log | sin | cos | tan | atan | sqrt
// Expressions evaluate on jets, so derivatives of user functions are exact.

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"

namespace guichard {

class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A function of one variable acting on jets: f(u) for any jet u.
using Univariate = std::function<Jet(const Jet&)>;

class Expr {
 public:
  enum class Kind { num, var, neg, add, sub, mul, div, pow, call };
  struct Node {
    Kind kind;
    double value = 0.0;
    int var = -1;
    std::string fn;
    std::shared_ptr<const Node> a, b;
  };

  static Expr parse(const std::string& text) {
    Parser p{text, 0};
    Expr e;
    e.root_ = p.expr();
    p.skip();
    if (p.pos != text.size()) throw ExprError("unexpected '" + text.substr(p.pos) + "' in expression");
    e.text_ = text;
    return e;
  }

  const std::string& text() const { return text_; }

  std::set<int> variables() const {
    std::set<int> s;
    collect(root_.get(), s);
    return s;
  }

  // vars[k] is the jet substituted for x (k=0), y (k=1), z (k=2)
  Jet eval(std::span<const Jet> vars) const { return eval(root_.get(), vars); }

  double eval(double x, double y = 0.0, double z = 0.0) const {
    std::array<Jet, 3> v{Jet::constant(1, 0, x), Jet::constant(1, 0, y), Jet::constant(1, 0, z)};
    return eval(root_.get(), v).value();
  }

  // treat the expression as a function of the single variable `axis`
  Univariate univariate(int axis) const {
    for (int v : variables())
      if (v != axis) throw ExprError("expression '" + text_ + "' must depend on " + name(axis) + " only");
    auto root = root_;
    return [root, axis](const Jet& u) {
      std::array<Jet, 3> v{u, u, u};
      v[axis] = u;
      return eval(root.get(), v);
    };
  }

  ScalarField field(int arity) const {
    for (int v : variables())
      if (v >= arity) throw ExprError("expression '" + text_ + "' uses a variable beyond arity");
    auto root = root_;
    return ScalarField::closed_form(arity, [root](std::span<const Jet> v) { return eval(root.get(), v); });
  }

  static std::string name(int axis) { return axis == 0 ? "x" : axis == 1 ? "y" : "z"; }

 private:
  using NodeP = std::shared_ptr<const Node>;

  static void collect(const Node* n, std::set<int>& s) {
    if (!n) return;
    if (n->kind == Kind::var) s.insert(n->var);
    collect(n->a.get(), s);
    collect(n->b.get(), s);
  }

  static Jet eval(const Node* n, std::span<const Jet> v) {
    switch (n->kind) {
      case Kind::num: return Jet::constant(v[0].nvars(), v[0].degree(), n->value);
      case Kind::var:
        if (n->var >= static_cast<int>(v.size())) throw ExprError("variable not bound");
        return v[n->var];
      case Kind::neg: return -eval(n->a.get(), v);
      case Kind::add: return eval(n->a.get(), v) + eval(n->b.get(), v);
      case Kind::sub: return eval(n->a.get(), v) - eval(n->b.get(), v);
      case Kind::mul: return eval(n->a.get(), v) * eval(n->b.get(), v);
      case Kind::div: {
        Jet d = eval(n->b.get(), v);
        if (d.value() == 0.0) throw ExprError("division by zero");
        return eval(n->a.get(), v) / d;
      }
      case Kind::pow: {
        Jet base = eval(n->a.get(), v);
        if (n->b->kind == Kind::num) {
          const double r = n->b->value;
          if (r == std::round(r) && r < 0 && base.value() != 0.0) return 1.0 / pow(base, -r);
          if (r != std::round(r) && base.value() <= 0.0) throw ExprError("non-integer power of a nonpositive base");
          return pow(base, r);
        }
        if (base.value() <= 0.0) throw ExprError("variable power of a nonpositive base");
        return exp(eval(n->b.get(), v) * log(base));
      }
      case Kind::call: {
        Jet u = eval(n->a.get(), v);
        if (n->fn == "exp") return exp(u);
        if (n->fn == "log") {
          if (u.value() <= 0.0) throw ExprError("log of a nonpositive value");
          return log(u);
        }
        if (n->fn == "sqrt") {
          if (u.value() <= 0.0) throw ExprError("sqrt of a nonpositive value");
          return sqrt(u);
        }
        if (n->fn == "sin") return sin(u);
        if (n->fn == "cos") return cos(u);
        if (n->fn == "tan") return tan(u);
        if (n->fn == "atan") return atan(u);
        throw ExprError("unknown function " + n->fn);
      }
    }
    throw ExprError("bad expression node");
  }

  struct Parser {
    const std::string& s;
    std::size_t pos;

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    static NodeP make(Kind k, NodeP a = nullptr, NodeP b = nullptr) {
      auto n = std::make_shared<Node>();
      n->kind = k;
      n->a = std::move(a);
      n->b = std::move(b);
      return n;
    }
    NodeP expr() {
      NodeP l = term();
      for (;;) {
        if (eat('+')) l = make(Kind::add, l, term());
        else if (eat('-')) l = make(Kind::sub, l, term());
        else return l;
      }
    }
    NodeP term() {
      NodeP l = unary();
      for (;;) {
        if (eat('*')) l = make(Kind::mul, l, unary());
        else if (eat('/')) l = make(Kind::div, l, unary());
        else return l;
      }
    }
    NodeP unary() {
      if (eat('-')) return make(Kind::neg, unary());
      if (eat('+')) return unary();
      return power();
    }
    NodeP power() {
      NodeP base = atom();
      if (eat('^')) return make(Kind::pow, base, unary());
      return base;
    }
    NodeP atom() {
      skip();
      if (pos >= s.size()) throw ExprError("unexpected end of expression");
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        double v;
        try {
          v = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          throw ExprError("bad number in expression");
        }
        pos += used;
        auto n = std::make_shared<Node>();
        n->kind = Kind::num;
        n->value = v;
        return n;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        std::size_t start = pos;
        while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
        const std::string id = s.substr(start, pos - start);
        if (id == "x" || id == "y" || id == "z") {
          auto n = std::make_shared<Node>();
          n->kind = Kind::var;
          n->var = id[0] - 'x';
          return n;
        }
        if (id == "pi") {
          auto n = std::make_shared<Node>();
          n->kind = Kind::num;
          n->value = std::numbers::pi;
          return n;
        }
        static const std::set<std::string> fns{"exp", "log", "sin", "cos", "tan", "atan", "sqrt"};
        if (!fns.count(id)) throw ExprError("unknown identifier '" + id + "'");
        if (!eat('(')) throw ExprError("expected '(' after " + id);
        auto n = std::make_shared<Node>();
        n->kind = Kind::call;
        n->fn = id;
        n->a = expr();
        if (!eat(')')) throw ExprError("expected ')'");
        return n;
      }
      if (eat('(')) {
        NodeP e = expr();
        if (!eat(')')) throw ExprError("expected ')'");
        return e;
      }
      throw ExprError(std::string("unexpected character '") + c + "'");
    }
  };

  NodeP root_;
  std::string text_;
};

// f(u) for a univariate function applied to a field
inline ScalarField apply(const Univariate& f, const ScalarField& u) {
  if (!u.is_closed_form()) {
    // node-wise on jets/grids
    if (u.rep() == Rep::grid) {
      std::vector<double> v(u.data().begin(), u.data().end());
      for (auto& x : v) x = f(Jet::constant(1, 0, x)).value();
      return ScalarField::grid(u.lattice(), std::move(v), u.used_order());
    }
    const std::size_t s = u.node_stride();
    std::vector<double> c(u.data().size());
    for (std::size_t t = 0; t < u.lattice()->size(); ++t) {
      Jet r = f(u.node_jet(t, u.degree()));
      std::copy_n(r.coeffs().data(), s, c.data() + t * s);
    }
    return ScalarField::jets(u.lattice(), u.degree(), std::move(c));
  }
  auto e = u.evaluator();
  return ScalarField::from_eval(u.arity(), [e, f](const Point& p, int d) { return f((*e)(p, d)); });
}

}  // namespace guichard
