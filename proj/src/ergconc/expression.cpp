#include "ergconc/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <algorithm>
#include <sstream>
#include <tuple>

#include "ergconc/errors.hpp"

namespace ergconc {

namespace detail {

enum class Op { kConst, kVar, kAdd, kSub, kMul, kDiv, kNeg, kPow, kCos, kSin, kExp, kTanh, kLog };

struct Node {
  Op op;
  double value = 0.0;
  std::size_t index = 0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

}  // namespace detail

namespace {

using detail::Node;
using detail::Op;
using NodePtr = std::shared_ptr<const Node>;

NodePtr constant(double v) { return std::make_shared<Node>(Node{Op::kConst, v, 0, nullptr, nullptr}); }
NodePtr variable(std::size_t i) { return std::make_shared<Node>(Node{Op::kVar, 0.0, i, nullptr, nullptr}); }
bool is_const(const NodePtr& n, double v) { return n->op == Op::kConst && n->value == v; }

double apply(Op op, double a, double b) {
  switch (op) {
    case Op::kAdd: return a + b;
    case Op::kSub: return a - b;
    case Op::kMul: return a * b;
    case Op::kDiv: return a / b;
    case Op::kNeg: return -a;
    case Op::kPow: return std::pow(a, b);
    case Op::kCos: return std::cos(a);
    case Op::kSin: return std::sin(a);
    case Op::kExp: return std::exp(a);
    case Op::kTanh: return std::tanh(a);
    case Op::kLog: return std::log(a);
    default: return 0.0;
  }
}

// Builders with light algebraic simplification.
NodePtr make(Op op, NodePtr a, NodePtr b = nullptr) {
  const bool unary = b == nullptr;
  if (a->op == Op::kConst && (unary || b->op == Op::kConst)) {
    return constant(apply(op, a->value, unary ? 0.0 : b->value));
  }
  switch (op) {
    case Op::kAdd:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case Op::kSub:
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return make(Op::kNeg, b);
      break;
    case Op::kMul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      break;
    case Op::kDiv:
      if (is_const(a, 0.0)) return constant(0.0);
      if (is_const(b, 1.0)) return a;
      break;
    case Op::kNeg:
      if (a->op == Op::kNeg) return a->lhs;
      break;
    case Op::kPow:
      if (is_const(b, 1.0)) return a;
      if (is_const(b, 0.0)) return constant(1.0);
      break;
    default:
      break;
  }
  return std::make_shared<Node>(Node{op, 0.0, 0, std::move(a), std::move(b)});
}

NodePtr differentiate(const NodePtr& n, std::size_t var) {
  switch (n->op) {
    case Op::kConst: return constant(0.0);
    case Op::kVar: return constant(n->index == var ? 1.0 : 0.0);
    case Op::kAdd: return make(Op::kAdd, differentiate(n->lhs, var), differentiate(n->rhs, var));
    case Op::kSub: return make(Op::kSub, differentiate(n->lhs, var), differentiate(n->rhs, var));
    case Op::kNeg: return make(Op::kNeg, differentiate(n->lhs, var));
    case Op::kMul:
      return make(Op::kAdd, make(Op::kMul, differentiate(n->lhs, var), n->rhs),
                  make(Op::kMul, n->lhs, differentiate(n->rhs, var)));
    case Op::kDiv: {
      // (u'v - uv') / v^2
      auto num = make(Op::kSub, make(Op::kMul, differentiate(n->lhs, var), n->rhs),
                      make(Op::kMul, n->lhs, differentiate(n->rhs, var)));
      return make(Op::kDiv, num, make(Op::kMul, n->rhs, n->rhs));
    }
    case Op::kPow: {
      const auto& u = n->lhs;
      const auto& v = n->rhs;
      auto du = differentiate(u, var);
      auto dv = differentiate(v, var);
      if (dv->op == Op::kConst && dv->value == 0.0) {
        // v u^(v-1) u'
        return make(Op::kMul, make(Op::kMul, v, make(Op::kPow, u, make(Op::kSub, v, constant(1.0)))), du);
      }
      // u^v (v' log u + v u' / u)
      auto inner = make(Op::kAdd, make(Op::kMul, dv, make(Op::kLog, u)), make(Op::kDiv, make(Op::kMul, v, du), u));
      return make(Op::kMul, n, inner);
    }
    case Op::kCos: return make(Op::kMul, make(Op::kNeg, make(Op::kSin, n->lhs)), differentiate(n->lhs, var));
    case Op::kSin: return make(Op::kMul, make(Op::kCos, n->lhs), differentiate(n->lhs, var));
    case Op::kExp: return make(Op::kMul, n, differentiate(n->lhs, var));
    case Op::kTanh: {
      // (1 - tanh^2) u'
      auto sech2 = make(Op::kSub, constant(1.0), make(Op::kMul, n, n));
      return make(Op::kMul, sech2, differentiate(n->lhs, var));
    }
    case Op::kLog: return make(Op::kDiv, differentiate(n->lhs, var), n->lhs);
  }
  return constant(0.0);
}

void print(const NodePtr& n, std::ostream& os) {
  switch (n->op) {
    case Op::kConst: os << n->value; return;
    case Op::kVar: os << 'x' << (n->index + 1); return;
    case Op::kNeg: os << "(-"; print(n->lhs, os); os << ')'; return;
    case Op::kCos: os << "cos("; print(n->lhs, os); os << ')'; return;
    case Op::kSin: os << "sin("; print(n->lhs, os); os << ')'; return;
    case Op::kExp: os << "exp("; print(n->lhs, os); os << ')'; return;
    case Op::kTanh: os << "tanh("; print(n->lhs, os); os << ')'; return;
    case Op::kLog: os << "log("; print(n->lhs, os); os << ')'; return;
    case Op::kPow: os << "pow("; print(n->lhs, os); os << ", "; print(n->rhs, os); os << ')'; return;
    default: break;
  }
  const char sym = n->op == Op::kAdd ? '+' : n->op == Op::kSub ? '-' : n->op == Op::kMul ? '*' : '/';
  os << '(';
  print(n->lhs, os);
  os << ' ' << sym << ' ';
  print(n->rhs, os);
  os << ')';
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t dim) : text_(text), dim_(dim) {}

  NodePtr parse() {
    auto e = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("", "cannot parse expression '" + std::string(text_) + "' at offset " +
                              std::to_string(pos_) + ": " + what);
  }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    auto lhs = term();
    while (true) {
      if (accept('+')) lhs = make(Op::kAdd, lhs, term());
      else if (accept('-')) lhs = make(Op::kSub, lhs, term());
      else return lhs;
    }
  }
  NodePtr term() {
    auto lhs = unary();
    while (true) {
      if (accept('*')) lhs = make(Op::kMul, lhs, unary());
      else if (accept('/')) lhs = make(Op::kDiv, lhs, unary());
      else return lhs;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Op::kNeg, unary());
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Op::kPow, base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }
  NodePtr number() {
    const std::string rest(text_.substr(pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("bad number");
    }
    pos_ += used;
    return constant(v);
  }
  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name == "pi") return constant(std::numbers::pi);
    if (name == "e") return constant(std::numbers::e);
    if (name == "pow") {
      expect('(');
      auto a = expr();
      expect(',');
      auto b = expr();
      expect(')');
      return make(Op::kPow, a, b);
    }
    const std::pair<const char*, Op> funcs[] = {
        {"cos", Op::kCos}, {"sin", Op::kSin}, {"exp", Op::kExp}, {"tanh", Op::kTanh}};
    for (const auto& [fname, op] : funcs) {
      if (name == fname) {
        expect('(');
        auto a = expr();
        expect(')');
        return make(op, a);
      }
    }
    if (name == "x" && dim_ == 1) return variable(0);
    if (name.size() > 1 && name[0] == 'x') {
      std::string digits = name.substr(name[1] == '_' ? 2 : 1);
      if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos) {
        const std::size_t i = std::stoul(digits);
        if (i >= 1 && i <= dim_) return variable(i - 1);
        pos_ = start;
        fail("variable " + name + " outside x1..x" + std::to_string(dim_));
      }
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  std::string_view text_;
  std::size_t dim_;
  std::size_t pos_ = 0;
};

void emit(const NodePtr& n, std::vector<std::tuple<int, double, std::size_t>>& out, std::size_t depth,
          std::size_t& max_depth) {
  max_depth = std::max(max_depth, depth + 1);
  if (n->lhs) emit(n->lhs, out, depth, max_depth);
  if (n->rhs) emit(n->rhs, out, depth + 1, max_depth);
  out.emplace_back(static_cast<int>(n->op), n->value, n->index);
}

}  // namespace

Expression::Expression(std::shared_ptr<const detail::Node> root, std::size_t dim)
    : root_(std::move(root)), dim_(dim) {
  compile();
}

Expression Expression::parse(std::string_view text, std::size_t dim) {
  if (dim == 0) throw ConfigError("", "expression dimension must be positive");
  return Expression(Parser(text, dim).parse(), dim);
}

void Expression::compile() {
  std::vector<std::tuple<int, double, std::size_t>> code;
  max_stack_ = 0;
  emit(root_, code, 0, max_stack_);
  tape_.clear();
  for (const auto& [op, value, index] : code) tape_.push_back(Instr{op, value, index});
}

double Expression::evaluate(std::span<const double> x) const {
  constexpr std::size_t kInline = 64;
  double inline_stack[kInline] = {};
  std::vector<double> heap;
  double* stack = inline_stack;
  if (max_stack_ > kInline) {
    heap.resize(max_stack_);
    stack = heap.data();
  }
  std::size_t top = 0;
  for (const Instr& in : tape_) {
    const auto op = static_cast<Op>(in.op);
    switch (op) {
      case Op::kConst: stack[top++] = in.value; break;
      case Op::kVar: stack[top++] = x[in.index]; break;
      case Op::kNeg: case Op::kCos: case Op::kSin: case Op::kExp: case Op::kTanh: case Op::kLog:
        stack[top - 1] = apply(op, stack[top - 1], 0.0);
        break;
      default:
        stack[top - 2] = apply(op, stack[top - 2], stack[top - 1]);
        --top;
        break;
    }
  }
  return stack[0];
}

Expression Expression::derivative(std::size_t variable) const {
  if (variable >= dim_) throw DomainError("derivative variable out of range");
  return Expression(differentiate(root_, variable), dim_);
}

std::string Expression::to_string() const {
  std::ostringstream os;
  os.precision(17);
  print(root_, os);
  return os.str();
}

namespace {

class ExpressionModel final : public DiffusionModel {
 public:
  ExpressionModel(std::size_t d, std::size_t r, std::vector<Expression> drift, std::vector<Expression> sigma)
      : d_(d), r_(r), drift_(std::move(drift)), sigma_(std::move(sigma)) {
    for (const auto& b : drift_) {
      for (std::size_t k = 0; k < d_; ++k) drift_jac_.push_back(b.derivative(k));
    }
    // sigma_jac_[j][i*d + k] = d sigma_ij / d x_k
    sigma_jac_.resize(r_);
    for (std::size_t j = 0; j < r_; ++j) {
      for (std::size_t i = 0; i < d_; ++i) {
        for (std::size_t k = 0; k < d_; ++k) sigma_jac_[j].push_back(sigma_[i * r_ + j].derivative(k));
      }
    }
  }
  std::size_t state_dim() const override { return d_; }
  std::size_t noise_dim() const override { return r_; }
  void drift(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t i = 0; i < d_; ++i) out[i] = drift_[i].evaluate(x);
  }
  void diffusion(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t i = 0; i < sigma_.size(); ++i) out[i] = sigma_[i].evaluate(x);
  }
  bool has_jacobians() const override { return true; }
  void drift_jacobian(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t i = 0; i < drift_jac_.size(); ++i) out[i] = drift_jac_[i].evaluate(x);
  }
  void diffusion_column_jacobian(std::span<const double> x, std::size_t j, std::span<double> out) const override {
    const auto& jac = sigma_jac_.at(j);
    for (std::size_t i = 0; i < jac.size(); ++i) out[i] = jac[i].evaluate(x);
  }

 private:
  std::size_t d_;
  std::size_t r_;
  std::vector<Expression> drift_;
  std::vector<Expression> sigma_;
  std::vector<Expression> drift_jac_;
  std::vector<std::vector<Expression>> sigma_jac_;
};

class ExpressionTest final : public TestFunction {
 public:
  ExpressionTest(std::size_t d, Expression phi) : d_(d), phi_(std::move(phi)) {
    for (std::size_t i = 0; i < d_; ++i) grad_.push_back(phi_.derivative(i));
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t k = 0; k < d_; ++k) hess_.push_back(grad_[i].derivative(k));
    }
  }
  std::size_t dim() const override { return d_; }
  double value(std::span<const double> x) const override { return phi_.evaluate(x); }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t i = 0; i < d_; ++i) out[i] = grad_[i].evaluate(x);
  }
  void hessian(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t i = 0; i < hess_.size(); ++i) out[i] = hess_[i].evaluate(x);
  }

 private:
  std::size_t d_;
  Expression phi_;
  std::vector<Expression> grad_;
  std::vector<Expression> hess_;
};

Expression parse_field(const std::string& field, const std::string& text, std::size_t dim) {
  try {
    return Expression::parse(text, dim);
  } catch (const ConfigError& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

ModelBundle make_expression_bundle(const ExpressionModelSpec& spec, SearchBox box) {
  const std::size_t d = spec.state_dim;
  const std::size_t r = spec.noise_dim;
  if (d == 0) throw ConfigError("model.dim", "must be >= 1");
  if (r == 0) throw ConfigError("model.noise_dim", "must be >= 1");
  if (spec.drift.size() != d) throw ConfigError("model.drift", "expected " + std::to_string(d) + " entries");
  if (spec.diffusion.size() != d) throw ConfigError("model.diffusion", "expected " + std::to_string(d) + " rows");
  std::vector<Expression> drift;
  for (std::size_t i = 0; i < d; ++i) {
    drift.push_back(parse_field("model.drift[" + std::to_string(i) + "]", spec.drift[i], d));
  }
  std::vector<Expression> sigma;
  for (std::size_t i = 0; i < d; ++i) {
    if (spec.diffusion[i].size() != r) {
      throw ConfigError("model.diffusion[" + std::to_string(i) + "]", "expected " + std::to_string(r) + " entries");
    }
    for (std::size_t j = 0; j < r; ++j) {
      sigma.push_back(parse_field("model.diffusion[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                                  spec.diffusion[i][j], d));
    }
  }
  if (box.bounds.size() != d) throw ConfigError("model.box", "expected " + std::to_string(d) + " intervals");
  ModelBundle bundle;
  bundle.name = "inline";
  bundle.model = std::make_shared<ExpressionModel>(d, r, std::move(drift), std::move(sigma));
  bundle.phi = std::make_shared<ExpressionTest>(d, parse_field("model.phi", spec.phi, d));
  bundle.box = std::move(box);
  return bundle;
}

}  // namespace ergconc
