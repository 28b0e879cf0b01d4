#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergconc/model.hpp"

namespace ergconc {

namespace detail {
struct Node;
}

// Closed-form expression in the variables x1..xd.
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'pi' | 'e' | var | func '(' expr ')' | 'pow' '(' expr ',' expr ')' | '(' expr ')'
//   var     := 'x' digits | 'x_' digits | 'x' (only when d = 1)
//   func    := 'cos' | 'sin' | 'exp' | 'tanh'
class Expression {
 public:
  // Throws ConfigError on malformed input.
  static Expression parse(std::string_view text, std::size_t dim);

  double evaluate(std::span<const double> x) const;
  Expression derivative(std::size_t variable) const;
  std::string to_string() const;
  std::size_t dim() const noexcept { return dim_; }

 private:
  struct Instr {
    int op;
    double value;
    std::size_t index;
  };

  Expression(std::shared_ptr<const detail::Node> root, std::size_t dim);
  void compile();

  std::shared_ptr<const detail::Node> root_;
  std::size_t dim_ = 0;
  std::vector<Instr> tape_;
  std::size_t max_stack_ = 0;
};

struct ExpressionModelSpec {
  std::size_t state_dim = 1;
  std::size_t noise_dim = 1;
  std::vector<std::string> drift;                   // d entries
  std::vector<std::vector<std::string>> diffusion;  // d rows of r entries
  std::string phi;
};

// Builds a model bundle whose jacobians, gradient and Hessian come from
// symbolic differentiation. Throws ConfigError naming the offending field.
ModelBundle make_expression_bundle(const ExpressionModelSpec& spec, SearchBox box);

}  // namespace ergconc
