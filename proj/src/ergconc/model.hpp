#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ergconc {

// Coefficients of dY = b(Y) dt + sigma(Y) dW on R^d with an r-dimensional
// Brownian motion. Matrices are row-major. Implementations must be safe to
// evaluate concurrently.
class DiffusionModel {
 public:
  virtual ~DiffusionModel() = default;

  virtual std::size_t state_dim() const = 0;
  virtual std::size_t noise_dim() const = 0;

  virtual void drift(std::span<const double> x, std::span<double> out) const = 0;
  // d x r
  virtual void diffusion(std::span<const double> x, std::span<double> out) const = 0;

  virtual bool has_jacobians() const { return false; }
  // d x d, Db
  virtual void drift_jacobian(std::span<const double> x, std::span<double> out) const;
  // d x d, D sigma_{.j}
  virtual void diffusion_column_jacobian(std::span<const double> x, std::size_t column,
                                         std::span<double> out) const;

  // True when derivatives come from finite differences rather than closed forms.
  virtual bool lower_trust() const { return false; }
};

// phi with its gradient and Hessian (d x d, row-major).
class TestFunction {
 public:
  virtual ~TestFunction() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;
  virtual void hessian(std::span<const double> x, std::span<double> out) const = 0;
};

// Scratch buffers sized for one model; one per thread.
struct Workspace {
  Workspace(std::size_t d, std::size_t r);
  explicit Workspace(const DiffusionModel& model) : Workspace(model.state_dim(), model.noise_dim()) {}

  std::vector<double> drift;
  std::vector<double> sigma;
  std::vector<double> gradient;
  std::vector<double> hessian;
  std::vector<double> jacobian;
  std::vector<double> vec;
};

// A phi(x) = b . grad phi + 1/2 Tr(sigma sigma^* D^2 phi)
double generator_apply(const DiffusionModel& model, const TestFunction& phi,
                       std::span<const double> x, Workspace& ws);
double generator_apply(const DiffusionModel& model, const TestFunction& phi,
                       std::span<const double> x);

// |sigma^* grad phi|^2
double carre_source(const DiffusionModel& model, const TestFunction& phi,
                    std::span<const double> x, Workspace& ws);
double carre_source(const DiffusionModel& model, const TestFunction& phi,
                    std::span<const double> x);

// ||sigma||^2 (Frobenius), i.e. Tr(sigma sigma^*)
double sigma_norm2(const DiffusionModel& model, std::span<const double> x, Workspace& ws);

// <(Db + Db^*)/2 xi, xi> + 1/2 sum_j ((p-2) <D sigma_j xi, xi>^2 / |xi|^2 + |D sigma_j xi|^2)
double confluence_form(const DiffusionModel& model, std::span<const double> x,
                       std::span<const double> xi, double p);

// Axis-aligned box scanned on a uniform tensor grid, best point then refined
// by coordinate-wise golden-section search.
struct SearchBox {
  std::vector<std::pair<double, double>> bounds;
  std::size_t points_per_dim = 2001;

  static SearchBox cube(std::size_t d, double lo, double hi, std::size_t points_per_dim = 2001);
};

struct SupremumResult {
  double value;
  std::vector<double> argmax;
};

SupremumResult grid_supremum(const std::function<double(std::span<const double>)>& f,
                             const SearchBox& box, bool refine = true);

// Lipschitz estimate of f on the box: sup of |grad f| by central differences.
double grid_lipschitz(const std::function<double(std::span<const double>)>& f, const SearchBox& box,
                      double fd_step = 1e-5);

struct ConfluenceEstimate {
  double alpha;
  bool certified;
  std::vector<double> argmax;
};

// Threshold below which a positive alpha estimate is treated as grid noise.
inline constexpr double kConfluenceCertifyTolerance = 1e-6;

// alpha = -sup over the box and xi samples of confluence_form / |xi|^2.
// Without xi samples the coordinate axes and their pairwise diagonals are used.
ConfluenceEstimate estimate_confluence_alpha(const DiffusionModel& model, double p,
                                             const SearchBox& box,
                                             std::span<const std::vector<double>> xi_samples = {});

// [theta]_1 <= [|sigma^* grad phi|^2]_1 / alpha
double theta_lipschitz_bound(double source_lip, double alpha);

struct VarianceProxies {
  double nu_carre = 0.0;      // nu(|sigma^* grad phi|^2)
  double nu_sigma2 = 0.0;     // nu(||sigma||^2)
  double sigma_sup = 0.0;     // ||sigma||_inf
  double grad_phi_sup = 0.0;  // ||grad phi||_inf
  double theta_lip = 0.0;     // [theta]_1
  double alpha = 0.0;         // confluence constant
  double p_confluence = 1.5;

  // Throws DomainError on negative entries, alpha <= 0 or
  // nu_carre > sigma_sup^2 grad_phi_sup^2.
  void validate() const;

  friend bool operator==(const VarianceProxies&, const VarianceProxies&) = default;
};

// Model, test function and what is known about them in closed form.
struct ModelBundle {
  std::string name;
  std::shared_ptr<const DiffusionModel> model;
  std::shared_ptr<const TestFunction> phi;
  SearchBox box;
  std::optional<double> sigma_sup;
  std::optional<double> grad_phi_sup;
  std::optional<double> source_lip;
};

// d = r = 1, b(x) = -x/2, sigma = phi = cos.
ModelBundle builtin_cosine_model();

// Registry of built-in models; currently "cosine-ou".
std::vector<std::string> registered_models();
ModelBundle find_model(std::string_view name);

// Wraps a model without jacobians; derivatives by central differences, flagged lower trust.
std::shared_ptr<const DiffusionModel> with_finite_difference_jacobians(
    std::shared_ptr<const DiffusionModel> model, double step = 1e-6);

// Model from plain callables.
struct FunctionModelSpec {
  std::size_t state_dim = 1;
  std::size_t noise_dim = 1;
  std::function<void(std::span<const double>, std::span<double>)> drift;
  std::function<void(std::span<const double>, std::span<double>)> diffusion;
  std::function<void(std::span<const double>, std::span<double>)> drift_jacobian;
  std::function<void(std::span<const double>, std::size_t, std::span<double>)> diffusion_column_jacobian;
};
std::shared_ptr<const DiffusionModel> make_function_model(FunctionModelSpec spec);

struct FunctionTestSpec {
  std::size_t dim = 1;
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  std::function<void(std::span<const double>, std::span<double>)> hessian;
};
std::shared_ptr<const TestFunction> make_function_test(FunctionTestSpec spec);

}  // namespace ergconc
