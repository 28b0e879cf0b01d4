#include "ergconc/model.hpp"

#include <algorithm>
#include <cmath>

#include "ergconc/errors.hpp"

namespace ergconc {

void DiffusionModel::drift_jacobian(std::span<const double>, std::span<double>) const {
  throw DomainError("model has no drift jacobian");
}

void DiffusionModel::diffusion_column_jacobian(std::span<const double>, std::size_t,
                                               std::span<double>) const {
  throw DomainError("model has no diffusion jacobian");
}

Workspace::Workspace(std::size_t d, std::size_t r)
    : drift(d), sigma(d * r), gradient(d), hessian(d * d), jacobian(d * d), vec(d) {}

double generator_apply(const DiffusionModel& model, const TestFunction& phi,
                       std::span<const double> x, Workspace& ws) {
  const std::size_t d = model.state_dim();
  const std::size_t r = model.noise_dim();
  model.drift(x, ws.drift);
  model.diffusion(x, ws.sigma);
  phi.gradient(x, ws.gradient);
  phi.hessian(x, ws.hessian);
  double first = 0.0;
  for (std::size_t i = 0; i < d; ++i) first += ws.drift[i] * ws.gradient[i];
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < r; ++j) s += ws.sigma[i * r + j] * ws.sigma[k * r + j];
      trace += s * ws.hessian[k * d + i];
    }
  }
  return first + 0.5 * trace;
}

double generator_apply(const DiffusionModel& model, const TestFunction& phi,
                       std::span<const double> x) {
  Workspace ws(model);
  return generator_apply(model, phi, x, ws);
}

double carre_source(const DiffusionModel& model, const TestFunction& phi,
                    std::span<const double> x, Workspace& ws) {
  const std::size_t d = model.state_dim();
  const std::size_t r = model.noise_dim();
  model.diffusion(x, ws.sigma);
  phi.gradient(x, ws.gradient);
  double total = 0.0;
  for (std::size_t j = 0; j < r; ++j) {
    double c = 0.0;
    for (std::size_t i = 0; i < d; ++i) c += ws.sigma[i * r + j] * ws.gradient[i];
    total += c * c;
  }
  return total;
}

double carre_source(const DiffusionModel& model, const TestFunction& phi,
                    std::span<const double> x) {
  Workspace ws(model);
  return carre_source(model, phi, x, ws);
}

double sigma_norm2(const DiffusionModel& model, std::span<const double> x, Workspace& ws) {
  model.diffusion(x, ws.sigma);
  double total = 0.0;
  for (double s : ws.sigma) total += s * s;
  return total;
}

double confluence_form(const DiffusionModel& model, std::span<const double> x,
                       std::span<const double> xi, double p) {
  if (!model.has_jacobians()) throw DomainError("confluence form needs drift and diffusion jacobians");
  const std::size_t d = model.state_dim();
  const std::size_t r = model.noise_dim();
  if (xi.size() != d) throw DomainError("xi has the wrong dimension");
  double xi2 = 0.0;
  for (double v : xi) xi2 += v * v;
  if (!(xi2 > 0.0)) throw DomainError("confluence form needs a non-zero xi");

  std::vector<double> jac(d * d);
  std::vector<double> jxi(d);
  auto apply = [&] {
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += jac[i * d + k] * xi[k];
      jxi[i] = s;
    }
  };
  auto dot = [&](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
  };

  // <(Db + Db^*)/2 xi, xi> = <Db xi, xi>
  model.drift_jacobian(x, jac);
  apply();
  double value = dot(jxi, xi);
  double diffusion_part = 0.0;
  for (std::size_t j = 0; j < r; ++j) {
    model.diffusion_column_jacobian(x, j, jac);
    apply();
    const double along = dot(jxi, xi);
    diffusion_part += (p - 2.0) * along * along / xi2 + dot(jxi, jxi);
  }
  return value + 0.5 * diffusion_part;
}

SearchBox SearchBox::cube(std::size_t d, double lo, double hi, std::size_t points_per_dim) {
  SearchBox box;
  box.bounds.assign(d, {lo, hi});
  box.points_per_dim = points_per_dim;
  return box;
}

namespace {

constexpr std::size_t kMaxGridPoints = 2'000'000;

std::size_t effective_points(const SearchBox& box) {
  const std::size_t d = box.bounds.size();
  std::size_t ppd = std::max<std::size_t>(box.points_per_dim, 2);
  if (d > 1) {
    const auto cap = static_cast<std::size_t>(std::floor(std::pow(double(kMaxGridPoints), 1.0 / double(d))));
    ppd = std::clamp<std::size_t>(ppd, 2, std::max<std::size_t>(cap, 2));
  }
  return ppd;
}

// Maximizes f along coordinate `axis` on [lo, hi] by golden-section search.
void golden_refine(const std::function<double(std::span<const double>)>& f, std::vector<double>& x,
                   double& best, std::size_t axis, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  std::vector<double> probe = x;
  auto eval = [&](double t) {
    probe[axis] = t;
    return f(probe);
  };
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double e = a + kInvPhi * (b - a);
  double fc = eval(c), fe = eval(e);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::fabs(a) + std::fabs(b)); ++it) {
    if (fc > fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - kInvPhi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + kInvPhi * (b - a);
      fe = eval(e);
    }
  }
  const double t = fc > fe ? c : e;
  const double ft = std::max(fc, fe);
  if (ft > best) {
    best = ft;
    x[axis] = t;
  }
}

}  // namespace

SupremumResult grid_supremum(const std::function<double(std::span<const double>)>& f,
                             const SearchBox& box, bool refine) {
  const std::size_t d = box.bounds.size();
  if (d == 0) throw DomainError("search box is empty");
  const std::size_t ppd = effective_points(box);
  std::vector<double> h(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto [lo, hi] = box.bounds[i];
    if (!(hi >= lo)) throw DomainError("search box bounds are inverted");
    h[i] = (hi - lo) / double(ppd - 1);
  }
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  SupremumResult result{-INFINITY, std::vector<double>(d)};
  while (true) {
    for (std::size_t i = 0; i < d; ++i) x[i] = box.bounds[i].first + double(idx[i]) * h[i];
    const double v = f(x);
    if (v > result.value) {
      result.value = v;
      result.argmax = x;
    }
    std::size_t axis = 0;
    while (axis < d && ++idx[axis] == ppd) idx[axis++] = 0;
    if (axis == d) break;
  }
  if (refine) {
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (std::size_t i = 0; i < d; ++i) {
        const double lo = std::max(box.bounds[i].first, result.argmax[i] - h[i]);
        const double hi = std::min(box.bounds[i].second, result.argmax[i] + h[i]);
        if (hi > lo) golden_refine(f, result.argmax, result.value, i, lo, hi);
      }
    }
  }
  return result;
}

double grid_lipschitz(const std::function<double(std::span<const double>)>& f, const SearchBox& box,
                      double fd_step) {
  const std::size_t d = box.bounds.size();
  auto grad_norm = [&](std::span<const double> x) {
    std::vector<double> probe(x.begin(), x.end());
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      probe[i] = x[i] + fd_step;
      const double up = f(probe);
      probe[i] = x[i] - fd_step;
      const double down = f(probe);
      probe[i] = x[i];
      const double g = (up - down) / (2.0 * fd_step);
      total += g * g;
    }
    return std::sqrt(total);
  };
  return grid_supremum(grad_norm, box).value;
}

ConfluenceEstimate estimate_confluence_alpha(const DiffusionModel& model, double p, const SearchBox& box,
                                             std::span<const std::vector<double>> xi_samples) {
  const std::size_t d = model.state_dim();
  if (box.bounds.size() != d) throw DomainError("search box dimension does not match the model");
  std::vector<std::vector<double>> directions;
  if (xi_samples.empty()) {
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<double> e(d, 0.0);
      e[i] = 1.0;
      directions.push_back(e);
      for (std::size_t k = i + 1; k < d; ++k) {
        std::vector<double> plus(d, 0.0), minus(d, 0.0);
        plus[i] = plus[k] = 1.0;
        minus[i] = 1.0;
        minus[k] = -1.0;
        directions.push_back(plus);
        directions.push_back(minus);
      }
    }
  } else {
    directions.assign(xi_samples.begin(), xi_samples.end());
  }
  auto normalized_form = [&](std::span<const double> x) {
    double worst = -INFINITY;
    for (const auto& xi : directions) {
      double xi2 = 0.0;
      for (double v : xi) xi2 += v * v;
      worst = std::max(worst, confluence_form(model, x, xi, p) / xi2);
    }
    return worst;
  };
  const SupremumResult sup = grid_supremum(normalized_form, box);
  const double alpha = -sup.value;
  return {alpha, alpha > kConfluenceCertifyTolerance, sup.argmax};
}

double theta_lipschitz_bound(double source_lip, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("confluence constant alpha must be positive");
  if (!(source_lip >= 0.0)) throw DomainError("source Lipschitz constant must be non-negative");
  return source_lip / alpha;
}

void VarianceProxies::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"nu_carre", nu_carre},   {"nu_sigma2", nu_sigma2}, {"sigma_sup", sigma_sup},
      {"grad_phi_sup", grad_phi_sup}, {"theta_lip", theta_lip}};
  for (const auto& [name, v] : fields) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be finite and >= 0");
  }
  if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
  const double cap = sigma_sup * sigma_sup * grad_phi_sup * grad_phi_sup;
  if (nu_carre > cap * (1.0 + 1e-12)) {
    throw DomainError("nu_carre exceeds sigma_sup^2 * grad_phi_sup^2");
  }
}

namespace {

class CosineModel final : public DiffusionModel {
 public:
  std::size_t state_dim() const override { return 1; }
  std::size_t noise_dim() const override { return 1; }
  void drift(std::span<const double> x, std::span<double> out) const override { out[0] = -x[0] / 2.0; }
  void diffusion(std::span<const double> x, std::span<double> out) const override { out[0] = std::cos(x[0]); }
  bool has_jacobians() const override { return true; }
  void drift_jacobian(std::span<const double>, std::span<double> out) const override { out[0] = -0.5; }
  void diffusion_column_jacobian(std::span<const double> x, std::size_t, std::span<double> out) const override {
    out[0] = -std::sin(x[0]);
  }
};

class CosineTest final : public TestFunction {
 public:
  std::size_t dim() const override { return 1; }
  double value(std::span<const double> x) const override { return std::cos(x[0]); }
  void gradient(std::span<const double> x, std::span<double> out) const override { out[0] = -std::sin(x[0]); }
  void hessian(std::span<const double> x, std::span<double> out) const override { out[0] = -std::cos(x[0]); }
};

class FiniteDifferenceModel final : public DiffusionModel {
 public:
  FiniteDifferenceModel(std::shared_ptr<const DiffusionModel> inner, double step)
      : inner_(std::move(inner)), step_(step) {}
  std::size_t state_dim() const override { return inner_->state_dim(); }
  std::size_t noise_dim() const override { return inner_->noise_dim(); }
  void drift(std::span<const double> x, std::span<double> out) const override { inner_->drift(x, out); }
  void diffusion(std::span<const double> x, std::span<double> out) const override { inner_->diffusion(x, out); }
  bool has_jacobians() const override { return true; }
  bool lower_trust() const override { return true; }

  void drift_jacobian(std::span<const double> x, std::span<double> out) const override {
    const std::size_t d = state_dim();
    std::vector<double> up(d), down(d);
    differentiate(x, [&](std::span<const double> p, std::span<double> o) { inner_->drift(p, o); }, out, up, down);
  }
  void diffusion_column_jacobian(std::span<const double> x, std::size_t column,
                                 std::span<double> out) const override {
    const std::size_t d = state_dim();
    const std::size_t r = noise_dim();
    std::vector<double> full(d * r);
    std::vector<double> up(d), down(d);
    differentiate(
        x,
        [&](std::span<const double> p, std::span<double> o) {
          inner_->diffusion(p, full);
          for (std::size_t i = 0; i < d; ++i) o[i] = full[i * r + column];
        },
        out, up, down);
  }

 private:
  template <class F>
  void differentiate(std::span<const double> x, F&& f, std::span<double> out, std::vector<double>& up,
                     std::vector<double>& down) const {
    const std::size_t d = state_dim();
    std::vector<double> probe(x.begin(), x.end());
    for (std::size_t k = 0; k < d; ++k) {
      probe[k] = x[k] + step_;
      f(probe, up);
      probe[k] = x[k] - step_;
      f(probe, down);
      probe[k] = x[k];
      for (std::size_t i = 0; i < d; ++i) out[i * d + k] = (up[i] - down[i]) / (2.0 * step_);
    }
  }

  std::shared_ptr<const DiffusionModel> inner_;
  double step_;
};

class FunctionModel final : public DiffusionModel {
 public:
  explicit FunctionModel(FunctionModelSpec spec) : spec_(std::move(spec)) {}
  std::size_t state_dim() const override { return spec_.state_dim; }
  std::size_t noise_dim() const override { return spec_.noise_dim; }
  void drift(std::span<const double> x, std::span<double> out) const override { spec_.drift(x, out); }
  void diffusion(std::span<const double> x, std::span<double> out) const override { spec_.diffusion(x, out); }
  bool has_jacobians() const override {
    return static_cast<bool>(spec_.drift_jacobian) && static_cast<bool>(spec_.diffusion_column_jacobian);
  }
  void drift_jacobian(std::span<const double> x, std::span<double> out) const override {
    if (!spec_.drift_jacobian) DiffusionModel::drift_jacobian(x, out);
    spec_.drift_jacobian(x, out);
  }
  void diffusion_column_jacobian(std::span<const double> x, std::size_t j, std::span<double> out) const override {
    if (!spec_.diffusion_column_jacobian) DiffusionModel::diffusion_column_jacobian(x, j, out);
    spec_.diffusion_column_jacobian(x, j, out);
  }

 private:
  FunctionModelSpec spec_;
};

class FunctionTest final : public TestFunction {
 public:
  explicit FunctionTest(FunctionTestSpec spec) : spec_(std::move(spec)) {}
  std::size_t dim() const override { return spec_.dim; }
  double value(std::span<const double> x) const override { return spec_.value(x); }
  void gradient(std::span<const double> x, std::span<double> out) const override { spec_.gradient(x, out); }
  void hessian(std::span<const double> x, std::span<double> out) const override { spec_.hessian(x, out); }

 private:
  FunctionTestSpec spec_;
};

}  // namespace

ModelBundle builtin_cosine_model() {
  ModelBundle bundle;
  bundle.name = "cosine-ou";
  bundle.model = std::make_shared<CosineModel>();
  bundle.phi = std::make_shared<CosineTest>();
  bundle.box = SearchBox::cube(1, -10.0, 10.0, 20001);
  bundle.sigma_sup = 1.0;
  bundle.grad_phi_sup = 1.0;
  // [cos^2 sin^2]_1 = sup |sin(4x)| / 2
  bundle.source_lip = 0.5;
  return bundle;
}

std::vector<std::string> registered_models() { return {"cosine-ou"}; }

ModelBundle find_model(std::string_view name) {
  if (name == "cosine-ou") return builtin_cosine_model();
  throw ConfigError("model", "unknown model '" + std::string(name) + "'");
}

std::shared_ptr<const DiffusionModel> with_finite_difference_jacobians(
    std::shared_ptr<const DiffusionModel> model, double step) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
  return std::make_shared<FiniteDifferenceModel>(std::move(model), step);
}

std::shared_ptr<const DiffusionModel> make_function_model(FunctionModelSpec spec) {
  if (!spec.drift || !spec.diffusion) throw DomainError("function model needs drift and diffusion");
  if (spec.state_dim == 0 || spec.noise_dim == 0) throw DomainError("model dimensions must be positive");
  return std::make_shared<FunctionModel>(std::move(spec));
}

std::shared_ptr<const TestFunction> make_function_test(FunctionTestSpec spec) {
  if (!spec.value || !spec.gradient || !spec.hessian) {
    throw DomainError("test function needs value, gradient and hessian");
  }
  return std::make_shared<FunctionTest>(std::move(spec));
}

}  // namespace ergconc
