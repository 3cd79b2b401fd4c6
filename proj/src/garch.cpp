#include "carbonbn/garch.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multifit.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <numeric>
#include <random>

#include "carbonbn/errors.hpp"

namespace carbonbn {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kMaxPersistence = 0.9999;
constexpr double kMinShare = 1e-9;
constexpr double kGradientTol = 1e-4;

struct GslVector {
  gsl_vector* v;
  explicit GslVector(std::size_t n) : v(gsl_vector_alloc(n)) {}
  ~GslVector() { gsl_vector_free(v); }
  GslVector(const GslVector&) = delete;
  GslVector& operator=(const GslVector&) = delete;
};

struct VarianceParams {
  double omega = 0.0;
  std::vector<double> alpha, beta;
};

// Unconstrained coordinates: [log omega, logit persistence, share logits 1..p+q-1].
// Share logit 0 is pinned at zero.
VarianceParams decode(const double* u, int p, int q) {
  VarianceParams out;
  out.omega = std::exp(u[0]);
  const double persistence = kMaxPersistence / (1.0 + std::exp(-u[1]));
  const int m = p + q;
  std::vector<double> w(static_cast<std::size_t>(m));
  double max_logit = 0.0;
  for (int i = 1; i < m; ++i) max_logit = std::max(max_logit, u[1 + i]);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const double logit = i == 0 ? 0.0 : u[1 + i];
    w[static_cast<std::size_t>(i)] = std::exp(logit - max_logit);
    total += w[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < p; ++i) out.alpha.push_back(persistence * w[static_cast<std::size_t>(i)] / total);
  for (int j = 0; j < q; ++j) out.beta.push_back(persistence * w[static_cast<std::size_t>(p + j)] / total);
  return out;
}

std::vector<double> encode(const VarianceParams& params) {
  const int p = static_cast<int>(params.alpha.size());
  const int q = static_cast<int>(params.beta.size());
  std::vector<double> shares;
  for (double a : params.alpha) shares.push_back(std::max(a, kMinShare));
  for (double b : params.beta) shares.push_back(std::max(b, kMinShare));
  double persistence = std::accumulate(shares.begin(), shares.end(), 0.0);
  persistence = std::clamp(persistence, 1e-6, kMaxPersistence * (1.0 - 1e-6));
  std::vector<double> u(static_cast<std::size_t>(1 + p + q));
  u[0] = std::log(std::max(params.omega, 1e-12));
  const double frac = persistence / kMaxPersistence;
  u[1] = std::log(frac / (1.0 - frac));
  for (std::size_t i = 1; i < shares.size(); ++i) u[1 + i] = std::log(shares[i] / shares[0]);
  return u;
}

// Gaussian log-likelihood of innovations under a GARCH(p,q) variance recursion.
// Pre-sample squared innovations and variances are set to the sample variance.
double garch_loglik(std::span<const double> eps, const VarianceParams& vp, double sample_var,
                    std::vector<double>* variances = nullptr) {
  const std::size_t n = eps.size();
  const std::size_t p = vp.alpha.size();
  const std::size_t q = vp.beta.size();
  std::vector<double> h(n);
  double loglik = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double ht = vp.omega;
    for (std::size_t i = 0; i < p; ++i) ht += vp.alpha[i] * (t > i ? eps[t - i - 1] * eps[t - i - 1] : sample_var);
    for (std::size_t j = 0; j < q; ++j) ht += vp.beta[j] * (t > j ? h[t - j - 1] : sample_var);
    if (!(ht > 0.0) || !std::isfinite(ht)) return -std::numeric_limits<double>::infinity();
    h[t] = ht;
    loglik -= 0.5 * (kLog2Pi + std::log(ht) + eps[t] * eps[t] / ht);
  }
  if (variances) *variances = std::move(h);
  return loglik;
}

struct MeanFit {
  double intercept = 0.0;
  std::vector<double> coef;
  std::vector<double> eps;  // innovations for t = lag..n-1
};

// Conditional least squares for y_t = c + sum_i phi_i y_{t-i} + e_t.
std::optional<MeanFit> fit_mean(std::span<const double> y, int lag) {
  const std::size_t L = static_cast<std::size_t>(lag);
  if (y.size() <= L + 2) return std::nullopt;
  const std::size_t n = y.size() - L;
  MeanFit fit;
  if (lag == 0) {
    fit.intercept = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  } else {
    gsl_matrix* X = gsl_matrix_alloc(n, L + 1);
    gsl_vector* target = gsl_vector_alloc(n);
    gsl_vector* c = gsl_vector_alloc(L + 1);
    gsl_matrix* cov = gsl_matrix_alloc(L + 1, L + 1);
    gsl_multifit_linear_workspace* work = gsl_multifit_linear_alloc(n, L + 1);
    for (std::size_t t = 0; t < n; ++t) {
      gsl_matrix_set(X, t, 0, 1.0);
      for (std::size_t i = 1; i <= L; ++i) gsl_matrix_set(X, t, i, y[L + t - i]);
      gsl_vector_set(target, t, y[L + t]);
    }
    double chisq = 0.0;
    const int status = gsl_multifit_linear(X, target, c, cov, &chisq, work);
    if (status == GSL_SUCCESS) {
      fit.intercept = gsl_vector_get(c, 0);
      for (std::size_t i = 1; i <= L; ++i) fit.coef.push_back(gsl_vector_get(c, i));
    }
    gsl_multifit_linear_free(work);
    gsl_matrix_free(cov);
    gsl_vector_free(c);
    gsl_vector_free(target);
    gsl_matrix_free(X);
    if (status != GSL_SUCCESS) return std::nullopt;
  }
  fit.eps.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    double mu = fit.intercept;
    for (std::size_t i = 0; i < L; ++i) mu += fit.coef[i] * y[L + t - i - 1];
    fit.eps[t] = y[L + t] - mu;
  }
  return fit;
}

struct Objective {
  std::span<const double> eps;
  double sample_var;
  int p, q;
};

// Negative mean log-likelihood and its gradient in unconstrained coordinates.
double objective_with_gradient(const double* u, const Objective& obj, double* grad) {
  const auto vp = decode(u, obj.p, obj.q);
  const std::size_t n = obj.eps.size();
  const std::size_t p = vp.alpha.size();
  const std::size_t q = vp.beta.size();
  const std::size_t k = 1 + p + q;  // omega, alpha..., beta...
  std::vector<double> h(n);
  std::vector<double> dh(grad ? n * k : 0);
  std::vector<double> g(k, 0.0);
  double loglik = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double ht = vp.omega;
    for (std::size_t i = 0; i < p; ++i) ht += vp.alpha[i] * (t > i ? obj.eps[t - i - 1] * obj.eps[t - i - 1] : obj.sample_var);
    for (std::size_t j = 0; j < q; ++j) ht += vp.beta[j] * (t > j ? h[t - j - 1] : obj.sample_var);
    if (!(ht > 0.0) || !std::isfinite(ht)) return 1e300;
    h[t] = ht;
    const double e2 = obj.eps[t] * obj.eps[t];
    loglik -= 0.5 * (kLog2Pi + std::log(ht) + e2 / ht);
    if (!grad) continue;
    double* d = &dh[t * k];
    d[0] = 1.0;
    for (std::size_t i = 0; i < p; ++i) d[1 + i] = t > i ? obj.eps[t - i - 1] * obj.eps[t - i - 1] : obj.sample_var;
    for (std::size_t j = 0; j < q; ++j) d[1 + p + j] = t > j ? h[t - j - 1] : obj.sample_var;
    for (std::size_t j = 0; j < q; ++j) {
      if (t <= j) continue;
      const double* prev = &dh[(t - j - 1) * k];
      for (std::size_t m = 0; m < k; ++m) d[m] += vp.beta[j] * prev[m];
    }
    const double w = -0.5 * (1.0 / ht - e2 / (ht * ht));
    for (std::size_t m = 0; m < k; ++m) g[m] += w * d[m];
  }
  const double scale = -1.0 / static_cast<double>(n);
  if (grad) {
    // Chain rule through decode(): omega = exp(u0), coef_m = persistence * share_m.
    grad[0] = scale * g[0] * vp.omega;
    double persistence = 0.0;
    for (double a : vp.alpha) persistence += a;
    for (double b : vp.beta) persistence += b;
    const std::size_t m_total = p + q;
    std::vector<double> share(m_total);
    double weighted = 0.0;
    for (std::size_t m = 0; m < m_total; ++m) {
      share[m] = (m < p ? vp.alpha[m] : vp.beta[m - p]) / persistence;
      weighted += g[1 + m] * share[m];
    }
    grad[1] = scale * weighted * persistence * (1.0 - persistence / kMaxPersistence);
    for (std::size_t m = 1; m < m_total; ++m) grad[1 + m] = scale * persistence * share[m] * (g[1 + m] - weighted);
  }
  return scale * loglik;
}

double objective_fn(const gsl_vector* x, void* raw) {
  return objective_with_gradient(x->data, *static_cast<const Objective*>(raw), nullptr);
}

void gradient_fn(const gsl_vector* x, void* raw, gsl_vector* grad) {
  objective_with_gradient(x->data, *static_cast<const Objective*>(raw), grad->data);
}

void value_gradient_fn(const gsl_vector* x, void* raw, double* f, gsl_vector* grad) {
  *f = objective_with_gradient(x->data, *static_cast<const Objective*>(raw), grad->data);
}

double gradient_norm(const std::vector<double>& u, const Objective& obj) {
  std::vector<double> grad(u.size());
  objective_with_gradient(u.data(), obj, grad.data());
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  return std::sqrt(sq);
}

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
};

SimplexResult run_simplex(Objective& obj, std::vector<double> start) {
  const std::size_t dim = start.size();
  gsl_multimin_function fn{&objective_fn, dim, &obj};
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim), &gsl_multimin_fminimizer_free);
  GslVector x(dim), step(dim);
  for (std::size_t i = 0; i < dim; ++i) gsl_vector_set(x.v, i, start[i]);
  gsl_vector_set_all(step.v, 0.5);
  gsl_multimin_fminimizer_set(solver.get(), &fn, x.v, step.v);

  const int max_iter = 300 + 150 * static_cast<int>(dim);
  int status = GSL_CONTINUE;
  for (int iter = 0; iter < max_iter && status == GSL_CONTINUE; ++iter) {
    if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver.get()), 1e-5);
  }
  SimplexResult out;
  const gsl_vector* best = gsl_multimin_fminimizer_x(solver.get());
  out.x.assign(best->data, best->data + dim);
  out.value = gsl_multimin_fminimizer_minimum(solver.get());
  out.converged = status == GSL_SUCCESS && out.value < 1e299;
  return out;
}

SimplexResult run_bfgs(Objective& obj, const std::vector<double>& start) {
  const std::size_t dim = start.size();
  gsl_multimin_function_fdf fdf{&objective_fn, &gradient_fn, &value_gradient_fn, dim, &obj};
  std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> solver(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, dim), &gsl_multimin_fdfminimizer_free);
  GslVector x(dim);
  for (std::size_t i = 0; i < dim; ++i) gsl_vector_set(x.v, i, start[i]);
  gsl_multimin_fdfminimizer_set(solver.get(), &fdf, x.v, 0.1, 0.1);
  int status = GSL_CONTINUE;
  for (int iter = 0; iter < 500 && status == GSL_CONTINUE; ++iter) {
    if (gsl_multimin_fdfminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    status = gsl_multimin_test_gradient(gsl_multimin_fdfminimizer_gradient(solver.get()), kGradientTol);
  }
  SimplexResult out;
  const gsl_vector* best = gsl_multimin_fdfminimizer_x(solver.get());
  out.x.assign(best->data, best->data + dim);
  out.value = gsl_multimin_fdfminimizer_minimum(solver.get());
  out.converged = status == GSL_SUCCESS && out.value < 1e299;
  return out;
}

VarianceParams default_start(int p, int q, double sample_var) {
  VarianceParams vp;
  vp.alpha.assign(static_cast<std::size_t>(p), 0.05 / p);
  vp.beta.assign(static_cast<std::size_t>(q), 0.90 / q);
  vp.omega = sample_var * 0.05;
  return vp;
}

VarianceParams grow_from(const GarchCellFit& prev, int p, int q) {
  VarianceParams vp;
  vp.omega = prev.omega;
  vp.alpha = prev.alpha;
  vp.beta = prev.beta;
  vp.alpha.resize(static_cast<std::size_t>(p), 0.01);
  vp.beta.resize(static_cast<std::size_t>(q), 0.01);
  const double total = std::accumulate(vp.alpha.begin(), vp.alpha.end(), 0.0) +
                       std::accumulate(vp.beta.begin(), vp.beta.end(), 0.0);
  if (total > 0.995) {
    for (auto& a : vp.alpha) a *= 0.995 / total;
    for (auto& b : vp.beta) b *= 0.995 / total;
  }
  return vp;
}

}  // namespace

std::string_view to_string(FilterMode mode) {
  return mode == FilterMode::ar_garch ? "ar_garch" : "garch_only";
}

FilterMode parse_filter_mode(std::string_view text) {
  if (text == "ar_garch") return FilterMode::ar_garch;
  if (text == "garch_only") return FilterMode::garch_only;
  throw InputError("unknown filter mode '" + std::string(text) + "'");
}

double FilterModel::persistence() const {
  return std::accumulate(alpha.begin(), alpha.end(), 0.0) + std::accumulate(beta.begin(), beta.end(), 0.0);
}

std::optional<GarchCellFit> fit_garch_cell(std::span<const double> scaled, int lag, int p, int q,
                                           const GarchCellFit* warm_start) {
  if (lag < 0 || p < 1 || q < 1) throw InputError("invalid GARCH orders");
  auto mean = fit_mean(scaled, lag);
  if (!mean) return std::nullopt;
  const double sample_var =
      std::inner_product(mean->eps.begin(), mean->eps.end(), mean->eps.begin(), 0.0) /
      static_cast<double>(mean->eps.size());
  if (!(sample_var > 0.0)) return std::nullopt;

  Objective obj{mean->eps, sample_var, p, q};
  std::vector<double> start = encode(default_start(p, q, sample_var));
  if (warm_start) {
    auto warm = encode(grow_from(*warm_start, p, q));
    GslVector a(start.size()), b(warm.size());
    std::copy(start.begin(), start.end(), a.v->data);
    std::copy(warm.begin(), warm.end(), b.v->data);
    if (objective_fn(b.v, &obj) < objective_fn(a.v, &obj)) start = std::move(warm);
  }

  // Quasi-Newton first; when it stalls, restart with the simplex from where it stopped.
  SimplexResult result = run_bfgs(obj, start);
  for (int restart = 0; restart < 3 && !result.converged; ++restart) {
    SimplexResult polished = run_simplex(obj, result.x);
    if (polished.value <= result.value) result.x = std::move(polished.x), result.value = polished.value;
    SimplexResult again = run_bfgs(obj, result.x);
    if (again.value <= result.value) result = std::move(again);
    result.converged = result.converged || gradient_norm(result.x, obj) < 10 * kGradientTol;
  }
  if (!result.converged || result.value >= 1e299) return std::nullopt;

  const auto vp = decode(result.x.data(), p, q);
  GarchCellFit fit;
  fit.lag = lag;
  fit.p = p;
  fit.q = q;
  fit.intercept = mean->intercept;
  fit.ar_coef = mean->coef;
  fit.omega = vp.omega;
  fit.alpha = vp.alpha;
  fit.beta = vp.beta;
  fit.n_obs = mean->eps.size();
  fit.log_likelihood = garch_loglik(mean->eps, vp, sample_var);
  const double k = static_cast<double>(lag + 1 + 1 + p + q);
  fit.bic = k * std::log(static_cast<double>(fit.n_obs)) - 2.0 * fit.log_likelihood;
  fit.converged = true;
  return fit;
}

std::vector<double> standardized_residuals(std::span<const double> scaled, const GarchCellFit& fit) {
  if (scaled.size() <= static_cast<std::size_t>(fit.lag)) throw InputError("series shorter than AR order");
  const std::size_t L = static_cast<std::size_t>(fit.lag);
  std::vector<double> eps(scaled.size() - L);
  for (std::size_t t = 0; t < eps.size(); ++t) {
    double mu = fit.intercept;
    for (std::size_t i = 0; i < L; ++i) mu += fit.ar_coef[i] * scaled[L + t - i - 1];
    eps[t] = scaled[L + t] - mu;
  }
  const double sample_var =
      std::inner_product(eps.begin(), eps.end(), eps.begin(), 0.0) / static_cast<double>(eps.size());
  VarianceParams vp{fit.omega, fit.alpha, fit.beta};
  std::vector<double> h;
  if (!std::isfinite(garch_loglik(eps, vp, sample_var, &h))) throw NumericalError("variance recursion failed");
  for (std::size_t t = 0; t < eps.size(); ++t) eps[t] /= std::sqrt(h[t]);
  return eps;
}

FilterModel fit_filter(std::span<const double> series, const FilterOptions& options, std::string instrument) {
  if (series.size() < options.min_length)
    throw InputError("series " + instrument + " has " + std::to_string(series.size()) +
                     " observations; at least " + std::to_string(options.min_length) + " required");
  for (double v : series)
    if (!std::isfinite(v)) throw InputError("series " + instrument + " contains non-finite values");

  std::vector<double> scaled(series.begin(), series.end());
  if (!options.prescaled)
    for (auto& v : scaled) v *= options.scale;

  const int max_lag = options.mode == FilterMode::garch_only ? 0 : options.grid.max_lag;
  std::optional<GarchCellFit> best;
  std::vector<std::string> skipped;
  for (int lag = 0; lag <= max_lag; ++lag) {
    // Every cell is scored on the same observations: the first max_lag values are pre-sample.
    const std::span<const double> window(scaled.data() + (max_lag - lag), scaled.size() - static_cast<std::size_t>(max_lag - lag));
    std::vector<std::optional<GarchCellFit>> row_prev;  // fits for p-1, indexed by q
    for (int p = 1; p <= options.grid.max_p; ++p) {
      std::vector<std::optional<GarchCellFit>> row(static_cast<std::size_t>(options.grid.max_q + 1));
      for (int q = 1; q <= options.grid.max_q; ++q) {
        const GarchCellFit* warm = nullptr;
        if (q > 1 && row[static_cast<std::size_t>(q - 1)]) {
          warm = &*row[static_cast<std::size_t>(q - 1)];
        } else if (p > 1 && row_prev[static_cast<std::size_t>(q)]) {
          warm = &*row_prev[static_cast<std::size_t>(q)];
        }
        auto fit = fit_garch_cell(window, lag, p, q, warm);
        if (!fit) {
          skipped.push_back(std::to_string(lag) + "," + std::to_string(p) + "," + std::to_string(q));
          std::clog << "fit_filter: " << (instrument.empty() ? "series" : instrument) << " cell (" << lag << ","
                    << p << "," << q << ") did not converge; skipped\n";
          continue;
        }
        if (!best || fit->bic < best->bic) best = *fit;
        row[static_cast<std::size_t>(q)] = std::move(fit);
      }
      row_prev = std::move(row);
    }
  }
  if (!best) throw NumericalError("every GARCH grid cell failed for series " + instrument);

  FilterModel model;
  model.instrument = std::move(instrument);
  model.mode = options.mode;
  model.ar_order = best->lag;
  model.garch_p = best->p;
  model.garch_q = best->q;
  model.intercept = best->intercept;
  model.ar_coef = best->ar_coef;
  model.omega = best->omega;
  model.alpha = best->alpha;
  model.beta = best->beta;
  model.log_likelihood = best->log_likelihood;
  model.bic = best->bic;
  model.n_obs = best->n_obs;
  model.residuals = standardized_residuals(scaled, *best);
  for (auto& r : model.residuals) r /= options.scale;
  model.skipped_cells = std::move(skipped);
  return model;
}

double ljung_box(std::span<const double> x, int lags) {
  const std::size_t n = x.size();
  if (lags < 1 || n <= static_cast<std::size_t>(lags)) throw InputError("Ljung-Box needs more observations than lags");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  if (!(denom > 0.0)) return 0.0;
  double q = 0.0;
  for (int k = 1; k <= lags; ++k) {
    double num = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) num += (x[t] - mean) * (x[t - k] - mean);
    const double rho = num / denom;
    q += rho * rho / static_cast<double>(n - static_cast<std::size_t>(k));
  }
  return static_cast<double>(n) * static_cast<double>(n + 2) * q;
}

std::vector<double> simulate_garch(std::size_t n, double mu, double omega, std::span<const double> alpha,
                                   std::span<const double> beta, std::uint64_t seed, std::size_t burn_in) {
  const double persistence = std::accumulate(alpha.begin(), alpha.end(), 0.0) +
                             std::accumulate(beta.begin(), beta.end(), 0.0);
  if (!(omega > 0.0) || persistence >= 1.0) throw InputError("simulate_garch needs a stationary specification");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const double uncond = omega / (1.0 - persistence);
  const std::size_t total = n + burn_in;
  std::vector<double> e(total), h(total);
  for (std::size_t t = 0; t < total; ++t) {
    double ht = omega;
    for (std::size_t i = 0; i < alpha.size(); ++i) ht += alpha[i] * (t > i ? e[t - i - 1] * e[t - i - 1] : uncond);
    for (std::size_t j = 0; j < beta.size(); ++j) ht += beta[j] * (t > j ? h[t - j - 1] : uncond);
    h[t] = ht;
    e[t] = std::sqrt(ht) * z(rng);
  }
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = mu + e[burn_in + t];
  return out;
}

FilteredPanel filter_panel(const TimePanel& returns, const FilterOptions& options) {
  if (returns.kind != SeriesKind::log_returns) throw InputError("filter_panel expects a log-return panel");
  FilteredPanel out;
  std::size_t max_lag = 0;
  for (std::size_t c = 0; c < returns.cols(); ++c) {
    out.models.push_back(fit_filter(returns.columns[c], options, returns.names[c]));
    max_lag = std::max(max_lag, static_cast<std::size_t>(out.models.back().ar_order));
  }
  out.residuals.kind = SeriesKind::residuals;
  out.residuals.names = returns.names;
  out.residuals.dates.assign(returns.dates.begin() + static_cast<std::ptrdiff_t>(max_lag), returns.dates.end());
  for (const auto& m : out.models) {
    const std::size_t drop = max_lag - static_cast<std::size_t>(m.ar_order);
    out.residuals.columns.emplace_back(m.residuals.begin() + static_cast<std::ptrdiff_t>(drop), m.residuals.end());
  }
  return out;
}

}  // namespace carbonbn
