#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "carbonbn/data_prep.hpp"

namespace carbonbn {

enum class FilterMode { ar_garch, garch_only };

std::string_view to_string(FilterMode mode);
FilterMode parse_filter_mode(std::string_view text);

/// Order grid searched by fit_filter. In garch_only mode the AR lag is pinned to 0.
struct FilterGrid {
  int max_lag = 7;
  int max_p = 9;  // ARCH order (alpha terms)
  int max_q = 9;  // GARCH order (beta terms)
};

struct FilterOptions {
  FilterMode mode = FilterMode::ar_garch;
  FilterGrid grid;
  double scale = 1000.0;
  /// The caller already multiplied the series by `scale`.
  bool prescaled = false;
  std::size_t min_length = 500;
};

/// A fitted AR(lag)-GARCH(p,q) filter for one series. Parameters are in the
/// scaled units the model was estimated in.
struct FilterModel {
  std::string instrument;
  FilterMode mode = FilterMode::ar_garch;
  int ar_order = 0;
  int garch_p = 1;
  int garch_q = 1;
  double intercept = 0.0;
  std::vector<double> ar_coef;
  double omega = 0.0;
  std::vector<double> alpha;
  std::vector<double> beta;
  double log_likelihood = 0.0;
  double bic = 0.0;
  std::size_t n_obs = 0;
  /// Standardized innovations divided by the scale factor.
  std::vector<double> residuals;
  /// Grid cells whose optimizer failed, as "lag,p,q".
  std::vector<std::string> skipped_cells;

  double persistence() const;
};

/// One (lag, p, q) cell fit on an already scaled series; nullopt if the
/// optimizer did not converge.
struct GarchCellFit {
  int lag = 0, p = 1, q = 1;
  double intercept = 0.0;
  std::vector<double> ar_coef;
  double omega = 0.0;
  std::vector<double> alpha, beta;
  double log_likelihood = 0.0;
  double bic = 0.0;
  std::size_t n_obs = 0;
  bool converged = false;
};

std::optional<GarchCellFit> fit_garch_cell(std::span<const double> scaled, int lag, int p, int q,
                                           const GarchCellFit* warm_start = nullptr);

/// BIC grid search on a common sample (the first max_lag values are pre-sample for every
/// cell). Ties go to the lexicographically smallest (lag, p, q).
FilterModel fit_filter(std::span<const double> series, const FilterOptions& options,
                       std::string instrument = {});

/// Standardized innovations of a cell fit, in scaled units.
std::vector<double> standardized_residuals(std::span<const double> scaled, const GarchCellFit& fit);

/// Ljung-Box Q statistic over `lags` autocorrelations.
double ljung_box(std::span<const double> x, int lags);

/// Gaussian GARCH path: e_t = sqrt(h_t) z_t, h_t = omega + sum alpha e^2 + sum beta h.
std::vector<double> simulate_garch(std::size_t n, double mu, double omega, std::span<const double> alpha,
                                   std::span<const double> beta, std::uint64_t seed, std::size_t burn_in = 500);

/// Fits every column of a return panel and returns the residual panel with
/// dates trimmed to the shortest residual series (largest AR order).
struct FilteredPanel {
  TimePanel residuals;
  std::vector<FilterModel> models;
};
FilteredPanel filter_panel(const TimePanel& returns, const FilterOptions& options);

}  // namespace carbonbn
