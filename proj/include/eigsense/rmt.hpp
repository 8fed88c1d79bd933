#pragma once

// Random-matrix helpers: the Tracy-Widom order-1 distribution built from
// the Hastings-McLeod solution of Painleve II, Gaussian tail functions, and
// the centering/scaling constants for extreme Wishart eigenvalues.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/airy.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/numeric/odeint.hpp>

#include "eigsense/errors.hpp"
#include "eigsense/sample_block.hpp"

namespace eigsense {

/// Q(t) = P(Z > t) for a standard normal Z.
inline double q_function(double t) {
  if (std::isnan(t)) throw DomainError("Q(t) undefined for NaN");
  return 0.5 * std::erfc(t / std::numbers::sqrt2);
}

/// Inverse of q_function on (0, 1).
inline double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("Q^-1(p) needs 0 < p < 1, got " + std::to_string(p));
  }
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

struct TracyWidomOptions {
  double t_min = -10.0;
  double t_max = 6.0;
  /// Spacing of the tabulated abscissae.
  double step = 0.01;
  /// Relative tolerance of the adaptive Dormand-Prince integration.
  double ode_tol = 1e-17;
  /// Where the Airy boundary condition is imposed.
  double u_start = 10.0;
  /// Quadrature spacing for the double integral (never coarser than `step`).
  double quad_step = 1e-3;
};

/// F1 sampled on a uniform grid; strictly increasing cdf values.
struct TracyWidomTable {
  std::vector<double> grid;
  std::vector<double> cdf;
  TracyWidomOptions options;
};

namespace detail {

// Leading terms of the Hastings-McLeod asymptote as u -> -infinity.
inline double hastings_mcleod_asymptote(double u) {
  const double u3 = u * u * u;
  return std::sqrt(-u / 2.0) * (1.0 + 1.0 / (8.0 * u3) - 73.0 / (128.0 * u3 * u3));
}

}  // namespace detail

/**
 * Tabulates F1(t) = exp(-1/2 int_t^inf [q(u) + (u - t) q(u)^2] du), where q
 * solves q'' = u q + 2 q^3 with q(u) ~ Ai(u) as u -> +inf.
 *
 * The Hastings-McLeod solution is unstable when integrated toward negative u
 * (perturbations grow like exp(0.94 |u|^1.5)), so the integration runs in
 * long double from u_start, far enough out that Ai and the true solution
 * agree to extended precision. Above u_start q is taken as Ai itself. The
 * double integral is a cumulative trapezoid rule on the quadrature grid.
 */
inline TracyWidomTable build_tw_table(const TracyWidomOptions& opt = {}) {
  if (!(opt.t_min < -6.0)) throw DomainError("Tracy-Widom table needs t_min < -6");
  if (!(opt.t_max > 5.0)) throw DomainError("Tracy-Widom table needs t_max > 5");
  if (!(opt.step > 0.0 && opt.step <= 0.05)) {
    throw DomainError("Tracy-Widom table step must lie in (0, 0.05]");
  }
  if (!(opt.ode_tol > 0.0)) throw DomainError("ODE tolerance must be positive");
  if (!(opt.u_start > 0.0)) throw DomainError("boundary point must be positive");
  if (!(opt.quad_step > 0.0)) throw DomainError("quadrature step must be positive");

  using Real = long double;
  using State = std::array<Real, 2>;

  const long substeps = std::max(1L, static_cast<long>(std::ceil(opt.step / opt.quad_step - 1e-9)));
  const Real h = static_cast<Real>(opt.step) / static_cast<Real>(substeps);
  const long table_points = static_cast<long>(std::floor((opt.t_max - opt.t_min) / opt.step + 1e-9)) + 1;
  // Airy tail beyond the table and the boundary point, where q < 1e-20.
  const Real top = std::max<Real>(opt.t_max, opt.u_start) + 8.0L;
  const long fine_points = static_cast<long>(std::ceil((top - opt.t_min) / h)) + 1;

  std::vector<Real> u(static_cast<std::size_t>(fine_points));
  for (long k = 0; k < fine_points; ++k) u[k] = static_cast<Real>(opt.t_min) + h * static_cast<Real>(k);

  std::vector<Real> q(u.size(), 0.0L);
  std::vector<Real> ode_times{static_cast<Real>(opt.u_start)};
  std::vector<long> ode_index{-1};
  for (long k = fine_points - 1; k >= 0; --k) {
    if (u[k] >= opt.u_start) {
      q[k] = boost::math::airy_ai(u[k]);
    } else {
      ode_times.push_back(u[k]);
      ode_index.push_back(k);
    }
  }

  namespace odeint = boost::numeric::odeint;
  const Real u0 = static_cast<Real>(opt.u_start);
  State state{boost::math::airy_ai(u0), boost::math::airy_ai_prime(u0)};
  auto painleve = [](const State& s, State& ds, Real x) {
    ds[0] = s[1];
    ds[1] = x * s[0] + 2.0L * s[0] * s[0] * s[0];
  };
  auto stepper = odeint::make_dense_output(static_cast<Real>(1e-30), static_cast<Real>(opt.ode_tol),
                                           odeint::runge_kutta_dopri5<State, Real, State, Real>());
  std::size_t observed = 0;
  auto observer = [&](const State& s, Real x) {
    const std::size_t slot = observed++;
    const double qd = static_cast<double>(s[0]);
    const double ud = static_cast<double>(x);
    if (!std::isfinite(qd) || std::abs(qd) > 1e3) {
      throw GenerationError("Painleve II solution diverged at u=" + std::to_string(ud) +
                            " (q=" + std::to_string(qd) + ")");
    }
    if (ud <= -4.0) {
      const double expected = detail::hastings_mcleod_asymptote(ud);
      if (std::abs(qd - expected) > 0.05 * expected) {
        throw GenerationError("Painleve II solution left the Hastings-McLeod branch at u=" +
                              std::to_string(ud) + " (q=" + std::to_string(qd) +
                              ", asymptote " + std::to_string(expected) + ")");
      }
    }
    if (slot > 0) q[ode_index[slot]] = s[0];
  };
  odeint::integrate_times(stepper, painleve, state, ode_times.begin(), ode_times.end(), -h, observer);

  // Cumulative integrals from the top of the grid down to u_k.
  std::vector<Real> int_q(u.size(), 0.0L), int_q2(u.size(), 0.0L), int_uq2(u.size(), 0.0L);
  for (long k = fine_points - 2; k >= 0; --k) {
    const Real a = q[k], b = q[k + 1];
    int_q[k] = int_q[k + 1] + 0.5L * h * (a + b);
    int_q2[k] = int_q2[k + 1] + 0.5L * h * (a * a + b * b);
    int_uq2[k] = int_uq2[k + 1] + 0.5L * h * (u[k] * a * a + u[k + 1] * b * b);
  }

  TracyWidomTable table;
  table.options = opt;
  table.grid.reserve(static_cast<std::size_t>(table_points));
  table.cdf.reserve(static_cast<std::size_t>(table_points));
  for (long i = 0; i < table_points; ++i) {
    const long k = i * substeps;
    const Real t = u[k];
    const Real exponent = -0.5L * (int_q[k] + int_uq2[k] - t * int_q2[k]);
    table.grid.push_back(opt.t_min + static_cast<double>(i) * opt.step);
    table.cdf.push_back(static_cast<double>(std::exp(exponent)));
  }
  for (std::size_t i = 1; i < table.cdf.size(); ++i) {
    if (!(table.cdf[i] > table.cdf[i - 1])) {
      throw GenerationError("Tracy-Widom cdf not strictly increasing at t=" +
                            std::to_string(table.grid[i]));
    }
  }
  return table;
}

inline TracyWidomTable build_tw_table(double t_min, double t_max, double step, double ode_tol) {
  TracyWidomOptions opt;
  opt.t_min = t_min;
  opt.t_max = t_max;
  opt.step = step;
  opt.ode_tol = ode_tol;
  return build_tw_table(opt);
}

/// Table with the default options, generated once per process.
inline const TracyWidomTable& default_tw_table() {
  static const TracyWidomTable table = build_tw_table();
  return table;
}

inline constexpr double kTwTailProbability = 1e-12;

/// F1(t), linearly interpolated and clamped to [1e-12, 1 - 1e-12].
inline double tw_cdf(const TracyWidomTable& table, double t) {
  if (table.grid.size() < 2) throw DimensionError("Tracy-Widom table is empty");
  double value;
  if (t <= table.grid.front()) {
    value = kTwTailProbability;
  } else if (t >= table.grid.back()) {
    value = 1.0 - kTwTailProbability;
  } else {
    const auto it = std::upper_bound(table.grid.begin(), table.grid.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - table.grid.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - table.grid[lo]) / (table.grid[hi] - table.grid[lo]);
    value = table.cdf[lo] + w * (table.cdf[hi] - table.cdf[lo]);
  }
  return std::clamp(value, kTwTailProbability, 1.0 - kTwTailProbability);
}

inline double tw_cdf(double t) { return tw_cdf(default_tw_table(), t); }

/// F1^-1(p) by bisection on tw_cdf to 1e-6 in t.
inline double tw_quantile(const TracyWidomTable& table, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("Tracy-Widom quantile needs 0 < p < 1, got " + std::to_string(p));
  }
  double lo = table.grid.front();
  double hi = table.grid.back();
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (tw_cdf(table, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double tw_quantile(double p) { return tw_quantile(default_tw_table(), p); }

/**
 * Text form of a table:
 *
 *   # eigsense tracy-widom-f1 v1
 *   # t_min=<> t_max=<> step=<> ode_tol=<> u_start=<> quad_step=<>
 *   # columns: t F1
 *   <t> <F1>
 *
 * Numbers use the shortest representation that round-trips.
 */
inline void write_tw_table(const TracyWidomTable& table, std::ostream& out) {
  auto fmt = [](double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
  };
  const auto& o = table.options;
  out << "# eigsense tracy-widom-f1 v1\n";
  out << "# t_min=" << fmt(o.t_min) << " t_max=" << fmt(o.t_max) << " step=" << fmt(o.step)
      << " ode_tol=" << fmt(o.ode_tol) << " u_start=" << fmt(o.u_start)
      << " quad_step=" << fmt(o.quad_step) << "\n";
  out << "# columns: t F1\n";
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    out << fmt(table.grid[i]) << ' ' << fmt(table.cdf[i]) << '\n';
  }
}

inline TracyWidomTable read_tw_table(std::istream& in) {
  TracyWidomTable table;
  std::string line;
  if (!std::getline(in, line) || line != "# eigsense tracy-widom-f1 v1") {
    throw IoError("not a Tracy-Widom table (bad header line)");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream fields(line.substr(1));
      std::string kv;
      while (fields >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        const double value = std::stod(kv.substr(eq + 1));
        if (key == "t_min") table.options.t_min = value;
        else if (key == "t_max") table.options.t_max = value;
        else if (key == "step") table.options.step = value;
        else if (key == "ode_tol") table.options.ode_tol = value;
        else if (key == "u_start") table.options.u_start = value;
        else if (key == "quad_step") table.options.quad_step = value;
      }
      continue;
    }
    std::istringstream row(line);
    double t = 0.0, f = 0.0;
    if (!(row >> t >> f)) throw IoError("malformed Tracy-Widom table row: " + line);
    if (!table.grid.empty() && !(t > table.grid.back() && f > table.cdf.back())) {
      throw IoError("Tracy-Widom table rows must be strictly increasing in t and F1");
    }
    table.grid.push_back(t);
    table.cdf.push_back(f);
  }
  if (table.grid.size() < 2) throw IoError("Tracy-Widom table has fewer than two rows");
  return table;
}

/// Centering and scaling of the largest eigenvalue of Ns R / sigma^2 for
/// real white noise, plus the aspect ratio y = ML/Ns.
struct WishartGeometry {
  Index samples = 0;
  Index dimension = 0;
  double mu = 0.0;
  double nu = 0.0;
  double y = 0.0;
};

inline WishartGeometry wishart_geometry(Index samples, Index channels, Index smoothing) {
  if (channels < 1 || smoothing < 1) throw DimensionError("need M >= 1 and L >= 1");
  const Index dim = channels * smoothing;
  if (samples <= dim) {
    throw RegimeError("need Ns > ML, got Ns=" + std::to_string(samples) +
                      ", ML=" + std::to_string(dim));
  }
  const double a = std::sqrt(static_cast<double>(samples - 1));
  const double b = std::sqrt(static_cast<double>(dim));
  WishartGeometry g;
  g.samples = samples;
  g.dimension = dim;
  g.mu = (a + b) * (a + b);
  g.nu = (a + b) * std::cbrt(1.0 / a + 1.0 / b);
  g.y = static_cast<double>(dim) / static_cast<double>(samples);
  return g;
}

/// Almost-sure limit of the smallest white-noise sample-covariance eigenvalue.
inline double bai_yin_lambda_min(double sigma2, double y) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("sigma^2 must be positive");
  if (!(y > 0.0 && y < 1.0)) throw DomainError("aspect ratio y must lie in (0, 1)");
  const double r = 1.0 - std::sqrt(y);
  return sigma2 * r * r;
}

}  // namespace eigsense
