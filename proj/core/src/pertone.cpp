#include "spectra/pertone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace spectra {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_lambda(const Eigen::VectorXd& lambda, int n) {
  require(lambda.size() == n, "pertone: lambda size mismatch");
  require((lambda.array() >= 0.0).all(), "pertone: negative multiplier");
}

// Interference-plus-noise seen by `user`, scaled by Γ:
// Γ(Σ_{m≠n} |h^{n,m}|² s^m + σ^n).
double gamma_interference(const ToneRef& t, const Eigen::VectorXd& s,
                          int user) {
  const Eigen::MatrixXd& g = t.channel->gains_sq;
  double acc = t.channel->noise_mw(user);
  for (int m = 0; m < t.n_users(); ++m) {
    if (m != user) acc += g(user, m) * s(m);
  }
  return t.constants->snr_gap * acc;
}

// Modified gain |h̃^{n,m}|²: diagonal untouched, off-diagonal scaled by Γ.
double gain_mod(const ToneRef& t, int n, int m) {
  const double g = t.channel->gains_sq(n, m);
  return n == m ? g : t.constants->snr_gap * g;
}

// X^n(s) = Σ_m |h̃^{n,m}|² s^m + Γσ^n, the argument of the surrogate log.
double x_mod(const ToneRef& t, const Eigen::VectorXd& s, int n) {
  double acc = t.constants->snr_gap * t.channel->noise_mw(n);
  for (int m = 0; m < t.n_users(); ++m) acc += gain_mod(t, n, m) * s(m);
  return acc;
}

double prox_term(const ProxConfig& prox, const Eigen::VectorXd& s) {
  return prox.enabled ? 0.5 * prox.smoothness_c * s.squaredNorm() : 0.0;
}

}  // namespace

ProxConfig ProxConfig::with_c(double c) {
  require(c >= 0.0, "ProxConfig: smoothness parameter must be >= 0");
  ProxConfig p;
  p.enabled = c > 0.0;
  p.smoothness_c = c;
  return p;
}

ToneRef make_tone_ref(const Scenario& sc, int tone_index) {
  require(tone_index >= 0 && tone_index < sc.n_tones,
          "make_tone_ref: tone index out of range");
  ToneRef t;
  t.channel = &sc.tones[static_cast<std::size_t>(tone_index)];
  t.weights = &sc.weights;
  t.constants = &sc.constants;
  t.box = sc.box_max(tone_index);
  return t;
}

double pertone_objective(const ToneRef& t, const Eigen::VectorXd& s) {
  const int n_users = t.n_users();
  require(s.size() == n_users, "pertone_objective: allocation size mismatch");
  const Eigen::MatrixXd& g = t.channel->gains_sq;
  double bits = 0.0;
  for (int n = 0; n < n_users; ++n) {
    const double w = (*t.weights)(n);
    if (w == 0.0 || s(n) == 0.0) continue;
    bits += w * std::log2(1.0 + g(n, n) * s(n) / gamma_interference(t, s, n));
  }
  return t.constants->symbol_rate_hz * bits;
}

double pertone_lagrangian(const ToneRef& t, const Eigen::VectorXd& s,
                          const Eigen::VectorXd& lambda,
                          const ProxConfig& prox) {
  check_lambda(lambda, t.n_users());
  return pertone_objective(t, s) - lambda.dot(s) - prox_term(prox, s);
}

PerToneSolution solve_exhaustive(const ToneRef& t, const PowerGrid& grid,
                                 const Eigen::VectorXd& lambda,
                                 const ProxConfig& prox,
                                 const TieConfig& ties) {
  const int n = t.n_users();
  require(grid.n_users() == n, "solve_exhaustive: grid size mismatch");
  check_lambda(lambda, n);
  const std::uint64_t combos = grid.combinations();
  if (combos > ties.max_points) {
    throw std::invalid_argument(
        "solve_exhaustive: grid has " + std::to_string(combos) +
        " points, exceeding the cap of " + std::to_string(ties.max_points) +
        "; coarsen the grid or raise the cap");
  }

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd s(n);

  // Pass 1: maximum value; earliest lexicographic argmax wins.
  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_s = Eigen::VectorXd::Zero(n);
  bool first = true;
  while (next_grid_point(grid, idx, first)) {
    first = false;
    s = grid_point(grid, idx);
    const double v = pertone_lagrangian(t, s, lambda, prox);
    if (v > best) {
      best = v;
      best_s = s;
    }
  }

  // Pass 2: collect ties within the relative tolerance, enumeration order.
  const double threshold = best - ties.rel_tol * std::abs(best);
  PerToneSolution out;
  out.best = best_s;
  out.value = best;
  first = true;
  while (next_grid_point(grid, idx, first)) {
    first = false;
    s = grid_point(grid, idx);
    if (pertone_lagrangian(t, s, lambda, prox) >= threshold) {
      out.optima.push_back(s);
    }
  }
  return out;
}

PerToneSolution solve_coordinate_descent(const ToneRef& t,
                                         const PowerGrid& grid,
                                         const Eigen::VectorXd& lambda,
                                         const ProxConfig& prox,
                                         const Eigen::VectorXd* start,
                                         int max_sweeps) {
  const int n = t.n_users();
  require(grid.n_users() == n, "solve_coordinate_descent: grid size mismatch");
  check_lambda(lambda, n);

  Eigen::VectorXd s = start ? *start : Eigen::VectorXd::Zero(n);
  require(s.size() == n, "solve_coordinate_descent: start size mismatch");
  double value = pertone_lagrangian(t, s, lambda, prox);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (int u = 0; u < n; ++u) {
      const double keep = s(u);
      double best_level = keep;
      double best_value = value;
      for (double level : grid.levels[static_cast<std::size_t>(u)]) {
        if (level == keep) continue;
        s(u) = level;
        const double v = pertone_lagrangian(t, s, lambda, prox);
        if (v > best_value) {
          best_value = v;
          best_level = level;
        }
      }
      s(u) = best_level;
      if (best_level != keep) {
        value = best_value;
        moved = true;
      }
    }
    if (!moved) break;
  }

  PerToneSolution out;
  out.best = s;
  out.value = value;
  out.optima.push_back(s);
  return out;
}

double fixed_point_update(const ToneRef& t, const Eigen::VectorXd& s_prev,
                          const Eigen::VectorXd& lambda,
                          const ProxConfig& prox, const ApproxSlice& approx,
                          int user) {
  const int n_users = t.n_users();
  require(user >= 0 && user < n_users, "fixed_point_update: bad user index");
  require(s_prev.size() == n_users, "fixed_point_update: allocation mismatch");
  check_lambda(lambda, n_users);

  const Eigen::MatrixXd& g = t.channel->gains_sq;
  const Eigen::VectorXd& w = *t.weights;
  const double gamma = t.constants->snr_gap;
  const double fs = t.constants->symbol_rate_hz;

  double denom = lambda(user) + prox.c() * s_prev(user);
  for (int m = 0; m < n_users; ++m) {
    if (m == user) continue;
    // a^{user,m}: frozen surrogate coefficient, or rebuilt at s_prev.
    double a_um;
    if (approx.direct()) {
      double rx = t.channel->noise_mw(m);
      for (int p = 0; p < n_users; ++p) {
        if (p != m) rx += g(m, p) * s_prev(p);
      }
      a_um = g(m, user) / (kLn2 * rx);  // Γ cancels top and bottom
    } else {
      a_um = (*approx.a)(user, m);
    }
    denom += w(m) * fs * a_um;
    denom -= w(m) * fs * gamma * g(m, user) / (kLn2 * x_mod(t, s_prev, m));
  }
  // A non-positive denominator prices this user's power at zero or less
  // (no budget pressure and no net interference penalty), so its demand
  // is unbounded and the update saturates the box.
  if (denom <= 0.0) return t.box(user);

  const double val = w(user) * fs / (kLn2 * denom) -
                     gamma_interference(t, s_prev, user) / g(user, user);
  return std::clamp(val, 0.0, t.box(user));
}

namespace {

double solution_value(const ToneRef& t, const ApproxSlice& approx,
                      const Eigen::VectorXd& s, const Eigen::VectorXd& lambda,
                      const ProxConfig& prox) {
  return approx.direct() ? pertone_lagrangian(t, s, lambda, prox)
                         : surrogate_pertone_lagrangian(t, approx, s, lambda, prox);
}

// Gauss-Seidel sweeps; optionally stops early once an entire sweep moves
// no coordinate by more than `exit_tol` (absolute, mW).
Eigen::VectorXd fixed_point_sweeps(const ToneRef& t,
                                   const Eigen::VectorXd& lambda,
                                   const ProxConfig& prox,
                                   const ApproxSlice& approx, int sweeps,
                                   Eigen::VectorXd s, double exit_tol) {
  for (int it = 0; it < sweeps; ++it) {
    double max_delta = 0.0;
    for (int u = 0; u < t.n_users(); ++u) {
      const double next = fixed_point_update(t, s, lambda, prox, approx, u);
      max_delta = std::max(max_delta, std::abs(next - s(u)));
      s(u) = next;
    }
    if (exit_tol > 0.0 && max_delta <= exit_tol) break;
  }
  return s;
}

}  // namespace

PerToneSolution solve_fixed_point(const ToneRef& t,
                                  const Eigen::VectorXd& lambda,
                                  const ProxConfig& prox,
                                  const ApproxSlice& approx, int inner_iters,
                                  const Eigen::VectorXd* start) {
  require(inner_iters >= 0, "solve_fixed_point: negative iteration count");
  Eigen::VectorXd s0 = start ? *start : Eigen::VectorXd::Zero(t.n_users());
  require(s0.size() == t.n_users(), "solve_fixed_point: start size mismatch");

  PerToneSolution out;
  out.best = fixed_point_sweeps(t, lambda, prox, approx, inner_iters,
                                std::move(s0), /*exit_tol=*/0.0);
  out.value = solution_value(t, approx, out.best, lambda, prox);
  out.optima.push_back(out.best);
  return out;
}

PerToneSolution solve_multistart_fixed_point(const ToneRef& t,
                                             const Eigen::VectorXd& lambda,
                                             const ProxConfig& prox,
                                             const ApproxSlice& approx,
                                             int inner_iters,
                                             double tie_rel_tol) {
  const int n = t.n_users();
  check_lambda(lambda, n);

  // Deterministic start set: half-box flat point, then each user alone at
  // its box maximum.
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(0.5 * t.box);
  for (int u = 0; u < n; ++u) {
    Eigen::VectorXd one = Eigen::VectorXd::Zero(n);
    one(u) = t.box(u);
    starts.push_back(std::move(one));
  }

  const double exit_tol = 1e-13 * (1.0 + t.box.maxCoeff());
  std::vector<Eigen::VectorXd> ends;
  std::vector<double> values;
  double best = -std::numeric_limits<double>::infinity();
  int best_at = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    Eigen::VectorXd s = fixed_point_sweeps(t, lambda, prox, approx,
                                           inner_iters, starts[i], exit_tol);
    const double v = solution_value(t, approx, s, lambda, prox);
    if (v > best) {
      best = v;
      best_at = static_cast<int>(ends.size());
    }
    ends.push_back(std::move(s));
    values.push_back(v);
  }

  PerToneSolution out;
  out.best = ends[static_cast<std::size_t>(best_at)];
  out.value = best;
  const double threshold = best - tie_rel_tol * std::abs(best);
  const double dup_tol = 1e-9 * (1.0 + t.box.maxCoeff());
  for (std::size_t i = 0; i < ends.size(); ++i) {
    if (values[i] < threshold) continue;
    bool dup = false;
    for (const auto& kept : out.optima) {
      if ((ends[i] - kept).cwiseAbs().maxCoeff() <= dup_tol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.optima.push_back(ends[i]);
  }
  return out;
}

double surrogate_pertone_objective(const ToneRef& t, const ApproxSlice& approx,
                                   const Eigen::VectorXd& s) {
  require(!approx.direct() && approx.c_off != nullptr,
          "surrogate_pertone_objective: frozen approximation required");
  const int n_users = t.n_users();
  require(s.size() == n_users, "surrogate_pertone_objective: size mismatch");
  const Eigen::VectorXd& w = *t.weights;
  const double fs = t.constants->symbol_rate_hz;

  double acc = 0.0;
  for (int n = 0; n < n_users; ++n) {
    if (w(n) == 0.0) continue;
    double linear = (*approx.c_off)(n);
    for (int m = 0; m < n_users; ++m) {
      if (m != n) linear += (*approx.a)(m, n) * s(m);
    }
    acc += w(n) * fs * (std::log2(x_mod(t, s, n)) - linear);
  }
  return acc;
}

double surrogate_pertone_lagrangian(const ToneRef& t, const ApproxSlice& approx,
                                    const Eigen::VectorXd& s,
                                    const Eigen::VectorXd& lambda,
                                    const ProxConfig& prox) {
  check_lambda(lambda, t.n_users());
  return surrogate_pertone_objective(t, approx, s) - lambda.dot(s) -
         prox_term(prox, s);
}

PerToneSolution solve_concave_exact(const ToneRef& t,
                                    const Eigen::VectorXd& lambda,
                                    const ProxConfig& prox,
                                    const ApproxSlice& approx, double tol,
                                    int max_sweeps) {
  require(!approx.direct(),
          "solve_concave_exact: frozen approximation required");
  const int n = t.n_users();
  check_lambda(lambda, n);
  const Eigen::VectorXd& w = *t.weights;
  const double fs = t.constants->symbol_rate_hz;
  const double c = prox.c();

  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  const double exit_tol = tol * (1.0 + t.box.maxCoeff());

  // ∂/∂s_j of the surrogate Lagrangian, as a function of s_j = x with the
  // other coordinates held at `s`. Strictly decreasing in x.
  const auto derivative = [&](int j, double x) {
    double d = -lambda(j) - c * x;
    for (int m = 0; m < n; ++m) {
      if (m != j) d -= w(m) * fs * (*approx.a)(j, m);
    }
    for (int nn = 0; nn < n; ++nn) {
      if (w(nn) == 0.0) continue;
      const double gj = gain_mod(t, nn, j);
      if (gj == 0.0) continue;
      double base = t.constants->snr_gap * t.channel->noise_mw(nn);
      for (int p = 0; p < n; ++p) {
        if (p != j) base += gain_mod(t, nn, p) * s(p);
      }
      d += w(nn) * fs * gj / (kLn2 * (base + gj * x));
    }
    return d;
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (int j = 0; j < n; ++j) {
      double next;
      if (derivative(j, 0.0) <= 0.0) {
        next = 0.0;
      } else if (derivative(j, t.box(j)) >= 0.0) {
        next = t.box(j);
      } else {
        double lo = 0.0, hi = t.box(j);
        for (int b = 0; b < 100 && hi - lo > tol * t.box(j); ++b) {
          const double mid = 0.5 * (lo + hi);
          (derivative(j, mid) > 0.0 ? lo : hi) = mid;
        }
        next = 0.5 * (lo + hi);
      }
      max_delta = std::max(max_delta, std::abs(next - s(j)));
      s(j) = next;
    }
    if (max_delta <= exit_tol) break;
  }

  PerToneSolution out;
  out.best = s;
  out.value = surrogate_pertone_lagrangian(t, approx, s, lambda, prox);
  out.optima.push_back(s);
  return out;
}

}  // namespace spectra
