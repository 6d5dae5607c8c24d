#include "spectra/convex_approx.hpp"

#include <cmath>
#include <stdexcept>

namespace spectra {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

ConvexApprox build_approx(const Scenario& sc,
                          const SpectrumAllocation& expansion_point) {
  if (expansion_point.n_tones() != sc.n_tones)
    throw std::invalid_argument("build_approx: expansion point tone count");
  if (!within_box(sc, expansion_point, 1e-9))
    throw std::invalid_argument("build_approx: expansion point outside box");

  const int n = sc.n_users;
  const double gamma = sc.constants.snr_gap;
  ConvexApprox approx;
  approx.a.reserve(static_cast<std::size_t>(sc.n_tones));
  approx.c_off.reserve(static_cast<std::size_t>(sc.n_tones));
  approx.gains_mod.reserve(static_cast<std::size_t>(sc.n_tones));
  approx.expansion_point = expansion_point;

  for (int k = 0; k < sc.n_tones; ++k) {
    const ToneChannel& ch = sc.tones[static_cast<std::size_t>(k)];
    const Eigen::VectorXd& s0 = expansion_point.tones[static_cast<std::size_t>(k)];

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd c_off(n);
    Eigen::MatrixXd mod = ch.gains_sq;
    for (int rx = 0; rx < n; ++rx) {
      // Interference-plus-noise at the expansion point, receiver rx.
      double interf = ch.noise_mw(rx);
      for (int m = 0; m < n; ++m) {
        if (m != rx) interf += ch.gains_sq(rx, m) * s0(m);
      }
      double tangent = 0.0;
      for (int m = 0; m < n; ++m) {
        if (m == rx) continue;
        mod(rx, m) *= gamma;
        a(m, rx) = ch.gains_sq(rx, m) / (kLn2 * interf);
        tangent += a(m, rx) * s0(m);
      }
      c_off(rx) = std::log2(gamma * interf) - tangent;
    }
    approx.a.push_back(std::move(a));
    approx.c_off.push_back(std::move(c_off));
    approx.gains_mod.push_back(std::move(mod));
  }
  return approx;
}

double surrogate_objective(const Scenario& sc, const ConvexApprox& approx,
                           int tone_index, const Eigen::VectorXd& s) {
  return surrogate_pertone_objective(make_tone_ref(sc, tone_index),
                                     approx.slice(tone_index), s);
}

Eigen::VectorXd surrogate_gradient(const Scenario& sc,
                                   const ConvexApprox& approx, int tone_index,
                                   const Eigen::VectorXd& s) {
  const int n = sc.n_users;
  if (s.size() != n)
    throw std::invalid_argument("surrogate_gradient: allocation size");
  const Eigen::MatrixXd& mod = approx.gains_mod[static_cast<std::size_t>(tone_index)];
  const Eigen::MatrixXd& a = approx.a[static_cast<std::size_t>(tone_index)];
  const ToneChannel& ch = sc.tones[static_cast<std::size_t>(tone_index)];
  const double gamma = sc.constants.snr_gap;
  const double fs = sc.constants.symbol_rate_hz;

  // X^n = Σ_m |h̃^{n,m}|² s^m + Γσ^n for every receiver.
  Eigen::VectorXd x = mod * s + gamma * ch.noise_mw;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    double d = 0.0;
    for (int rx = 0; rx < n; ++rx) {
      const double w = sc.weights(rx);
      if (w == 0.0) continue;
      d += w * mod(rx, j) / (kLn2 * x(rx));
      if (rx != j) d -= w * a(j, rx);
    }
    grad(j) = fs * d;
  }
  return grad;
}

double surrogate_total(const Scenario& sc, const ConvexApprox& approx,
                       const SpectrumAllocation& alloc) {
  double acc = 0.0;
  for (int k = 0; k < sc.n_tones; ++k) {
    acc += surrogate_objective(sc, approx, k,
                               alloc.tones[static_cast<std::size_t>(k)]);
  }
  return acc;
}

SpectrumAllocation flat_start(const Scenario& sc) {
  SpectrumAllocation alloc;
  alloc.tones.reserve(static_cast<std::size_t>(sc.n_tones));
  for (int k = 0; k < sc.n_tones; ++k) {
    Eigen::VectorXd s = sc.box_max(k);
    for (int u = 0; u < sc.n_users; ++u) {
      s(u) = std::min(s(u), sc.budget_mw(u) / sc.n_tones);
    }
    alloc.tones.push_back(std::move(s));
  }
  return alloc;
}

}  // namespace spectra
