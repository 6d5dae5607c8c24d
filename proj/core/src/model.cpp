#include "spectra/model.hpp"

#include <cmath>
#include <stdexcept>

namespace spectra {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void PhysicalConstants::validate() const {
  require(snr_gap >= 1.0, "constants: snr_gap must be >= 1 (linear)");
  require(tone_spacing_hz > 0.0, "constants: tone_spacing_hz must be > 0");
  require(symbol_rate_hz > 0.0, "constants: symbol_rate_hz must be > 0");
}

void ToneChannel::validate() const {
  require(gains_sq.rows() == gains_sq.cols(), "tone: gains_sq must be square");
  require(noise_mw.size() == gains_sq.rows(),
          "tone: noise length must match gains dimension");
  require((gains_sq.array() >= 0.0).all(), "tone: gains_sq must be >= 0");
  require((gains_sq.diagonal().array() > 0.0).all(),
          "tone: direct gains must be > 0");
  require((noise_mw.array() > 0.0).all(), "tone: noise must be > 0");
}

Eigen::VectorXd SpectrumAllocation::user_totals() const {
  if (tones.empty()) return Eigen::VectorXd();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(tones.front().size());
  for (const auto& s : tones) total += s;
  return total;
}

void Scenario::validate() const {
  require(n_users >= 1, "scenario: need at least one user");
  require(n_tones >= 1, "scenario: need at least one tone");
  require(static_cast<int>(tones.size()) == n_tones,
          "scenario: tone count mismatch");
  require(weights.size() == n_users, "scenario: weights length mismatch");
  require(budget_mw.size() == n_users, "scenario: budget length mismatch");
  require(mask_mw.rows() == n_tones && mask_mw.cols() == n_users,
          "scenario: mask must be K x N");
  require((weights.array() >= 0.0).all(), "scenario: weights must be >= 0");
  require((budget_mw.array() > 0.0).all(), "scenario: budgets must be > 0");
  require((mask_mw.array() >= 0.0).all(), "scenario: masks must be >= 0");
  constants.validate();
  for (const auto& t : tones) {
    t.validate();
    require(t.gains_sq.rows() == n_users, "scenario: tone dimension mismatch");
  }
}

Eigen::VectorXd Scenario::box_max(int k) const {
  return mask_mw.row(k).transpose().cwiseMin(budget_mw);
}

Eigen::VectorXd Scenario::box_totals() const {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n_users);
  for (int k = 0; k < n_tones; ++k) total += box_max(k);
  return total;
}

SpectrumAllocation Scenario::zero_allocation() const {
  SpectrumAllocation alloc;
  alloc.tones.assign(n_tones, Eigen::VectorXd::Zero(n_users));
  return alloc;
}

double bit_loading(const ToneChannel& tone, const ToneAllocation& power_mw,
                   int user, const PhysicalConstants& constants) {
  const int n = static_cast<int>(power_mw.size());
  double interference = 0.0;
  for (int m = 0; m < n; ++m) {
    if (m != user) interference += tone.gains_sq(user, m) * power_mw(m);
  }
  const double sinr = tone.gains_sq(user, user) * power_mw(user) /
                      (constants.snr_gap * (interference + tone.noise_mw(user)));
  return std::log2(1.0 + sinr);
}

double user_rate(const Scenario& sc, const SpectrumAllocation& alloc, int user) {
  double bits = 0.0;
  for (int k = 0; k < sc.n_tones; ++k) {
    bits += bit_loading(sc.tones[k], alloc.tones[k], user, sc.constants);
  }
  return sc.constants.symbol_rate_hz * bits;
}

double weighted_rate_sum(const Scenario& sc, const SpectrumAllocation& alloc) {
  double sum = 0.0;
  for (int n = 0; n < sc.n_users; ++n) {
    sum += sc.weights(n) * user_rate(sc, alloc, n);
  }
  return sum;
}

bool within_box(const Scenario& sc, const SpectrumAllocation& alloc,
                double slack) {
  if (alloc.n_tones() != sc.n_tones) return false;
  for (int k = 0; k < sc.n_tones; ++k) {
    const auto& s = alloc.tones[k];
    if (s.size() != sc.n_users) return false;
    for (int n = 0; n < sc.n_users; ++n) {
      if (s(n) < -slack || s(n) > sc.mask_mw(k, n) + slack) return false;
    }
  }
  return true;
}

Eigen::VectorXd budget_violation(const Scenario& sc,
                                 const SpectrumAllocation& alloc) {
  return (alloc.user_totals() - sc.budget_mw).cwiseMax(0.0);
}

}  // namespace spectra
