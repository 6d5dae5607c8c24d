// Model-layer tests: bit loading, rates, boxes, feasibility helpers.
//
// Expected numbers are computed by hand (independent arithmetic spelled
// out at the assertion site) rather than by calling back into the
// library, so a regression in the formulas cannot hide itself.

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "spectra/model.hpp"
#include "test_util.hpp"

namespace spectra {
namespace {

Scenario tiny_two_user() {
  // 2 users, 2 tones, every number chosen so SINRs are exact decimals.
  Scenario sc;
  sc.n_users = 2;
  sc.n_tones = 2;
  sc.constants.snr_gap = 2.0;  // 3.01 dB gap
  sc.constants.tone_spacing_hz = 10.0;
  sc.constants.symbol_rate_hz = 100.0;
  sc.weights = Eigen::VectorXd(2);
  sc.weights << 0.25, 0.75;
  sc.budget_mw = Eigen::VectorXd(2);
  sc.budget_mw << 4.0, 6.0;
  sc.mask_mw = Eigen::MatrixXd(2, 2);
  sc.mask_mw << 3.0, 10.0,  // tone 0: user 0 mask-limited, user 1 budget-limited
      5.0, 0.5;             // tone 1
  sc.tones.resize(2);
  for (auto& t : sc.tones) {
    t.gains_sq = Eigen::MatrixXd(2, 2);
    t.gains_sq << 1.0, 0.25,  // row = receiver, col = transmitter
        0.125, 0.5;
    t.noise_mw = Eigen::VectorXd(2);
    t.noise_mw << 0.5, 0.25;
  }
  sc.validate();
  return sc;
}

TEST(Model, BitLoadingMatchesHandComputation) {
  Scenario sc = tiny_two_user();
  ToneAllocation s(2);
  s << 2.0, 1.0;

  // User 0: signal 1.0*2.0 = 2.0, interference 0.25*1.0 = 0.25,
  // denominator Gamma*(I + noise) = 2*(0.25 + 0.5) = 1.5,
  // b = log2(1 + 2/1.5) = log2(7/3).
  EXPECT_NEAR(bit_loading(sc.tones[0], s, 0, sc.constants),
              std::log2(7.0 / 3.0), 1e-15);

  // User 1: signal 0.5*1.0, interference 0.125*2.0 = 0.25,
  // denominator 2*(0.25 + 0.25) = 1.0, b = log2(1.5).
  EXPECT_NEAR(bit_loading(sc.tones[0], s, 1, sc.constants), std::log2(1.5),
              1e-15);
}

TEST(Model, BitLoadingZeroPowerIsZeroBits) {
  Scenario sc = tiny_two_user();
  ToneAllocation s = Eigen::VectorXd::Zero(2);
  EXPECT_EQ(bit_loading(sc.tones[0], s, 0, sc.constants), 0.0);
  s << 0.0, 3.0;  // other-user power alone still gives this user zero bits
  EXPECT_EQ(bit_loading(sc.tones[0], s, 0, sc.constants), 0.0);
}

TEST(Model, BitLoadingMonotoneInOwnPowerDecreasingInInterference) {
  Scenario sc = testing::random_instance(3, 1, 71);
  ToneAllocation s = testing::random_box_point(sc, 0, 72);
  const double base = bit_loading(sc.tones[0], s, 1, sc.constants);
  ToneAllocation up = s;
  up(1) *= 1.5;
  EXPECT_GT(bit_loading(sc.tones[0], up, 1, sc.constants), base);
  ToneAllocation noisy = s;
  noisy(0) *= 2.0;
  EXPECT_LT(bit_loading(sc.tones[0], noisy, 1, sc.constants), base);
}

TEST(Model, UserRateAndWeightedSum) {
  Scenario sc = tiny_two_user();
  SpectrumAllocation alloc;
  alloc.tones = {Eigen::VectorXd(2), Eigen::VectorXd(2)};
  alloc.tones[0] << 2.0, 1.0;
  alloc.tones[1] << 1.0, 0.5;

  double b00 = std::log2(7.0 / 3.0);
  double b01 = std::log2(1.5);
  // Tone 1, user 0: signal 1.0, interference 0.25*0.5 = 0.125,
  // denom 2*(0.125+0.5) = 1.25, b = log2(1 + 0.8) = log2(1.8).
  double b10 = std::log2(1.8);
  // Tone 1, user 1: signal 0.25, interference 0.125, denom 2*0.375 = 0.75,
  // b = log2(1 + 1/3).
  double b11 = std::log2(4.0 / 3.0);

  EXPECT_NEAR(user_rate(sc, alloc, 0), 100.0 * (b00 + b10), 1e-10);
  EXPECT_NEAR(user_rate(sc, alloc, 1), 100.0 * (b01 + b11), 1e-10);
  EXPECT_NEAR(weighted_rate_sum(sc, alloc),
              0.25 * 100.0 * (b00 + b10) + 0.75 * 100.0 * (b01 + b11), 1e-10);
}

TEST(Model, BoxMaxIsEntrywiseMinOfMaskAndBudget) {
  Scenario sc = tiny_two_user();
  Eigen::VectorXd b0 = sc.box_max(0);
  EXPECT_EQ(b0(0), 3.0);  // mask 3 < budget 4
  EXPECT_EQ(b0(1), 6.0);  // budget 6 < mask 10
  Eigen::VectorXd b1 = sc.box_max(1);
  EXPECT_EQ(b1(0), 4.0);
  EXPECT_EQ(b1(1), 0.5);
  Eigen::VectorXd totals = sc.box_totals();
  EXPECT_EQ(totals(0), 7.0);
  EXPECT_EQ(totals(1), 6.5);
}

TEST(Model, WithinBoxAndSlack) {
  Scenario sc = tiny_two_user();
  SpectrumAllocation alloc = sc.zero_allocation();
  EXPECT_TRUE(within_box(sc, alloc));
  alloc.tones[0] << 3.0, 6.0;  // exactly at the box
  EXPECT_TRUE(within_box(sc, alloc));
  alloc.tones[0](0) = 3.0 + 1e-7;
  EXPECT_FALSE(within_box(sc, alloc));
  EXPECT_TRUE(within_box(sc, alloc, 1e-6));
  alloc.tones[0] << -1e-7, 0.0;  // negative power is out of the box
  EXPECT_FALSE(within_box(sc, alloc));
}

TEST(Model, BudgetViolationIsPositivePart) {
  Scenario sc = tiny_two_user();
  SpectrumAllocation alloc;
  alloc.tones = {Eigen::VectorXd(2), Eigen::VectorXd(2)};
  alloc.tones[0] << 3.0, 2.0;
  alloc.tones[1] << 2.0, 1.0;  // totals (5, 3) vs budgets (4, 6)
  Eigen::VectorXd v = budget_violation(sc, alloc);
  EXPECT_NEAR(v(0), 1.0, 1e-12);
  EXPECT_EQ(v(1), 0.0);
  EXPECT_EQ(alloc.user_totals()(0), 5.0);
  EXPECT_EQ(alloc.user_totals()(1), 3.0);
}

TEST(Model, ZeroAllocationShape) {
  Scenario sc = tiny_two_user();
  SpectrumAllocation z = sc.zero_allocation();
  ASSERT_EQ(z.n_tones(), 2);
  for (const auto& t : z.tones) {
    ASSERT_EQ(t.size(), 2);
    EXPECT_EQ(t.minCoeff(), 0.0);
    EXPECT_EQ(t.maxCoeff(), 0.0);
  }
}

TEST(Model, ValidateRejectsBadInputs) {
  {
    Scenario sc = tiny_two_user();
    sc.weights(0) = -0.1;
    EXPECT_THROW(sc.validate(), std::invalid_argument);
  }
  {
    Scenario sc = tiny_two_user();
    sc.budget_mw(1) = 0.0;
    EXPECT_THROW(sc.validate(), std::invalid_argument);
  }
  {
    Scenario sc = tiny_two_user();
    sc.mask_mw(0, 0) = -1.0;
    EXPECT_THROW(sc.validate(), std::invalid_argument);
  }
  {
    Scenario sc = tiny_two_user();
    sc.tones[0].noise_mw(0) = 0.0;
    EXPECT_THROW(sc.validate(), std::invalid_argument);
  }
  {
    Scenario sc = tiny_two_user();
    sc.tones[1].gains_sq = Eigen::MatrixXd::Ones(3, 3);
    EXPECT_THROW(sc.validate(), std::invalid_argument);
  }
  {
    Scenario sc = tiny_two_user();
    sc.constants.snr_gap = 0.5;  // below 0 dB makes no physical sense
    EXPECT_THROW(sc.validate(), std::invalid_argument);
  }
}

}  // namespace
}  // namespace spectra
