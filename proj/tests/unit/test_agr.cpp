#include <gtest/gtest.h>

#include <cmath>

#include "agr/agr.hpp"
#include "agr/errors.hpp"

using agr::Tensor;

TEST(Coefficients, Examples) {
  auto c = agr::compute_coefficients(Tensor::vector({1, -1}));
  EXPECT_EQ(c.alpha, Tensor::vector({0.5, 0.5}));
  EXPECT_EQ(c.l1_total, 2.0);

  c = agr::compute_coefficients(Tensor::vector({3, 1}));
  EXPECT_EQ(c.alpha, Tensor::vector({0.75, 0.25}));
  EXPECT_EQ(c.l1_total, 4.0);

  c = agr::compute_coefficients(Tensor::vector({0, 0}));
  EXPECT_EQ(c.alpha, Tensor::vector({0, 0}));
  EXPECT_TRUE(c.degenerate());
}

TEST(Regularize, Examples) {
  EXPECT_EQ(agr::regularize(Tensor::vector({3, 1})), Tensor::vector({0.75, 0.75}));
  EXPECT_EQ(agr::regularize(Tensor::vector({-2.5})), Tensor::vector({0.0}));
  EXPECT_EQ(agr::regularize(Tensor::vector({1, -1})), Tensor::vector({0.5, -0.5}));
  EXPECT_EQ(agr::regularize(Tensor::vector({0, 0})), Tensor::vector({0, 0}));
}

TEST(Regularize, PreservesShapeForKernels) {
  const Tensor g = agr::rand_fill({8, 8, 3, 3}, agr::Normal{}, 5);
  const Tensor r = agr::regularize(g);
  EXPECT_EQ(r.shape(), g.shape());
  // alpha is over the whole tensor, not per output channel.
  const auto c = agr::compute_coefficients(g);
  EXPECT_NEAR(agr::reduce(c.alpha, agr::Reduction::kSum), 1.0, 1e-12);
}

TEST(Regularize, Properties) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Tensor g = agr::rand_fill({1 + seed % 17}, agr::Normal{0.0, 3.0}, seed);
    const Tensor r = agr::regularize(g);
    EXPECT_LE(agr::reduce(r, agr::Reduction::kL2), agr::reduce(g, agr::Reduction::kL2));
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_LE(std::abs(r[i]), std::abs(g[i]));
      EXPECT_TRUE(r[i] == 0.0 || std::signbit(r[i]) == std::signbit(g[i]));
    }
    // Scale equivariance: alpha is scale free.
    const Tensor scaled = agr::regularize(agr::map_unary(g, agr::UnaryOp::scale(4.0)));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(scaled[i], 4.0 * r[i], 1e-12);
  }
}

TEST(Regularize, LargerEntriesShrinkMore) {
  const Tensor g = Tensor::vector({5, 3, 1, 0.5});
  const Tensor r = agr::regularize(g);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    EXPECT_LT(r[i] / g[i], r[i + 1] / g[i + 1]);
  }
}

TEST(Regularize, UniformMagnitudeScalesByOneMinusInverseN) {
  const Tensor g = Tensor::vector({2, -2, 2, -2, 2});
  const Tensor r = agr::regularize(g);
  EXPECT_NEAR(agr::reduce(r, agr::Reduction::kL2), 0.8 * agr::reduce(g, agr::Reduction::kL2),
              1e-15);
}

TEST(EffectiveRate, Examples) {
  auto rate = agr::effective_rate_view(0.1, agr::compute_coefficients(Tensor::vector({3, 1})));
  EXPECT_DOUBLE_EQ(rate[0], 0.025);
  EXPECT_DOUBLE_EQ(rate[1], 0.075);
  EXPECT_EQ(agr::effective_rate_view(1.0, agr::compute_coefficients(Tensor::vector({0, 0}))),
            Tensor::vector({1, 1}));
  rate = agr::effective_rate_view(0.1, agr::compute_coefficients(Tensor::vector({1, -1})));
  EXPECT_EQ(rate, Tensor::vector({0.05, 0.05}));
  EXPECT_THROW(agr::effective_rate_view(0.0, agr::compute_coefficients(Tensor::vector({1}))),
               agr::ParameterError);
}

TEST(Schedule, ShouldApply) {
  using agr::ParamRole;
  EXPECT_FALSE(agr::should_apply(ParamRole::kBias, agr::AgrSchedule::on(), 0));
  EXPECT_FALSE(agr::should_apply(ParamRole::kNormParam, agr::AgrSchedule::on(), 0));
  EXPECT_TRUE(agr::should_apply(ParamRole::kConvKernel, agr::AgrSchedule::on(), 0));
  EXPECT_FALSE(agr::should_apply(ParamRole::kDenseWeight, agr::AgrSchedule::off(), 0));

  auto s = agr::AgrSchedule::on();
  s.until_epoch = 250;
  EXPECT_TRUE(agr::should_apply(ParamRole::kDenseWeight, s, 249));
  EXPECT_FALSE(agr::should_apply(ParamRole::kDenseWeight, s, 250));
  EXPECT_FALSE(agr::should_apply(ParamRole::kDenseWeight, s, 260));
  EXPECT_TRUE(agr::should_apply(ParamRole::kDenseWeight, agr::AgrSchedule::on(), 1000000));
}

TEST(Schedule, RoleNamesRoundTrip) {
  for (auto r : {agr::ParamRole::kDenseWeight, agr::ParamRole::kConvKernel, agr::ParamRole::kBias,
                 agr::ParamRole::kNormParam}) {
    EXPECT_EQ(agr::parse_role(agr::role_name(r)), r);
  }
  EXPECT_FALSE(agr::parse_role("gamma").has_value());
}
