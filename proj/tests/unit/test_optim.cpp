#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "agr/errors.hpp"
#include "agr/optim.hpp"

using agr::OptimizerConfig;
using agr::OptimizerKind;
using agr::OptimizerState;
using agr::Tensor;

namespace {

OptimizerConfig with_agr(OptimizerKind kind, bool on, double wd = 0.0) {
  auto c = OptimizerConfig::defaults(kind);
  c.agr.enabled = on;
  c.weight_decay = wd;
  return c;
}

void expect_near(const Tensor& t, std::initializer_list<double> want, double tol) {
  ASSERT_EQ(t.size(), want.size());
  std::size_t i = 0;
  for (double w : want) EXPECT_NEAR(t[i++], w, tol) << "index " << i - 1;
}

bool bit_equal(const Tensor& t, std::initializer_list<double> want) {
  const std::vector<double> w(want);
  return t.size() == w.size() && std::memcmp(t.data().data(), w.data(), w.size() * 8) == 0;
}

}  // namespace

TEST(Transform, ClipAndCentralize) {
  auto c = OptimizerConfig::defaults(OptimizerKind::kSgd);
  c.clip_norm = 5.0;
  EXPECT_EQ(agr::transform_gradient(Tensor::vector({3, 4}), c, agr::ParamRole::kDenseWeight, 0),
            Tensor::vector({3, 4}));
  c.clip_norm = 2.5;
  EXPECT_EQ(agr::transform_gradient(Tensor::vector({3, 4}), c, agr::ParamRole::kDenseWeight, 0),
            Tensor::vector({1.5, 2.0}));
  c.clip_norm.reset();
  c.centralize = true;
  EXPECT_EQ(agr::transform_gradient(Tensor::vector({1, 3}), c, agr::ParamRole::kDenseWeight, 0),
            Tensor::vector({-1, 1}));
}

TEST(Transform, AgrRunsLastAndRespectsRole) {
  auto c = OptimizerConfig::defaults(OptimizerKind::kSgd);
  c.agr.enabled = true;
  c.centralize = true;
  // centralize [1,3] -> [-1,1], then psi -> [-0.5, 0.5]
  EXPECT_EQ(agr::transform_gradient(Tensor::vector({1, 3}), c, agr::ParamRole::kDenseWeight, 0),
            Tensor::vector({-0.5, 0.5}));
  EXPECT_EQ(agr::transform_gradient(Tensor::vector({1, 3}), c, agr::ParamRole::kBias, 0),
            Tensor::vector({-1, 1}));
}

TEST(Sgd, Examples) {
  auto c = with_agr(OptimizerKind::kSgd, true);
  c.lr = 0.1;
  Tensor w = Tensor::vector({1, 1});
  OptimizerState st;
  agr::sgd_step(w, Tensor::vector({3, 1}), c, st);
  expect_near(w, {0.925, 0.925}, 1e-15);

  w = Tensor::vector({1, 1});
  agr::sgd_step(w, Tensor::vector({0, 0}), c, st);
  EXPECT_EQ(w, Tensor::vector({1, 1}));

  c.agr.enabled = false;
  w = Tensor::vector({1, 1});
  agr::sgd_step(w, Tensor::vector({3, 1}), c, st);
  expect_near(w, {0.7, 0.9}, 1e-15);
}

TEST(Sgd, ShapeMismatch) {
  Tensor w = Tensor::vector({1, 1});
  OptimizerState st;
  EXPECT_THROW(agr::sgd_step(w, Tensor::vector({1}), with_agr(OptimizerKind::kSgd, false), st),
               agr::ShapeError);
}

TEST(Sgdm, FirstStepAndFixedPoint) {
  auto c = with_agr(OptimizerKind::kSgdm, false);
  c.lr = 1.0;
  Tensor w = Tensor::vector({0, 0});
  OptimizerState st;
  agr::sgdm_step(w, Tensor::vector({1, 0}), c, st);
  EXPECT_EQ(w, Tensor::vector({-1, 0}));

  c.sgdm_dampening = true;
  w = Tensor::vector({0, 0});
  OptimizerState damp;
  agr::sgdm_step(w, Tensor::vector({1, 0}), c, damp);
  expect_near(w, {-0.1, 0}, 1e-16);

  Tensor z = Tensor::vector({2, -3});
  OptimizerState zst;
  for (int i = 0; i < 20; ++i) agr::sgdm_step(z, Tensor::vector({0, 0}), c, zst);
  EXPECT_EQ(z, Tensor::vector({2, -3}));
}

TEST(Sgdm, TwoStepsMatchExpansion) {
  auto c = with_agr(OptimizerKind::kSgdm, true);
  c.lr = 0.1;
  const Tensor g = Tensor::vector({3, 1});
  Tensor w = Tensor::vector({1, 1});
  OptimizerState st;
  agr::sgdm_step(w, g, c, st);
  agr::sgdm_step(w, g, c, st);
  // psi(g) = [0.75, 0.75]; m1 = p, m2 = 0.9 p + p; w2 = w0 - lr (m1 + m2)
  const double p = 0.75;
  const double m1 = p;
  const double m2 = 0.9 * m1 + p;
  const double want = (1.0 - 0.1 * m1) - 0.1 * m2;
  EXPECT_EQ(w[0], want);
  EXPECT_EQ(w[1], want);
}

TEST(AdamW, MatchesOracleWithAgr) {
  for (double wd : {0.0, 0.01}) {
    Tensor w = Tensor::vector({1, 1});
    OptimizerState st;
    agr::adamw_agr_step(w, Tensor::vector({3, 1}), with_agr(OptimizerKind::kAdamW, true, wd), st);
    const auto& s = st.slots.front();
    if (wd == 0.0) {
      expect_near(w, {0.9997500000008334, 0.9992500000075}, 1e-12);
      expect_near(s.m, {0.07499999999999998, 0.07499999999999998}, 1e-12);
      expect_near(s.v, {0.009000000000000008, 0.0010000000000000009}, 1e-12);
    } else {
      expect_near(w, {0.9897487562197401, 0.9892512437885079}, 1e-12);
      expect_near(s.m, {0.07562437810945272, 0.07562437810945272}, 1e-12);
      expect_near(s.v, {0.009060100000000007, 0.001020100000000001}, 1e-12);
    }
  }
}

TEST(AdamW, AgrOffBitIdenticalToVanilla) {
  Tensor w = Tensor::vector({1, 1});
  OptimizerState st;
  agr::adamw_agr_step(w, Tensor::vector({3, 1}), with_agr(OptimizerKind::kAdamW, false), st);
  EXPECT_TRUE(bit_equal(w, {0.9990000000033333, 0.99900000001}));
  EXPECT_TRUE(bit_equal(st.slots.front().m, {0.29999999999999993, 0.09999999999999998}));

  w = Tensor::vector({1, 1});
  OptimizerState st2;
  agr::adamw_agr_step(w, Tensor::vector({3, 1}), with_agr(OptimizerKind::kAdamW, false, 0.01),
                      st2);
  EXPECT_TRUE(bit_equal(w, {0.9890000000033222, 0.989000000009901}));
}

TEST(AdamW, ZeroGradientFixedPoint) {
  Tensor w = Tensor::vector({1, -2});
  OptimizerState st;
  for (int i = 0; i < 5; ++i) {
    agr::adamw_agr_step(w, Tensor::vector({0, 0}), with_agr(OptimizerKind::kAdamW, true), st);
  }
  EXPECT_EQ(w, Tensor::vector({1, -2}));
}

TEST(Adam, MatchesOracle) {
  Tensor w = Tensor::vector({1, 1});
  OptimizerState st;
  agr::adam_step(w, Tensor::vector({1, 1}), with_agr(OptimizerKind::kAdam, true), st);
  expect_near(w, {0.9995000000049999, 0.9995000000049999}, 1e-12);
  w = Tensor::vector({1, 1});
  OptimizerState off;
  agr::adam_step(w, Tensor::vector({1, 1}), with_agr(OptimizerKind::kAdam, false), off);
  EXPECT_TRUE(bit_equal(w, {0.99900000001, 0.99900000001}));
}

TEST(Adan, MatchesOracleWithAgr) {
  for (double wd : {0.0, 0.02}) {
    Tensor w = Tensor::vector({1, 1});
    OptimizerState st;
    const auto c = with_agr(OptimizerKind::kAdan, true, wd);
    agr::adan_agr_step(w, Tensor::vector({1, 0}), c, st);
    if (wd == 0.0) {
      expect_near(w, {1.0, 1.0}, 1e-12);
    } else {
      expect_near(w, {0.9999800003999921, 0.9999800003999921}, 1e-12);
    }
    agr::adan_agr_step(w, Tensor::vector({0.5, 0.5}), c, st);
    const auto& s = st.slots.front();
    if (wd == 0.0) {
      expect_near(w, {1.0006884453333613, 0.9975520835883246}, 1e-12);
    } else {
      expect_near(w, {1.0006484327646983, 0.9975121337456418}, 1e-12);
    }
    expect_near(s.m, {0.005, 0.005}, 1e-12);
    expect_near(s.v, {-0.75, 0.25}, 1e-12);
    expect_near(s.n, {0.990016, 0.009216}, 1e-12);
  }
}

TEST(Adan, AgrOffBitIdenticalToVanilla) {
  Tensor w = Tensor::vector({1, 1});
  OptimizerState st;
  auto c = with_agr(OptimizerKind::kAdan, false);
  agr::adan_agr_step(w, Tensor::vector({1, 0}), c, st);
  EXPECT_TRUE(bit_equal(w, {0.99900000001, 1.0}));
  agr::adan_agr_step(w, Tensor::vector({0.5, 0.5}), c, st);
  EXPECT_TRUE(bit_equal(w, {0.9984673342776182, 0.9951041671766493}));
  const auto& s = st.slots.front();
  expect_near(s.m, {0.99, 0.01}, 1e-15);
  expect_near(s.v, {-0.5, 0.5}, 1e-15);

  Tensor w2 = Tensor::vector({1, 1});
  OptimizerState st2;
  c.weight_decay = 0.02;
  agr::adan_agr_step(w2, Tensor::vector({1, 0}), c, st2);
  EXPECT_TRUE(bit_equal(w2, {0.9989800204095919, 0.9999800003999921}));
  agr::adan_agr_step(w2, Tensor::vector({0.5, 0.5}), c, st2);
  EXPECT_TRUE(bit_equal(w2, {0.9984273861294877, 0.9950642662913157}));
}

TEST(Adan, ZeroGradientFixedPoint) {
  Tensor w = Tensor::vector({0.5, -1});
  OptimizerState st;
  for (int i = 0; i < 10; ++i) {
    agr::adan_agr_step(w, Tensor::vector({0, 0}), with_agr(OptimizerKind::kAdan, true), st);
  }
  EXPECT_EQ(w, Tensor::vector({0.5, -1}));
}

TEST(Adan, UniformMagnitudeScalesFirstMomentOnly) {
  const Tensor g0 = Tensor::vector({2, -2, 2, -2});
  const Tensor g1 = Tensor::vector({-1, 1, 1, -1});
  OptimizerState on, off;
  Tensor w_on = Tensor::vector({0, 0, 0, 0});
  Tensor w_off = w_on;
  agr::adan_agr_step(w_on, g0, with_agr(OptimizerKind::kAdan, true), on);
  agr::adan_agr_step(w_off, g0, with_agr(OptimizerKind::kAdan, false), off);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(on.slots[0].m[i], 0.75 * off.slots[0].m[i]);
    EXPECT_EQ(on.slots[0].n[i], off.slots[0].n[i]);
  }
  agr::adan_agr_step(w_on, g1, with_agr(OptimizerKind::kAdan, true), on);
  agr::adan_agr_step(w_off, g1, with_agr(OptimizerKind::kAdan, false), off);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(on.slots[0].m[i], 0.75 * off.slots[0].m[i]);
    EXPECT_EQ(on.slots[0].n[i], off.slots[0].n[i]);
  }
}

TEST(Adan, RestartHookReinitializes) {
  auto c = with_agr(OptimizerKind::kAdan, false);
  int calls = 0;
  c.adan_restart = [&](std::uint64_t k, const agr::ParamSlots&) {
    ++calls;
    return k == 1;
  };
  Tensor w = Tensor::vector({1, 1});
  OptimizerState st;
  agr::adan_agr_step(w, Tensor::vector({1, 0}), c, st);
  agr::adan_agr_step(w, Tensor::vector({0.5, 0.5}), c, st);
  EXPECT_EQ(st.slots[0].steps, 0u);
  agr::adan_agr_step(w, Tensor::vector({0.25, 0.5}), c, st);
  EXPECT_EQ(st.slots[0].m, Tensor::vector({0.25, 0.5}));
  EXPECT_EQ(calls, 3);
}

TEST(Rmsprop, WarmStartReducesToScaledSgd) {
  auto c = with_agr(OptimizerKind::kRmsprop, false);
  c.beta2 = 1.0;
  c.lr = 0.05;
  const Tensor g = Tensor::vector({0.3, -2.0, 1.5});
  Tensor w = Tensor::vector({1, 2, 3});
  OptimizerState st;
  st.slots.emplace_back();
  st.slots[0].v = agr::map_unary(g, agr::UnaryOp::square());
  st.slots[0].warm = true;
  agr::rmsprop_step(w, g, c, st);
  const double want[] = {1 - 0.05 * 0.3 / (0.3 + 1e-8), 2 + 0.05 * 2.0 / (2.0 + 1e-8),
                         3 - 0.05 * 1.5 / (1.5 + 1e-8)};
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(w[i], want[i], 1e-12);
}

TEST(Rmsprop, ZeroGradientFixedPoint) {
  Tensor w = Tensor::vector({1, 2});
  OptimizerState st;
  agr::rmsprop_step(w, Tensor::vector({0, 0}), with_agr(OptimizerKind::kRmsprop, true), st);
  EXPECT_EQ(w, Tensor::vector({1, 2}));
}

TEST(Optimizer, DeterministicAndShapedState) {
  auto run = [] {
    agr::Optimizer opt(with_agr(OptimizerKind::kAdamW, true, 0.01));
    Tensor w = agr::rand_fill({4, 3}, agr::Normal{}, 1);
    Tensor b = Tensor::zeros({4});
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Tensor gw = agr::rand_fill({4, 3}, agr::Normal{}, 100 + s);
      const Tensor gb = agr::rand_fill({4}, agr::Normal{}, 200 + s);
      const agr::Optimizer::Param params[] = {{&w, &gw, agr::ParamRole::kDenseWeight},
                                              {&b, &gb, agr::ParamRole::kBias}};
      opt.step(params, 0);
    }
    EXPECT_EQ(opt.state().step, 10u);
    EXPECT_EQ(opt.state().slots[0].m.shape(), w.shape());
    EXPECT_EQ(opt.state().slots[1].v.shape(), b.shape());
    EXPECT_EQ(opt.agr_applications(), 10u);
    return std::pair{w, b};
  };
  EXPECT_EQ(run(), run());
}

TEST(Optimizer, RejectsChangedParameterList) {
  agr::Optimizer opt(with_agr(OptimizerKind::kSgd, false));
  Tensor w = Tensor::vector({1});
  const Tensor g = Tensor::vector({1});
  const agr::Optimizer::Param one[] = {{&w, &g, agr::ParamRole::kBias}};
  const agr::Optimizer::Param two[] = {{&w, &g, agr::ParamRole::kBias},
                                       {&w, &g, agr::ParamRole::kBias}};
  opt.step(one, 0);
  EXPECT_THROW(opt.step(two, 0), agr::StateError);
}

TEST(Config, Validation) {
  auto c = OptimizerConfig::defaults(OptimizerKind::kAdamW);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.lr, 0.001);
  EXPECT_EQ(c.beta1, 0.9);
  EXPECT_EQ(c.beta2, 0.999);
  EXPECT_EQ(c.eps, 1e-8);
  c.lr = 0.0;
  EXPECT_THROW(c.validate(), agr::ParameterError);
  c = OptimizerConfig::defaults(OptimizerKind::kAdamW);
  c.beta1 = 1.5;
  EXPECT_THROW(c.validate(), agr::ParameterError);
  c = OptimizerConfig::defaults(OptimizerKind::kAdamW);
  c.weight_decay = -1;
  EXPECT_THROW(c.validate(), agr::ParameterError);
  c = OptimizerConfig::defaults(OptimizerKind::kAdamW);
  c.clip_norm = 0.0;
  EXPECT_THROW(c.validate(), agr::ParameterError);
}

TEST(Config, KindNamesRoundTrip) {
  for (auto k : {OptimizerKind::kSgd, OptimizerKind::kSgdm, OptimizerKind::kAdam,
                 OptimizerKind::kAdamW, OptimizerKind::kAdan, OptimizerKind::kRmsprop}) {
    EXPECT_EQ(agr::parse_kind(agr::kind_name(k)), k);
  }
}
