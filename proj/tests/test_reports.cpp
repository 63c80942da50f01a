#include "zport/reports.hpp"

#include <gtest/gtest.h>

using namespace zport;

TEST(ZSweepJson, MirrorsCsvColumns) {
  TwoPortNetwork net(ParamKind::Z, FrequencyGrid({1000.0}),
                     {Matrix2c{{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}, {7.0, 8.0}}});
  Json doc = z_sweep_json(net);
  ASSERT_TRUE(doc.is_array());
  ASSERT_EQ(doc.size(), 1u);
  EXPECT_EQ(doc[0]["freq_hz"], 1000.0);
  EXPECT_EQ(doc[0]["z11"]["re"], 1.0);
  EXPECT_EQ(doc[0]["z11"]["im"], 2.0);
  EXPECT_EQ(doc[0]["z12"]["re"], 3.0);
  EXPECT_EQ(doc[0]["z21"]["im"], 6.0);
  EXPECT_EQ(doc[0]["z22"]["re"], 7.0);
  EXPECT_THROW(z_sweep_json(TwoPortNetwork(ParamKind::S, FrequencyGrid({1.0}), {Matrix2c{}})),
               std::invalid_argument);
}

TEST(ResonanceReport, PairsPeaksAndModes) {
  PeakEstimate with_q;
  with_q.f_r_hz = 448e3;
  with_q.q = 99.0;
  with_q.bandwidth_hz = 4500.0;
  PeakEstimate without_q;
  without_q.f_r_hz = 650e3;

  ResonanceMode fitted;
  fitted.f_r_hz = 448001.0;
  fitted.q = 100.2;
  fitted.b1 = 28000.0;
  fitted.b0 = 12.0;
  fitted.band_lo_hz = 434e3;
  fitted.band_hi_hz = 462e3;
  fitted.rms_rel_error = 1e-4;

  Json doc = resonance_report_json({with_q, without_q}, {fitted});
  ASSERT_EQ(doc.size(), 2u);
  EXPECT_EQ(doc[0]["f_r_hz"], 448001.0);
  EXPECT_EQ(doc[0]["q"], 100.2);
  EXPECT_EQ(doc[0]["b1"], 28000.0);
  EXPECT_EQ(doc[0]["rms_rel_error"], 1e-4);
  EXPECT_EQ(doc[1]["f_r_hz"], 650e3);
  EXPECT_TRUE(doc[1]["q"].is_null());
  EXPECT_TRUE(doc[1]["b1"].is_null());
}

TEST(BudgetJson, CarriesBothReferrals) {
  NoiseBudget budget = noise_psd(ReadoutCircuit{16.0, 300.0, 300.0},
                                 OpAmpNoiseSpec{"LT1363", 9e-9, 1e-12},
                                 SensorOutputImpedance::from_magnitude(15.8e3), 448e3);
  Json doc = noise_budget_json(budget);
  ASSERT_EQ(doc.size(), 2u);
  EXPECT_EQ(doc[0]["referral"], "out");
  EXPECT_EQ(doc[1]["referral"], "in");
  EXPECT_EQ(doc[0]["f_hz"], 448e3);
  EXPECT_EQ(doc[0]["psd"]["total"].get<double>(), budget.output.total);
  EXPECT_EQ(doc[1]["asd"]["total"].get<double>(), budget.input.asd_total);
  EXPECT_EQ(doc[0]["asd"]["current"].get<double>(), budget.output.asd_current());
}

TEST(LcrReport, NamedKeys) {
  LcrFitResult fit;
  fit.model = {998.0, 998e-6, 82e-12};
  fit.rms_rel_residual = 1e-6;
  fit.converged = true;
  fit.iterations = 9;
  Json doc = lcr_fit_report_json(fit);
  EXPECT_EQ(doc["r_ohm"], 998.0);
  EXPECT_EQ(doc["l_h"], 998e-6);
  EXPECT_EQ(doc["c_f"], 82e-12);
  EXPECT_NEAR(doc["f0_hz"].get<double>(), 556.36e3, 556.36e3 * 1e-4);
  EXPECT_EQ(doc["converged"], true);
}

TEST(PresetFile, LoadsValidRecords) {
  auto specs = load_opamp_presets_json(
      R"([{"name":"ADA4898","e_n_v_rthz":0.9e-9,"i_n_a_rthz":2.4e-12}])");
  ASSERT_EQ(specs.size(), 1u);
  EXPECT_EQ(specs[0].name, "ADA4898");
  EXPECT_EQ(specs[0].e_n_v_rthz, 0.9e-9);
}

TEST(PresetFile, RejectsMalformedRecords) {
  EXPECT_THROW(load_opamp_presets_json("{}"), Error);
  EXPECT_THROW(load_opamp_presets_json("not json"), Error);
  EXPECT_THROW(load_opamp_presets_json(R"([{"name":"x","e_n_v_rthz":1e-9}])"), Error);
  EXPECT_THROW(load_opamp_presets_json(
                   R"([{"name":"x","e_n_v_rthz":1e-9,"i_n_a_rthz":0.0}])"),
               Error);
  EXPECT_THROW(load_opamp_presets_json(
                   R"([{"name":"x","e_n_v_rthz":1e-9,"i_n_a_rthz":1e-12,"extra":1}])"),
               Error);
}

TEST(AmResponseJson, Layout) {
  AmResponse am;
  am.f_c_hz = 448e3;
  am.f_m_hz = 10.0;
  am.carrier = Complex(1.0, -1.0);
  am.lower = Complex(0.5, 0.0);
  am.upper = Complex(0.25, 0.1);
  Json doc = am_response_json(am, "fitted");
  EXPECT_EQ(doc["f_c_hz"], 448e3);
  EXPECT_EQ(doc["source"], "fitted");
  EXPECT_EQ(doc["carrier"]["im"], -1.0);
  EXPECT_EQ(doc["lower"]["re"], 0.5);
}
