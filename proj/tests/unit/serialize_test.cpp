#include <gtest/gtest.h>

#include "mrgarch/data_io.hpp"
#include "mrgarch/errors.hpp"
#include "mrgarch/serialize.hpp"
#include "mrgarch/simulator.hpp"
#include "test_util.hpp"

namespace mrg {
namespace {

TEST(Json, MatrixRoundTripIsExact) {
  std::mt19937_64 rng(1);
  const Matrix m = testing::random_normal(3, 4, rng) / 3.0;
  EXPECT_EQ(matrix_from_json(Json::parse(dump(to_json(m)))), m);
  EXPECT_THROW(matrix_from_json(Json::parse("[[1,2],[3]]")), DataError);
  EXPECT_THROW(vector_from_json(Json::parse("[1,\"a\"]")), DataError);
}

TEST(Json, SpecRoundTrip) {
  for (const auto& spec : {ModelSpec::block(BlockPartition({2, 3}), Dynamics::kDynamic),
                           ModelSpec::equi(4, Dynamics::kStatic),
                           ModelSpec(Structure::kBlock, Dynamics::kDynamic, BlockPartition({2, 2}), MeasurementMode::kFull)})
    EXPECT_EQ(spec_from_json(to_json(spec)), spec);
}

TEST(Json, ParamsRoundTripIsExact) {
  ModelParams q = default_truth(ModelSpec::block(BlockPartition({2, 1}), Dynamics::kDynamic));
  q.beta(0) = 1.0 / 3.0;
  const ModelParams back = params_from_json(Json::parse(dump(to_json(q))));
  EXPECT_EQ(back.spec, q.spec);
  EXPECT_EQ(back.beta, q.beta);
  EXPECT_EQ(back.corr_gamma, q.corr_gamma);
  EXPECT_EQ(back.meas_phi, q.meas_phi);
  EXPECT_EQ(back.sigma, q.sigma);
}

TEST(Json, InvalidParamsAreDataErrors) {
  const ModelParams q = default_truth(ModelSpec::equi(2, Dynamics::kDynamic));
  Json j = to_json(q);
  j["beta"] = Json::array({0.5});
  EXPECT_THROW(params_from_json(j), DataError);
  j = to_json(q);
  j.erase("omega");
  EXPECT_THROW(params_from_json(j), DataError);
  j = to_json(q);
  j["spec"]["measurement"] = "partial";
  EXPECT_THROW(params_from_json(j), DataError);
}

TEST(Json, FitRoundTrip) {
  const ModelSpec spec = ModelSpec::equi(2, Dynamics::kDynamic);
  SimConfig cfg;
  cfg.truth = default_truth(spec);
  cfg.T = 100;
  cfg.burn_in = 10;
  const Dataset d = simulate_dataset(cfg).data;
  FitResult fit = evaluate_fit(d, cfg.truth, default_initial_state(d, spec));
  fit.method = "joint";
  const FitResult back = fit_from_json(Json::parse(dump(to_json(fit))));
  EXPECT_EQ(back.method, "joint");
  EXPECT_EQ(back.params.sigma, fit.params.sigma);
  EXPECT_EQ(back.init.h1, fit.init.h1);
  EXPECT_EQ(back.report.objective, fit.report.objective);
  EXPECT_EQ(back.report.measurement_signature, fit.report.measurement_signature);
}

TEST(Json, ReadFileErrors) {
  const std::string dir = testing::temp_dir("json");
  EXPECT_THROW(read_json_file(dir + "/none.json"), DataError);
  write_text_file(dir + "/bad.json", "{ not json");
  EXPECT_THROW(read_json_file(dir + "/bad.json"), DataError);
}

}  // namespace
}  // namespace mrg
