#pragma once

// JSON forms of parameters, fits and reports. Doubles are written in
// shortest round-trip form, so to_json/from_json pairs are lossless.

#include <string>

#include <json.hpp>

#include "mrgarch/forecast_portfolio.hpp"

namespace mrg {

using Json = nlohmann::ordered_json;

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);

Json to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const Json& j);

Json to_json(const ModelParams& params);
ModelParams params_from_json(const Json& j);

Json to_json(const InitialState& init);
InitialState init_from_json(const Json& j);

Json to_json(const LogLikReport& report);
Json to_json(const FitDiagnostics& diag);

Json to_json(const FitResult& fit);
/// Restores params, init, method and the scalar report fields.
FitResult fit_from_json(const Json& j);

Json to_json(const BacktestReport& report);
/// Summary only; the draws themselves are not written.
Json to_json(const ForecastDistribution& fc);

/// Two-space indented text with a trailing newline.
std::string dump(const Json& j);

/// Reads and parses a JSON file; throws DataError.
Json read_json_file(const std::string& path);

}  // namespace mrg
