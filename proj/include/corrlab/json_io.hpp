#pragma once

#include <initializer_list>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "corrlab/bodies.hpp"
#include "corrlab/correlation.hpp"
#include "corrlab/gaussian_correlation.hpp"
#include "corrlab/lq_geometry.hpp"
#include "corrlab/posdef_catalog.hpp"
#include "corrlab/stable_model.hpp"

namespace corrlab {

using Json = nlohmann::json;

/// Schema violation in a configuration document; `field` is a JSON-pointer
/// style path such as "/f/components/1/q".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Rejects any key of `obj` not in `allowed`.
void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed);

StepFunction step_function_from_json(const Json& j, const std::string& path = "");
StableModel stable_model_from_json(const Json& j, const std::string& path = "");
Functionals functionals_from_json(const Json& j, const std::string& path = "");
CatalogFunction catalog_function_from_json(const Json& j, const std::string& path = "");
ConvexBody body_from_json(const Json& j, const std::string& path = "");
SymMatrix sym_matrix_from_json(const Json& j, const std::string& path = "");

Json to_json(const StepFunction& f);
Json to_json(const StableModel& m);
Json to_json(const Functionals& xi);
Json to_json(const CatalogFunction& f);
Json to_json(const ConvexBody& b);
Json to_json(const SymMatrix& m);
Json to_json(const Matrix& m);
Json to_json(const McEstimate& e);
Json to_json(const GapReport& r);
Json to_json(const CurvatureEstimate& c);
Json to_json(const HessianReport& r);
Json to_json(const FdReport& r);
Json to_json(const MarginalReport& r);
Json to_json(const LambdaLimitReport& r);
Json to_json(const ProbeReport& r);

}  // namespace corrlab
