#pragma once

#include <iosfwd>
#include <string>

#include "horserule/model.hpp"

namespace horserule {

inline constexpr int kModelFormatVersion = 1;

/// Model file layout:
///   line 1   "horserule-model <version>"
///   line 2   JSON header: config, schema, scaling, rules, column metadata
///   line 3   "draws <count> <columns>"
///   then one line per retained draw: beta_1 .. beta_p sigma2 tau2 (%.17g)
///   last     "end"
void write_model(std::ostream& out, const FittedModel& model);
void save_model(const std::string& path, const FittedModel& model);

FittedModel read_model(std::istream& in);
FittedModel load_model(const std::string& path);

}  // namespace horserule
