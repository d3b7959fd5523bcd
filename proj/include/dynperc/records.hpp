#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynperc/stats.hpp"

namespace dynperc {

/// A named binomial estimate together with everything needed to pool it.
/// `params` holds the experiment parameters that must agree for a merge.
struct EstimateRecord {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  std::int64_t successes = 0;
  std::int64_t n = 0;
  double estimate = 0;
  double ci_low = 0;
  double ci_high = 0;
  std::string ci_method = "wilson";
  std::vector<std::uint64_t> seeds;

  static EstimateRecord from_binomial(std::string name, nlohmann::json params, const BinomialEstimate& b,
                                      std::uint64_t seed);
};

void to_json(nlohmann::json& j, const EstimateRecord& r);
void from_json(const nlohmann::json& j, EstimateRecord& r);

/// Pools successes and trials and recomputes the Wilson interval. Throws
/// std::invalid_argument when names or parameters differ or the list is empty.
EstimateRecord merge(std::span<const EstimateRecord> records);

}  // namespace dynperc
