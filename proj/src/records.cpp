#include "dynperc/records.hpp"

#include <stdexcept>

namespace dynperc {

EstimateRecord EstimateRecord::from_binomial(std::string name, nlohmann::json params, const BinomialEstimate& b,
                                             std::uint64_t seed) {
  EstimateRecord r;
  r.name = std::move(name);
  r.params = std::move(params);
  r.successes = b.successes;
  r.n = b.n;
  r.estimate = b.estimate;
  r.ci_low = b.ci.low;
  r.ci_high = b.ci.high;
  r.seeds = {seed};
  return r;
}

void to_json(nlohmann::json& j, const EstimateRecord& r) {
  j = nlohmann::json{{"name", r.name},       {"params", r.params},   {"successes", r.successes},
                     {"n", r.n},             {"estimate", r.estimate}, {"ci_low", r.ci_low},
                     {"ci_high", r.ci_high}, {"ci_method", r.ci_method}, {"seeds", r.seeds}};
}

void from_json(const nlohmann::json& j, EstimateRecord& r) {
  j.at("name").get_to(r.name);
  r.params = j.at("params");
  j.at("successes").get_to(r.successes);
  j.at("n").get_to(r.n);
  j.at("estimate").get_to(r.estimate);
  j.at("ci_low").get_to(r.ci_low);
  j.at("ci_high").get_to(r.ci_high);
  r.ci_method = j.value("ci_method", std::string("wilson"));
  r.seeds = j.value("seeds", std::vector<std::uint64_t>{});
}

EstimateRecord merge(std::span<const EstimateRecord> records) {
  if (records.empty()) throw std::invalid_argument("merge: no records");
  const auto& first = records.front();
  EstimateRecord out;
  out.name = first.name;
  out.params = first.params;
  for (const auto& r : records) {
    if (r.name != first.name) throw std::invalid_argument("merge: experiment name mismatch (" + r.name + ")");
    if (r.params != first.params)
      throw std::invalid_argument("merge: parameter mismatch: " + r.params.dump() + " vs " + first.params.dump());
    if (r.ci_method != "wilson") throw std::invalid_argument("merge: unsupported interval method " + r.ci_method);
    out.successes += r.successes;
    out.n += r.n;
    out.seeds.insert(out.seeds.end(), r.seeds.begin(), r.seeds.end());
  }
  const auto pooled = BinomialEstimate::from_counts(out.successes, out.n);
  out.estimate = pooled.estimate;
  out.ci_low = pooled.ci.low;
  out.ci_high = pooled.ci.high;
  return out;
}

}  // namespace dynperc
