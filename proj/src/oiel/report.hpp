#pragma once

// JSON and plain-text renderings of results. JSON objects keep insertion
// order so identical inputs serialize to identical bytes; non-finite values
// become null.

#include <json.hpp>
#include <string>

#include "oiel/baselines.hpp"
#include "oiel/io.hpp"
#include "oiel/sim.hpp"

namespace oiel {

using Json = nlohmann::ordered_json;

Json provenance();
Json to_json(const Model& model);
Json to_json(const ElFit& fit, const Dataset& data);
Json to_json(const InferenceReport& report);
Json to_json(const Interval& interval);
Json to_json(const ScoreTestResult& result, const std::string& name);
Json to_json(const ClFit& fit);
Json to_json(const GofReport& report);
Json to_json(const ReplicationSummary& summary, bool raw = false);
Json to_json(const QqData& qq);
Json error_json(const std::string& code, const std::string& message);

std::string dump(const Json& j);

// "232 (49)  [181, 499]  [137, 327]  0.66 (0.17)": N (SE), EL interval,
// Wald interval and w (SE), rounded as in a results table.
std::string table_row(const ElFit& fit, const InferenceReport& report);

std::string fit_table(const ElFit& fit, const Dataset& data, const InferenceReport& report);
std::string tests_table(const std::vector<std::pair<std::string, ScoreTestResult>>& tests);
std::string gof_table(const GofReport& report);
std::string study_table(const ReplicationSummary& summary);

}  // namespace oiel
