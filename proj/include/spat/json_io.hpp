#pragma once

// JSON-lines encodings of estimates, plans and intermediate stage results.

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "spat/eval.hpp"
#include "spat/pipeline.hpp"

namespace spat {

using Json = nlohmann::ordered_json;

Json to_json(const PhaseEstimate& e);
PhaseEstimate phase_estimate_from_json(const Json& j);

Json to_json(const SignalPlanTruth& plan);
SignalPlanTruth plan_from_json(const Json& j);

Json to_json(const CycleEstimate& e);
CycleEstimate cycle_estimate_from_json(const Json& j);

Json to_json(const StreamCycles& c);
StreamCycles stream_cycles_from_json(const Json& j);

Json to_json(const StreamSchedule& s);
StreamSchedule stream_schedule_from_json(const Json& j);

Json to_json(const EvaluationReport& r);

void write_cycles(std::span<const StreamCycles> cycles, const std::filesystem::path& path);
std::vector<StreamCycles> read_cycles(const std::filesystem::path& path);

void write_schedules(std::span<const StreamSchedule> schedules, const std::filesystem::path& path);
std::vector<StreamSchedule> read_schedules(const std::filesystem::path& path);

}  // namespace spat
