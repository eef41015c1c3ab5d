#pragma once

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "tombandit/experiment.hpp"

namespace tombandit {

enum class ExportFormat { csv, json };

nlohmann::json result_to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::json& doc);

/// One row per played round:
/// condition,target,episode,turn,item,answer,reward,cumulative_reward
void write_csv(const ExperimentResult& result, std::ostream& sink);

/// Writes the result in `format`; throws std::runtime_error if the sink fails.
void export_results(const ExperimentResult& result, ExportFormat format, std::ostream& sink);

/// Episode logs with timing, one JSON object per line.
void write_episodes_jsonl(const ExperimentResult& result, std::ostream& sink);

/// Writes `<root>/<config-hash>/{result.json, curves.csv, episodes.jsonl}`
/// and returns the directory.
std::filesystem::path write_results_dir(const ExperimentResult& result, const std::filesystem::path& root);

/// Reads result.json, or the result.json inside a results directory.
ExperimentResult read_result(const std::filesystem::path& path);

}  // namespace tombandit
