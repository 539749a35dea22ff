#pragma once
// Persistence: frame files, configs, discriminator checkpoints, pipeline
// state, run and benchmark reports.
//
// Frame files are newline-delimited JSON. Tensor, ROI and confidence payloads
// are base64 of little-endian IEEE-754 binary32, so a load/save round trip is
// bit-exact. Config files are strict JSON: unknown keys are rejected.

#include "bi3d/core.hpp"
#include "bi3d/discriminator.hpp"
#include "bi3d/pipeline.hpp"
#include "bi3d/simulator.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace bi3d::io {

using nlohmann::json;

std::string base64_encode(std::span<const unsigned char> bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

std::vector<unsigned char> pack_floats(std::span<const float> values);
std::vector<float> unpack_floats(std::span<const unsigned char> bytes);

// --- frames ---------------------------------------------------------------

std::string frame_to_line(const FrameRecord& frame);
// Throws DataError (prefixed with the line number) on malformed or invalid records.
FrameRecord frame_from_line(const std::string& line, std::size_t line_number = 1);

void save_frames(const std::filesystem::path& path, std::span<const FrameRecord> frames);
std::vector<FrameRecord> load_frames(const std::filesystem::path& path);

// --- configs --------------------------------------------------------------

json to_json(const TrainConfig& cfg);
json to_json(const pipeline::PipelineConfig& cfg);
json to_json(const simulator::SyntheticConfig& cfg);
json to_json(const simulator::ProxyConfig& cfg);
json to_json(const simulator::BenchmarkConfig& cfg);

// Missing keys keep their defaults. A pipeline config must name its schedule
// unless require_schedule is false (benchmark configs supply it per budget
// level; single-stage CLI commands do not need one). Unknown keys
// and invariant violations throw.
pipeline::PipelineConfig pipeline_config_from_json(const json& j, bool require_schedule = true);
simulator::SyntheticConfig synthetic_config_from_json(const json& j);
simulator::ProxyConfig proxy_config_from_json(const json& j);
simulator::BenchmarkConfig benchmark_config_from_json(const json& j);

json read_json(const std::filesystem::path& path);
pipeline::PipelineConfig load_pipeline_config(const std::filesystem::path& path);
simulator::SyntheticConfig load_synthetic_config(const std::filesystem::path& path);
simulator::BenchmarkConfig load_benchmark_config(const std::filesystem::path& path);

// A schedule is either a preset name ("kitti-1%"), {"per_round", "trigger_epochs"},
// or {"budget", "trigger_epochs"} (equal split).
BudgetSchedule schedule_from_json(const json& j);

// --- checkpoints and state ------------------------------------------------

json to_json(const DiscriminatorModel& model);
DiscriminatorModel model_from_json(const json& j);
void save_model(const std::filesystem::path& path, const DiscriminatorModel& model);
DiscriminatorModel load_model(const std::filesystem::path& path);

json to_json(const PipelineState& state);
PipelineState pipeline_state_from_json(const json& j);

// --- reports --------------------------------------------------------------

json to_json(const pipeline::RunReport& report, const pipeline::PipelineConfig& cfg);
json to_json(const simulator::BenchmarkReport& report);
std::string benchmark_csv(const simulator::BenchmarkReport& report);
// Tab-separated: budget_frames then one mean-accuracy column per strategy.
std::string benchmark_plot_data(const simulator::BenchmarkReport& report);

// Canonical text form used for every JSON file we write.
std::string dump(const json& j);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// One id per line.
void write_manifest(const std::filesystem::path& path, std::span<const std::string> ids);
std::vector<std::string> read_manifest(const std::filesystem::path& path);

} // namespace bi3d::io
