#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flowlab/flow.hpp"
#include "flowlab/sample_batch.hpp"

namespace flowlab {

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// step,loss
void write_loss_csv(const std::filesystem::path& path, const std::vector<double>& losses);
/// Header x0,...,x{d-1},label.
void write_batch_csv(const std::filesystem::path& path, const SampleBatch& batch);
SampleBatch read_batch_csv(const std::filesystem::path& path);
/// step,seconds,teacher_nfe
void write_timing_csv(const std::filesystem::path& path, const std::vector<double>& seconds, int teacher_nfe);

void write_schedule(const std::filesystem::path& path, const StepSchedule& schedule);
StepSchedule read_schedule(const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace flowlab
