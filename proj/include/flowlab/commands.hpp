#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flowlab/checkpoint.hpp"
#include "flowlab/metrics.hpp"
#include "flowlab/o3s.hpp"
#include "flowlab/run_config.hpp"

namespace flowlab {

namespace fs = std::filesystem;

/// Everything a run samples from its root seed: training set, held-out
/// reference, and the noise used to generate evaluation batches.
struct RunData {
    SampleBatch train;
    SampleBatch reference;
    Matrix eval_noise;
};

RunData make_run_data(const RunConfig& config);

/// Creates the output directory and returns it.
fs::path prepare_output(const RunConfig& config);
/// Writes config.<command>.json into the output directory.
void write_resolved_config(const RunConfig& config, const std::string& command);

/// A loaded teacher or student.
class Model {
public:
    static Model load(const fs::path& path, ModelKind expected);

    ModelKind kind() const { return m_kind; }
    std::string name() const { return to_string(m_kind); }
    /// 32 for teachers, 3 for students.
    int default_nfe() const;
    Matrix sample(const Matrix& z0, const StepSchedule& schedule, std::span<const int> labels,
                  const CfgConfig& guidance) const;

private:
    ModelKind m_kind = ModelKind::kTeacher;
    std::variant<VelocityNet, DualTimeVelocityNet> m_net;
    Model(ModelKind kind, std::variant<VelocityNet, DualTimeVelocityNet> net) : m_kind(kind), m_net(std::move(net)) {}
};

struct EvalReport {
    int nfe = 0;
    StepSchedule schedule = StepSchedule::uniform(1);
    double swd = 0.0;
    MmdResult mmd{0.0, 0.0};
    double noise_floor = 0.0;
    double seconds = 0.0;

    Json to_json() const;
};

/// Samples eval_count points and scores them against the held-out reference.
EvalReport evaluate(const Model& model, const RunConfig& config, const RunData& data, const StepSchedule& schedule,
                    double noise_floor);
double run_noise_floor(const RunConfig& config);

/// The schedule a sample/eval command should use: the file if given (its step
/// count must agree with nfe when both are set), otherwise uniform.
StepSchedule pick_schedule(const RunConfig& config, const Model& model, const std::optional<fs::path>& schedule_path);

struct TeacherOutcome {
    fs::path checkpoint;
    double swd32 = 0.0;
    double noise_floor = 0.0;
};

struct DistillOutcome {
    fs::path checkpoint;
    double median_step_seconds = 0.0;
};

struct O3sOutcome {
    fs::path schedule;
    fs::path audit;
    O3sResult result;
};

fs::path cmd_gen_data(const RunConfig& config, std::ostream& log);
TeacherOutcome cmd_train_teacher(const RunConfig& config, std::ostream& log);
DistillOutcome cmd_distill(const RunConfig& config, const fs::path& teacher, std::ostream& log);
/// Searches the config's nfe (or o3s_nfe when unset).
O3sOutcome cmd_o3s(const RunConfig& config, const fs::path& student, std::ostream& log);
fs::path cmd_sample(const RunConfig& config, const Model& model, const std::optional<fs::path>& schedule,
                    std::ostream& log);
EvalReport cmd_eval(const RunConfig& config, const Model& model, const std::optional<fs::path>& schedule,
                    std::ostream& log);
/// Teacher over NFE {1,2,3,4,8,16,32}, student over {1,2,3,4}; student rows are
/// repeated for every schedule_nfe<n>.json found in the output directory.
fs::path cmd_sweep(const RunConfig& config, const std::optional<fs::path>& teacher,
                   const std::optional<fs::path>& student, std::ostream& log);

/// File names inside the output directory.
fs::path schedule_file(const RunConfig& config, int nfe);

}  // namespace flowlab
