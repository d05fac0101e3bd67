#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flowlab/checkpoint.hpp"
#include "flowlab/datasets.hpp"
#include "flowlab/distill.hpp"
#include "flowlab/flow.hpp"
#include "flowlab/o3s.hpp"

namespace flowlab {

/// Environment variable that replaces the output root from the config file.
inline constexpr const char* kOutputRootEnv = "FLOWLAB_OUTPUT_ROOT";

/// Flat experiment configuration. Every key is optional in a config file except
/// "dataset"; unknown keys are rejected.
struct RunConfig {
    // data
    std::string dataset = "gauss8";
    double dataset_noise = 0.1;
    int train_size = 50000;
    int eval_count = 4096;

    // architecture
    std::vector<int> hidden{128, 128, 128};
    int time_dim = 32;
    int cond_dim = 16;

    // teacher
    int teacher_steps = 10000;
    int teacher_batch = 256;
    double teacher_lr = 1e-3;
    double teacher_final_lr_fraction = 0.1;
    double cond_dropout = 0.2;

    // guidance (teacher only)
    double cfg_weight = 0.2;
    bool cfg_enabled = true;

    // distillation
    int teacher_nfe = 16;
    double interval_eps = kDefaultIntervalEps;
    int distill_steps = 2000;
    int distill_batch = 256;
    double distill_lr = 1e-3;
    double distill_final_lr_fraction = 0.1;
    std::string student_init = "adapt";         // adapt | fresh
    std::string distill_states = "interpolate";  // interpolate | teacher
    int timing_warmup = 10;

    // schedule search
    int o3s_nfe = 3;
    double o3s_tol = 1e-3;
    int o3s_max_iter = 30;
    std::string o3s_bounds = "neighbors";  // neighbors | printed
    int o3s_eval_size = 2048;

    // evaluation
    std::optional<int> nfe;  // sampling steps for sample/eval; model default when unset
    int projections = kDefaultProjections;
    double mmd_bandwidth = 0.5;
    int noise_floor_trials = 5;

    std::uint64_t seed = 0;
    std::string out = "runs";

    void validate() const;

    DatasetSpec dataset_spec() const;
    /// Architecture for the configured dataset (condition table sized to its classes).
    Architecture architecture() const;
    /// Guidance as used by the teacher; off for unconditional datasets.
    CfgConfig guidance() const;
    TeacherTrainConfig teacher_config() const;
    DistillConfig distill_config() const;
    O3sConfig o3s_config(int nfe) const;

    /// Named stream of the root seed.
    std::uint64_t stream(const char* name) const;

    Json to_json() const;
    static RunConfig from_json(const Json& j);
    static RunConfig load(const std::filesystem::path& path);
};

/// Command-line values that take precedence over the config file.
struct Overrides {
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> nfe;
    std::optional<int> teacher_nfe;
};

/// Config file (if any), then the output-root environment variable, then flags.
RunConfig resolve_config(const Overrides& overrides);

}  // namespace flowlab
