#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "flowlab/adam.hpp"
#include "flowlab/flow.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/velocity_net.hpp"

namespace flowlab {

inline constexpr double kDefaultIntervalEps = 1e-3;

/// Distillation interval with 0 <= t < r <= 1 and r - t >= eps_min.
struct TimeInterval {
    double t = 0.0;
    double r = 1.0;

    /// Throws IntervalError when the invariants do not hold.
    static TimeInterval make(double t, double r, double eps_min = kDefaultIntervalEps);
    double length() const { return r - t; }
};

/// t ~ U[0, 1 - eps], r ~ U[t + eps, 1].
TimeInterval sample_interval(Rng& rng, double eps_min = kDefaultIntervalEps);

/// A velocity field evaluated row-wise at per-row times.
using VelocityField = std::function<Matrix(const Matrix& z, const Eigen::VectorXd& t)>;

/// Euler-accumulated displacement sum_k (t_{k+1} - t_k) v(z_{t_k}, t_k) over n uniform
/// sub-steps of each row's [t_i, r_i]. Throws ArgumentError if n < 1.
Matrix integrate_displacement(const VelocityField& field, const Matrix& z_t, const Eigen::VectorXd& t,
                              const Eigen::VectorXd& r, int n);

/// integrate_displacement with the guided teacher velocity.
Matrix teacher_displacement(const VelocityNet& teacher, const Matrix& z_t, const Eigen::VectorXd& t,
                            const Eigen::VectorXd& r, int n, std::span<const int> labels, const CfgConfig& cfg);
Vector teacher_displacement(const VelocityNet& teacher, const Vector& z_t, const TimeInterval& interval, int n,
                            int label, const CfgConfig& cfg);

struct AvgVelocity {
    Vector value;
    TimeInterval interval;
};

/// displacement / (r - t). Throws IntervalError when r <= t.
AvgVelocity avg_velocity_target(const Vector& displacement, const TimeInterval& interval);
Matrix avg_velocity_target(const Matrix& displacement, const Eigen::VectorXd& t, const Eigen::VectorXd& r);

struct DistillBatch {
    Matrix z_t;
    Eigen::VectorXd t;
    Eigen::VectorXd r;
    std::vector<int> labels;
};

/// Mean over rows of |u(z_t, t, r, c) - target|^2; `target` is a constant.
LossEval distill_loss(const DualTimeVelocityNet& student, const DistillBatch& batch, const Matrix& target,
                      Tape* tape = nullptr);
/// Same, building the target from the teacher first.
LossEval distill_loss(const DualTimeVelocityNet& student, const VelocityNet& teacher, const DistillBatch& batch,
                      int teacher_nfe, const CfgConfig& cfg, Tape* tape = nullptr);

/// Copies every teacher parameter and sets time_proj.weight = [I 0], so the
/// student reproduces the teacher exactly and ignores r until trained.
DualTimeVelocityNet adapt_init(const VelocityNet& teacher);

enum class StudentInit { kAdapt, kFresh };
/// Where distillation states z_t come from.
enum class StateSource { kInterpolate, kTeacherTrajectory };

struct DistillConfig {
    int teacher_nfe = 16;
    CfgConfig cfg{};
    double interval_eps = kDefaultIntervalEps;
    int steps = 3000;
    int batch = 256;
    AdamConfig adam{};
    double final_lr_fraction = 1.0;
    StudentInit init = StudentInit::kAdapt;
    StateSource states = StateSource::kInterpolate;
    std::uint64_t init_seed = 3;
    std::uint64_t train_seed = 4;
    std::uint64_t interval_seed = 5;
    /// Steps excluded from the median timing.
    int timing_warmup = 10;
};

struct StudentTrainResult {
    DualTimeVelocityNet student;
    std::vector<double> loss_curve;
    std::vector<double> step_seconds;
    double median_step_seconds = 0.0;
};

StudentTrainResult train_student(const VelocityNet& teacher, const SampleBatch& dataset, const DistillConfig& config);

/// Average velocity u(z, t, r) evaluated row-wise.
using AverageField =
    std::function<Matrix(const Matrix& z, const Eigen::VectorXd& t, const Eigen::VectorXd& r)>;

/// z_{k+1} = z_k + (t_{k+1} - t_k) u(z_k, t_k, t_{k+1}).
Matrix sample_average(const AverageField& field, const Matrix& z0, const StepSchedule& schedule);

/// sample_average with the student; no guidance.
Matrix sample_student(const DualTimeVelocityNet& student, const Matrix& z0, const StepSchedule& schedule,
                      std::span<const int> labels);

/// Median of per-step seconds after dropping the first `warmup` entries.
double median_seconds(std::span<const double> seconds, int warmup);

}  // namespace flowlab
