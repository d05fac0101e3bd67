#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowlab/adam.hpp"
#include "flowlab/sample_batch.hpp"
#include "flowlab/tensor.hpp"
#include "flowlab/velocity_net.hpp"

namespace flowlab {

/// Time grid 0 = t_0 < t_1 < ... < t_n = 1, n = NFE >= 1.
class StepSchedule {
public:
    /// Throws ValidationError when the invariants do not hold.
    explicit StepSchedule(std::vector<double> times);
    static StepSchedule uniform(int nfe);

    int nfe() const { return static_cast<int>(m_times.size()) - 1; }
    const std::vector<double>& times() const { return m_times; }
    double operator[](std::size_t i) const { return m_times[i]; }

    /// JSON array of floats, shortest round-trip formatting.
    std::string to_json() const;
    static StepSchedule from_json(const std::string& text);

    bool operator==(const StepSchedule&) const = default;

private:
    std::vector<double> m_times;
};

/// Classifier-free guidance: v_c + weight * (v_c - v_null).
struct CfgConfig {
    double weight = 3.0;
    bool enabled = true;

    bool active() const { return enabled && weight != 0.0; }
};

/// (1 - t) z0 + t z1.
Vector interpolate(const Vector& z0, const Vector& z1, double t);
/// Row-wise interpolation with one t per row.
Matrix interpolate(const Matrix& z0, const Matrix& z1, const Eigen::VectorXd& t);

struct LossEval {
    double value = 0.0;
    /// dLoss/dOutput, ready for backward().
    Matrix grad_output;
};

/// Conditional flow-matching loss: mean over rows of |v(z_t, t, c) - (z1 - z0)|^2.
LossEval cfm_loss(const VelocityNet& net, const Matrix& z0, const Matrix& z1, std::span<const int> labels,
                  const Eigen::VectorXd& t, Tape* tape = nullptr);

/// Guided velocity. With guidance active every label must be a real class.
Matrix velocity_cfg(const VelocityNet& net, const Matrix& z, const Eigen::VectorXd& t, std::span<const int> labels,
                    const CfgConfig& cfg);
Vector velocity_cfg(const VelocityNet& net, const Vector& z, double t, int label, const CfgConfig& cfg);

/// z + (t1 - t0) v; throws OrderingError unless t1 > t0.
Vector euler_step(const Vector& z, double t0, double t1, const Vector& v);
Matrix euler_step(const Matrix& z, double t0, double t1, const Matrix& v);

struct SampleResult {
    Matrix final;
    /// States at t_0 ... t_n (empty when not requested).
    std::vector<Matrix> trajectory;
};

/// Euler integration of the guided teacher field over the schedule.
SampleResult sample(const VelocityNet& net, const Matrix& z0, const StepSchedule& schedule, std::span<const int> labels,
                    const CfgConfig& cfg, bool keep_trajectory = true);

struct TeacherTrainConfig {
    int steps = 10000;
    int batch = 256;
    AdamConfig adam{};
    /// Cosine decay from adam.lr to adam.lr * final_lr_fraction; 1 keeps lr constant.
    double final_lr_fraction = 1.0;
    double cond_dropout = 0.2;
    std::uint64_t init_seed = 1;
    std::uint64_t train_seed = 2;
};

struct TeacherTrainResult {
    VelocityNet net;
    std::vector<double> loss_curve;
};

/// Minibatches are drawn with replacement from `dataset`; z0 ~ N(0, I), t ~ U[0, 1]
/// per row, and real labels are replaced by the null token with probability
/// cond_dropout. Throws NumericalError if the loss diverges.
TeacherTrainResult train_teacher(const SampleBatch& dataset, const Architecture& arch, const TeacherTrainConfig& config);

/// Learning rate at `step` (0-based) under cosine decay.
double cosine_lr(double lr, double final_fraction, int step, int total_steps);

/// Draws a B x d standard normal matrix.
Matrix gaussian_noise(std::size_t rows, int dim, std::uint64_t seed);

}  // namespace flowlab
