#include "flowlab/flow.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <json.hpp>

#include "flowlab/errors.hpp"
#include "flowlab/rng.hpp"

namespace flowlab {

StepSchedule::StepSchedule(std::vector<double> times) : m_times(std::move(times)) {
    if (m_times.size() < 2)
        throw ValidationError("a schedule needs at least two time points");
    if (m_times.front() != 0.0 || m_times.back() != 1.0)
        throw ValidationError("a schedule must start at 0 and end at 1");
    for (std::size_t i = 1; i < m_times.size(); ++i) {
        if (!(m_times[i] > m_times[i - 1]))
            throw ValidationError("schedule times must be strictly increasing (index " + std::to_string(i) + ")");
    }
}

StepSchedule StepSchedule::uniform(int nfe) {
    if (nfe < 1)
        throw ValidationError("schedule NFE must be >= 1");
    std::vector<double> times(static_cast<std::size_t>(nfe) + 1);
    for (int i = 0; i <= nfe; ++i)
        times[static_cast<std::size_t>(i)] = static_cast<double>(i) / nfe;
    return StepSchedule(std::move(times));
}

std::string StepSchedule::to_json() const {
    return nlohmann::json(m_times).dump();
}

StepSchedule StepSchedule::from_json(const std::string& text) {
    std::vector<double> times;
    try {
        times = nlohmann::json::parse(text).get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("schedule must be a JSON array of numbers: ") + e.what());
    }
    return StepSchedule(std::move(times));
}

Vector interpolate(const Vector& z0, const Vector& z1, double t) {
    if (z0.size() != z1.size())
        throw ShapeError("interpolate endpoints differ in dimension");
    return (1.0 - t) * z0 + t * z1;
}

Matrix interpolate(const Matrix& z0, const Matrix& z1, const Eigen::VectorXd& t) {
    if (z0.rows() != z1.rows() || z0.cols() != z1.cols() || t.size() != z0.rows())
        throw ShapeError("interpolate batch shapes do not match");
    Matrix out(z0.rows(), z0.cols());
    for (Eigen::Index i = 0; i < z0.rows(); ++i)
        out.row(i) = (1.0 - t[i]) * z0.row(i) + t[i] * z1.row(i);
    return out;
}

LossEval cfm_loss(const VelocityNet& net, const Matrix& z0, const Matrix& z1, std::span<const int> labels,
                  const Eigen::VectorXd& t, Tape* tape) {
    if (z0.rows() == 0)
        throw ArgumentError("cfm_loss needs a non-empty batch");
    const Matrix zt = interpolate(z0, z1, t);
    const Matrix residual = net.forward(zt, t, labels, tape) - (z1 - z0);
    const auto rows = static_cast<double>(z0.rows());
    return {residual.squaredNorm() / rows, (2.0 / rows) * residual};
}

Matrix velocity_cfg(const VelocityNet& net, const Matrix& z, const Eigen::VectorXd& t, std::span<const int> labels,
                    const CfgConfig& cfg) {
    if (!std::isfinite(cfg.weight))
        throw ArgumentError("guidance weight must be finite");
    if (cfg.enabled) {
        for (int c : labels) {
            if (c == kNullCondition)
                throw ArgumentError("guidance requires a real condition, got the null token");
        }
    }
    Matrix v_cond = net.forward(z, t, labels);
    if (!cfg.active())
        return v_cond;
    const std::vector<int> null_labels(labels.size(), kNullCondition);
    const Matrix v_null = net.forward(z, t, null_labels);
    return v_cond + cfg.weight * (v_cond - v_null);
}

Vector velocity_cfg(const VelocityNet& net, const Vector& z, double t, int label, const CfgConfig& cfg) {
    Eigen::VectorXd ts(1);
    ts[0] = t;
    const int labels[1] = {label};
    return velocity_cfg(net, Matrix(z.transpose()), ts, labels, cfg).row(0).transpose();
}

Vector euler_step(const Vector& z, double t0, double t1, const Vector& v) {
    if (!(t1 > t0))
        throw OrderingError("euler_step needs t1 > t0");
    return z + (t1 - t0) * v;
}

Matrix euler_step(const Matrix& z, double t0, double t1, const Matrix& v) {
    if (!(t1 > t0))
        throw OrderingError("euler_step needs t1 > t0");
    return z + (t1 - t0) * v;
}

SampleResult sample(const VelocityNet& net, const Matrix& z0, const StepSchedule& schedule, std::span<const int> labels,
                    const CfgConfig& cfg, bool keep_trajectory) {
    SampleResult result;
    Matrix z = z0;
    if (keep_trajectory)
        result.trajectory.push_back(z);
    const auto& times = schedule.times();
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const Eigen::VectorXd t = Eigen::VectorXd::Constant(z.rows(), times[k]);
        z = euler_step(z, times[k], times[k + 1], velocity_cfg(net, z, t, labels, cfg));
        if (keep_trajectory)
            result.trajectory.push_back(z);
    }
    result.final = std::move(z);
    return result;
}

double cosine_lr(double lr, double final_fraction, int step, int total_steps) {
    if (total_steps <= 1 || final_fraction == 1.0)
        return lr;
    const double progress = static_cast<double>(step) / static_cast<double>(total_steps - 1);
    const double floor = lr * final_fraction;
    return floor + 0.5 * (lr - floor) * (1.0 + std::cos(std::numbers::pi * progress));
}

Matrix gaussian_noise(std::size_t rows, int dim, std::uint64_t seed) {
    Rng rng(seed);
    Matrix z(static_cast<Eigen::Index>(rows), dim);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        for (Eigen::Index k = 0; k < z.cols(); ++k)
            z(i, k) = rng.normal();
    return z;
}

TeacherTrainResult train_teacher(const SampleBatch& dataset, const Architecture& arch, const TeacherTrainConfig& config) {
    dataset.validate();
    if (dataset.dim() != arch.dim)
        throw ShapeError("dataset dimension does not match the architecture");
    if (config.steps < 0 || config.batch < 1)
        throw ConfigError("teacher training needs steps >= 0 and batch >= 1");

    TeacherTrainResult result{VelocityNet(arch, config.init_seed), {}};
    VelocityNet& net = result.net;
    AdamState adam(net.params(), config.adam);
    Rng rng(config.train_seed);
    const auto batch = static_cast<Eigen::Index>(config.batch);

    Matrix z0(batch, arch.dim), z1(batch, arch.dim);
    Eigen::VectorXd t(batch);
    std::vector<int> labels(static_cast<std::size_t>(batch));
    Tape tape;
    result.loss_curve.reserve(static_cast<std::size_t>(config.steps));

    for (int step = 0; step < config.steps; ++step) {
        for (Eigen::Index i = 0; i < batch; ++i) {
            const std::size_t idx = rng.index(dataset.size());
            z1.row(i) = dataset.points.row(static_cast<Eigen::Index>(idx));
            labels[static_cast<std::size_t>(i)] = dataset.labels[idx];
        }
        for (Eigen::Index i = 0; i < batch; ++i)
            for (int k = 0; k < arch.dim; ++k)
                z0(i, k) = rng.normal();
        for (Eigen::Index i = 0; i < batch; ++i)
            t[i] = rng.uniform();
        for (auto& c : labels) {
            const bool drop = rng.uniform() < config.cond_dropout;
            if (drop)
                c = kNullCondition;
        }

        const LossEval loss = cfm_loss(net, z0, z1, labels, t, &tape);
        if (!std::isfinite(loss.value))
            throw NumericalError("teacher loss diverged at step " + std::to_string(step));
        result.loss_curve.push_back(loss.value);
        adam.set_lr(cosine_lr(config.adam.lr, config.final_lr_fraction, step, config.steps));
        adam.apply(net.params(), net.backward(tape, loss.grad_output));
    }
    return result;
}

}  // namespace flowlab
