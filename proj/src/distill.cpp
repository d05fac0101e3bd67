#include "flowlab/distill.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "flowlab/errors.hpp"

namespace flowlab {

TimeInterval TimeInterval::make(double t, double r, double eps_min) {
    if (!(t >= 0.0 && t < r && r <= 1.0))
        throw IntervalError("interval needs 0 <= t < r <= 1, got [" + std::to_string(t) + ", " + std::to_string(r) + "]");
    if (r - t < eps_min)
        throw IntervalError("interval shorter than eps_min");
    return {t, r};
}

TimeInterval sample_interval(Rng& rng, double eps_min) {
    if (!(eps_min > 0.0 && eps_min < 1.0))
        throw ConfigError("interval eps_min must lie in (0, 1)");
    const double t = rng.uniform(0.0, 1.0 - eps_min);
    double r = rng.uniform(t + eps_min, 1.0);
    // Guard against rounding pushing r - t just under eps_min.
    r = std::clamp(r, t + eps_min, 1.0);
    return {t, r};
}

Matrix integrate_displacement(const VelocityField& field, const Matrix& z_t, const Eigen::VectorXd& t,
                              const Eigen::VectorXd& r, int n) {
    if (n < 1)
        throw ArgumentError("teacher sub-steps must be >= 1, got " + std::to_string(n));
    if (t.size() != z_t.rows() || r.size() != z_t.rows())
        throw ShapeError("interval endpoints must have one entry per row");
    if (!z_t.allFinite())
        throw ArgumentError("integration start state is not finite");

    const Eigen::Index rows = z_t.rows();
    Matrix z = z_t;
    Matrix displacement = Matrix::Zero(rows, z_t.cols());
    Eigen::VectorXd tk = t;
    Eigen::VectorXd tnext(rows);
    Eigen::VectorXd dt(rows);
    for (int k = 0; k < n; ++k) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            tnext[i] = k + 1 == n ? r[i] : t[i] + (r[i] - t[i]) * (static_cast<double>(k + 1) / n);
            dt[i] = tnext[i] - tk[i];
        }
        const Matrix v = field(z, tk);
        const Matrix step = dt.asDiagonal() * v;
        displacement += step;
        z += step;
        tk = tnext;
    }
    return displacement;
}

Matrix teacher_displacement(const VelocityNet& teacher, const Matrix& z_t, const Eigen::VectorXd& t,
                            const Eigen::VectorXd& r, int n, std::span<const int> labels, const CfgConfig& cfg) {
    const VelocityField field = [&](const Matrix& z, const Eigen::VectorXd& tk) {
        return velocity_cfg(teacher, z, tk, labels, cfg);
    };
    return integrate_displacement(field, z_t, t, r, n);
}

Vector teacher_displacement(const VelocityNet& teacher, const Vector& z_t, const TimeInterval& interval, int n,
                            int label, const CfgConfig& cfg) {
    Eigen::VectorXd t(1), r(1);
    t[0] = interval.t;
    r[0] = interval.r;
    const int labels[1] = {label};
    return teacher_displacement(teacher, Matrix(z_t.transpose()), t, r, n, labels, cfg).row(0).transpose();
}

AvgVelocity avg_velocity_target(const Vector& displacement, const TimeInterval& interval) {
    if (!(interval.r > interval.t))
        throw IntervalError("average velocity needs r > t");
    return {displacement / (interval.r - interval.t), interval};
}

Matrix avg_velocity_target(const Matrix& displacement, const Eigen::VectorXd& t, const Eigen::VectorXd& r) {
    if (t.size() != displacement.rows() || r.size() != displacement.rows())
        throw ShapeError("interval endpoints must have one entry per row");
    Matrix out(displacement.rows(), displacement.cols());
    for (Eigen::Index i = 0; i < displacement.rows(); ++i) {
        if (!(r[i] > t[i]))
            throw IntervalError("average velocity needs r > t (row " + std::to_string(i) + ")");
        out.row(i) = displacement.row(i) / (r[i] - t[i]);
    }
    return out;
}

LossEval distill_loss(const DualTimeVelocityNet& student, const DistillBatch& batch, const Matrix& target, Tape* tape) {
    if (batch.z_t.rows() == 0)
        throw ArgumentError("distill_loss needs a non-empty batch");
    const Matrix residual = student.forward(batch.z_t, batch.t, batch.r, batch.labels, tape) - target;
    const auto rows = static_cast<double>(batch.z_t.rows());
    return {residual.squaredNorm() / rows, (2.0 / rows) * residual};
}

LossEval distill_loss(const DualTimeVelocityNet& student, const VelocityNet& teacher, const DistillBatch& batch,
                      int teacher_nfe, const CfgConfig& cfg, Tape* tape) {
    const Matrix displacement = teacher_displacement(teacher, batch.z_t, batch.t, batch.r, teacher_nfe, batch.labels, cfg);
    return distill_loss(student, batch, avg_velocity_target(displacement, batch.t, batch.r), tape);
}

DualTimeVelocityNet adapt_init(const VelocityNet& teacher) {
    const Architecture& arch = teacher.arch();
    ParamStore params = student_layout(arch);
    for (const auto& entry : teacher.params()) {
        auto dst = params.at(entry.name()).values();
        std::copy(entry.values().begin(), entry.values().end(), dst.begin());
    }
    auto proj = params.at("time_proj.weight").matrix();
    proj.setZero();
    for (int i = 0; i < arch.time_dim; ++i)
        proj(i, i) = 1.0;
    return DualTimeVelocityNet(arch, std::move(params));
}

StudentTrainResult train_student(const VelocityNet& teacher, const SampleBatch& dataset, const DistillConfig& config) {
    dataset.validate();
    const Architecture& arch = teacher.arch();
    if (dataset.dim() != arch.dim)
        throw ShapeError("dataset dimension does not match the teacher");
    if (config.teacher_nfe < 1)
        throw ConfigError("teacher NFE must be >= 1");
    if (config.steps < 0 || config.batch < 1)
        throw ConfigError("distillation needs steps >= 0 and batch >= 1");

    StudentTrainResult result{config.init == StudentInit::kAdapt ? adapt_init(teacher)
                                                                 : DualTimeVelocityNet(arch, config.init_seed),
                              {},
                              {},
                              0.0};
    DualTimeVelocityNet& student = result.student;
    AdamState adam(student.params(), config.adam);
    Rng rng(config.train_seed);
    Rng interval_rng(config.interval_seed);

    const auto batch_rows = static_cast<Eigen::Index>(config.batch);
    Matrix z0(batch_rows, arch.dim), z1(batch_rows, arch.dim);
    DistillBatch batch{Matrix(), Eigen::VectorXd(batch_rows), Eigen::VectorXd(batch_rows),
                       std::vector<int>(static_cast<std::size_t>(batch_rows))};
    Tape tape;

    for (int step = 0; step < config.steps; ++step) {
        const auto start = std::chrono::steady_clock::now();

        for (Eigen::Index i = 0; i < batch_rows; ++i) {
            const std::size_t idx = rng.index(dataset.size());
            z1.row(i) = dataset.points.row(static_cast<Eigen::Index>(idx));
            batch.labels[static_cast<std::size_t>(i)] = dataset.labels[idx];
        }
        for (Eigen::Index i = 0; i < batch_rows; ++i)
            for (int k = 0; k < arch.dim; ++k)
                z0(i, k) = rng.normal();
        for (Eigen::Index i = 0; i < batch_rows; ++i) {
            const TimeInterval iv = sample_interval(interval_rng, config.interval_eps);
            batch.t[i] = iv.t;
            batch.r[i] = iv.r;
        }

        if (config.states == StateSource::kInterpolate) {
            batch.z_t = interpolate(z0, z1, batch.t);
        } else {
            const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(batch_rows);
            batch.z_t = z0 + teacher_displacement(teacher, z0, zeros, batch.t, config.teacher_nfe, batch.labels, config.cfg);
        }

        const LossEval loss = distill_loss(student, teacher, batch, config.teacher_nfe, config.cfg, &tape);
        if (!std::isfinite(loss.value))
            throw NumericalError("distillation loss diverged at step " + std::to_string(step));
        result.loss_curve.push_back(loss.value);
        adam.set_lr(cosine_lr(config.adam.lr, config.final_lr_fraction, step, config.steps));
        adam.apply(student.params(), student.backward(tape, loss.grad_output));

        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        result.step_seconds.push_back(elapsed.count());
    }
    result.median_step_seconds = median_seconds(result.step_seconds, config.timing_warmup);
    return result;
}

Matrix sample_average(const AverageField& field, const Matrix& z0, const StepSchedule& schedule) {
    Matrix z = z0;
    const auto& times = schedule.times();
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const Eigen::VectorXd t = Eigen::VectorXd::Constant(z.rows(), times[k]);
        const Eigen::VectorXd r = Eigen::VectorXd::Constant(z.rows(), times[k + 1]);
        z = euler_step(z, times[k], times[k + 1], field(z, t, r));
    }
    return z;
}

Matrix sample_student(const DualTimeVelocityNet& student, const Matrix& z0, const StepSchedule& schedule,
                      std::span<const int> labels) {
    return sample_average(
        [&](const Matrix& z, const Eigen::VectorXd& t, const Eigen::VectorXd& r) {
            return student.forward(z, t, r, labels);
        },
        z0, schedule);
}

double median_seconds(std::span<const double> seconds, int warmup) {
    std::vector<double> kept;
    const std::size_t skip = std::min(seconds.size(), static_cast<std::size_t>(std::max(warmup, 0)));
    kept.assign(seconds.begin() + static_cast<std::ptrdiff_t>(skip), seconds.end());
    if (kept.empty())
        return 0.0;
    const auto mid = kept.begin() + static_cast<std::ptrdiff_t>(kept.size() / 2);
    std::nth_element(kept.begin(), mid, kept.end());
    if (kept.size() % 2 == 1)
        return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(kept.begin(), mid);
    return 0.5 * (lower + upper);
}

}  // namespace flowlab
