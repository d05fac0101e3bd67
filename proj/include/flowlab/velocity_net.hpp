#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flowlab/param_store.hpp"
#include "flowlab/tensor.hpp"

namespace flowlab {

/// Label value selecting the learned null-condition row.
inline constexpr int kNullCondition = -1;

/// Shape of a velocity field. The trunk is an MLP over [z, time features, condition
/// embedding] with SiLU between hidden layers; output dimension equals `dim`.
struct Architecture {
    int dim = 2;
    std::vector<int> hidden{128, 128, 128};
    int time_dim = 32;
    /// Rows of the condition table, including the trailing null-condition row.
    int cond_vocab = 1;
    int cond_dim = 16;

    int num_classes() const { return cond_vocab - 1; }
    int null_row() const { return cond_vocab - 1; }
    int trunk_input() const { return dim + time_dim + cond_dim; }
    void validate() const;

    bool operator==(const Architecture&) const = default;
};

/// Activations recorded by a forward pass for a later backward().
struct Tape {
    bool recorded = false;
    bool dual_time = false;
    Matrix sin_t, pre_t, emb_t;
    Matrix sin_r, pre_r, emb_r;
    Matrix emb_cat;
    std::vector<int> cond_rows;
    std::vector<Matrix> layer_inputs;
    std::vector<Matrix> layer_pre;

    void clear() { *this = Tape{}; }
};

/// Instantaneous velocity field v(z, t, c). Parameters:
///   time_embed.{weight,bias}  learned layer applied to sinusoidal features
///   cond_embed.weight         condition table (cond_vocab x cond_dim)
///   layers.{i}.{weight,bias}  trunk MLP
class VelocityNet {
public:
    VelocityNet(const Architecture& arch, std::uint64_t seed);
    VelocityNet(const Architecture& arch, ParamStore params);

    const Architecture& arch() const { return m_arch; }
    ParamStore& params() { return m_params; }
    const ParamStore& params() const { return m_params; }

    /// Batched forward: z is B x dim, t and labels have B entries.
    Matrix forward(const Matrix& z, const Eigen::VectorXd& t, std::span<const int> labels,
                   Tape* tape = nullptr) const;
    Vector forward(const Vector& z, double t, int label) const;

    /// Gradient of a scalar loss with respect to every parameter, given
    /// dLoss/dOutput for the forward pass recorded on `tape`.
    ParamStore backward(const Tape& tape, const Matrix& grad_output) const;

private:
    Architecture m_arch;
    ParamStore m_params;
};

/// Average-velocity field u(z, t, r, c). Both times go through the same embedding
/// layer; the concatenation [e_t, e_r] is projected back to time_dim by
/// time_proj.weight (time_dim x 2 time_dim) and fed where the instantaneous
/// field feeds e_t.
class DualTimeVelocityNet {
public:
    DualTimeVelocityNet(const Architecture& arch, std::uint64_t seed);
    DualTimeVelocityNet(const Architecture& arch, ParamStore params);

    const Architecture& arch() const { return m_arch; }
    ParamStore& params() { return m_params; }
    const ParamStore& params() const { return m_params; }

    /// Throws OrderingError if any t > r.
    Matrix forward(const Matrix& z, const Eigen::VectorXd& t, const Eigen::VectorXd& r,
                   std::span<const int> labels, Tape* tape = nullptr) const;
    Vector forward(const Vector& z, double t, double r, int label) const;

    ParamStore backward(const Tape& tape, const Matrix& grad_output) const;

private:
    Architecture m_arch;
    ParamStore m_params;
};

/// Parameter layout of a VelocityNet (all zero).
ParamStore teacher_layout(const Architecture& arch);
/// Parameter layout of a DualTimeVelocityNet (all zero).
ParamStore student_layout(const Architecture& arch);

}  // namespace flowlab
