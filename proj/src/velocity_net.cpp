#include "flowlab/velocity_net.hpp"

#include <cmath>
#include <string>

#include "flowlab/errors.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/time_embedding.hpp"

namespace flowlab {

namespace {

constexpr const char* kTimeWeight = "time_embed.weight";
constexpr const char* kTimeBias = "time_embed.bias";
constexpr const char* kCondTable = "cond_embed.weight";
constexpr const char* kTimeProj = "time_proj.weight";

std::string layer_weight(std::size_t i) { return "layers." + std::to_string(i) + ".weight"; }
std::string layer_bias(std::size_t i) { return "layers." + std::to_string(i) + ".bias"; }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix silu(const Matrix& x) {
    return x.unaryExpr([](double v) { return v * sigmoid(v); });
}

Matrix silu_grad(const Matrix& x) {
    return x.unaryExpr([](double v) {
        const double s = sigmoid(v);
        return s * (1.0 + v * (1.0 - s));
    });
}

std::size_t as_size(int v) { return static_cast<std::size_t>(v); }

void add_shared_layout(ParamStore& p, const Architecture& arch) {
    const auto m = as_size(arch.time_dim);
    p.add(kTimeWeight, {m, m});
    p.add(kTimeBias, {m});
    p.add(kCondTable, {as_size(arch.cond_vocab), as_size(arch.cond_dim)});
    int fan_in = arch.trunk_input();
    for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
        p.add(layer_weight(i), {as_size(arch.hidden[i]), as_size(fan_in)});
        p.add(layer_bias(i), {as_size(arch.hidden[i])});
        fan_in = arch.hidden[i];
    }
    const std::size_t last = arch.hidden.size();
    p.add(layer_weight(last), {as_size(arch.dim), as_size(fan_in)});
    p.add(layer_bias(last), {as_size(arch.dim)});
}

void init_random(ParamStore& p, std::uint64_t seed) {
    Rng rng(seed);
    for (auto& entry : p) {
        if (entry.name() == kTimeProj)
            continue;
        if (entry.name() == kCondTable) {
            for (double& v : entry.values())
                v = rng.normal();
        } else if (entry.shape().size() == 2) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(entry.shape()[1]));
            for (double& v : entry.values())
                v = rng.uniform(-bound, bound);
        }
    }
}

void check_batch(const Architecture& arch, const Matrix& z, Eigen::Index times, std::span<const int> labels) {
    if (z.cols() != arch.dim)
        throw ShapeError("input has " + std::to_string(z.cols()) + " columns, expected " + std::to_string(arch.dim));
    if (times != z.rows() || static_cast<Eigen::Index>(labels.size()) != z.rows())
        throw ShapeError("batch of " + std::to_string(z.rows()) + " rows needs matching times and labels");
    for (int c : labels) {
        if (c != kNullCondition && (c < 0 || c >= arch.num_classes()))
            throw ArgumentError("condition label " + std::to_string(c) + " outside [0, " +
                                std::to_string(arch.num_classes()) + ")");
    }
}

// e = silu(sin(t) W^T + b)
Matrix embed_times(const ParamStore& p, const Architecture& arch, const Eigen::VectorXd& t, Matrix* sin_out,
                   Matrix* pre_out) {
    Matrix sin = time_embed_batch(t, arch.time_dim);
    Matrix pre = sin * p.at(kTimeWeight).matrix().transpose();
    pre.rowwise() += p.at(kTimeBias).vector();
    Matrix emb = silu(pre);
    if (sin_out)
        *sin_out = std::move(sin);
    if (pre_out)
        *pre_out = std::move(pre);
    return emb;
}

void embed_backward(const Matrix& sin, const Matrix& pre, const Matrix& d_emb, ParamStore& grads) {
    const Matrix d_pre = d_emb.cwiseProduct(silu_grad(pre));
    grads.at(kTimeWeight).matrix() += d_pre.transpose() * sin;
    grads.at(kTimeBias).vector() += d_pre.colwise().sum();
}

Matrix trunk_forward(const ParamStore& p, const Architecture& arch, const Matrix& z, const Matrix& time_feat,
                     std::span<const int> labels, Tape* tape) {
    const Eigen::Index batch = z.rows();
    const auto table = p.at(kCondTable).matrix();
    Matrix x(batch, arch.trunk_input());
    x.leftCols(arch.dim) = z;
    x.middleCols(arch.dim, arch.time_dim) = time_feat;
    std::vector<int> rows(labels.size());
    for (Eigen::Index i = 0; i < batch; ++i) {
        const int row = labels[i] == kNullCondition ? arch.null_row() : labels[i];
        rows[i] = row;
        x.row(i).rightCols(arch.cond_dim) = table.row(row);
    }
    if (tape) {
        tape->cond_rows = std::move(rows);
        tape->layer_inputs.clear();
        tape->layer_pre.clear();
    }

    const std::size_t n_layers = arch.hidden.size() + 1;
    for (std::size_t i = 0; i < n_layers; ++i) {
        Matrix pre = x * p.at(layer_weight(i)).matrix().transpose();
        pre.rowwise() += p.at(layer_bias(i)).vector();
        if (tape)
            tape->layer_inputs.push_back(std::move(x));
        if (i + 1 == n_layers)
            return pre;
        x = silu(pre);
        if (tape)
            tape->layer_pre.push_back(std::move(pre));
    }
    return {};
}

// Accumulates trunk gradients and returns dLoss/d(time features).
Matrix trunk_backward(const ParamStore& p, const Architecture& arch, const Tape& tape, const Matrix& grad_output,
                      ParamStore& grads) {
    const std::size_t n_layers = arch.hidden.size() + 1;
    if (tape.layer_inputs.size() != n_layers || grad_output.rows() != tape.layer_inputs.front().rows() ||
        grad_output.cols() != arch.dim)
        throw ShapeError("gradient does not match the recorded forward pass");

    Matrix d_y = grad_output;
    Matrix d_x;
    for (std::size_t k = n_layers; k-- > 0;) {
        const auto w = p.at(layer_weight(k)).matrix();
        grads.at(layer_weight(k)).matrix() += d_y.transpose() * tape.layer_inputs[k];
        grads.at(layer_bias(k)).vector() += d_y.colwise().sum();
        d_x = d_y * w;
        if (k > 0)
            d_y = d_x.cwiseProduct(silu_grad(tape.layer_pre[k - 1]));
    }

    auto table_grad = grads.at(kCondTable).matrix();
    for (std::size_t i = 0; i < tape.cond_rows.size(); ++i)
        table_grad.row(tape.cond_rows[i]) += d_x.row(static_cast<Eigen::Index>(i)).rightCols(arch.cond_dim);
    return d_x.middleCols(arch.dim, arch.time_dim);
}

}  // namespace

void Architecture::validate() const {
    if (dim < 1)
        throw ConfigError("architecture dim must be >= 1");
    if (time_dim < 2 || time_dim % 2 != 0)
        throw ConfigError("time embedding dimension must be even and >= 2");
    if (cond_vocab < 1)
        throw ConfigError("cond_vocab must include the null-condition row");
    if (cond_dim < 1)
        throw ConfigError("cond_dim must be >= 1");
    for (int h : hidden) {
        if (h < 1)
            throw ConfigError("hidden widths must be positive");
    }
}

ParamStore teacher_layout(const Architecture& arch) {
    arch.validate();
    ParamStore p;
    add_shared_layout(p, arch);
    return p;
}

ParamStore student_layout(const Architecture& arch) {
    ParamStore p = teacher_layout(arch);
    p.add(kTimeProj, {as_size(arch.time_dim), as_size(2 * arch.time_dim)});
    return p;
}

VelocityNet::VelocityNet(const Architecture& arch, std::uint64_t seed) : m_arch(arch), m_params(teacher_layout(arch)) {
    init_random(m_params, seed);
}

VelocityNet::VelocityNet(const Architecture& arch, ParamStore params) : m_arch(arch), m_params(std::move(params)) {
    if (!m_params.same_layout(teacher_layout(arch)))
        throw ShapeError("parameter store does not match the teacher architecture");
}

Matrix VelocityNet::forward(const Matrix& z, const Eigen::VectorXd& t, std::span<const int> labels, Tape* tape) const {
    check_batch(m_arch, z, t.size(), labels);
    Matrix sin, pre;
    Matrix emb = embed_times(m_params, m_arch, t, tape ? &sin : nullptr, tape ? &pre : nullptr);
    Matrix out = trunk_forward(m_params, m_arch, z, emb, labels, tape);
    if (tape) {
        tape->dual_time = false;
        tape->sin_t = std::move(sin);
        tape->pre_t = std::move(pre);
        tape->emb_t = std::move(emb);
        tape->recorded = true;
    }
    return out;
}

Vector VelocityNet::forward(const Vector& z, double t, int label) const {
    Eigen::VectorXd times(1);
    times[0] = t;
    const int labels[1] = {label};
    return forward(Matrix(z.transpose()), times, labels).row(0).transpose();
}

ParamStore VelocityNet::backward(const Tape& tape, const Matrix& grad_output) const {
    if (!tape.recorded)
        throw StateError("backward() called without a recorded forward pass");
    if (tape.dual_time)
        throw StateError("tape was recorded by a dual-time network");
    ParamStore grads = m_params.zeros_like();
    const Matrix d_emb = trunk_backward(m_params, m_arch, tape, grad_output, grads);
    embed_backward(tape.sin_t, tape.pre_t, d_emb, grads);
    return grads;
}

DualTimeVelocityNet::DualTimeVelocityNet(const Architecture& arch, std::uint64_t seed)
    : m_arch(arch), m_params(student_layout(arch)) {
    init_random(m_params, seed);
    // Fresh students still start from the identity-on-e_t projection.
    auto proj = m_params.at(kTimeProj).matrix();
    for (int i = 0; i < arch.time_dim; ++i)
        proj(i, i) = 1.0;
}

DualTimeVelocityNet::DualTimeVelocityNet(const Architecture& arch, ParamStore params)
    : m_arch(arch), m_params(std::move(params)) {
    if (!m_params.same_layout(student_layout(arch)))
        throw ShapeError("parameter store does not match the student architecture");
}

Matrix DualTimeVelocityNet::forward(const Matrix& z, const Eigen::VectorXd& t, const Eigen::VectorXd& r,
                                    std::span<const int> labels, Tape* tape) const {
    check_batch(m_arch, z, t.size(), labels);
    if (r.size() != t.size())
        throw ShapeError("t and r must have the same length");
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        if (t[i] > r[i])
            throw OrderingError("student interval requires t <= r, got t=" + std::to_string(t[i]) +
                                " r=" + std::to_string(r[i]));
    }
    const int m = m_arch.time_dim;
    Matrix sin_t, pre_t, sin_r, pre_r;
    Matrix emb_t = embed_times(m_params, m_arch, t, tape ? &sin_t : nullptr, tape ? &pre_t : nullptr);
    Matrix emb_r = embed_times(m_params, m_arch, r, tape ? &sin_r : nullptr, tape ? &pre_r : nullptr);
    Matrix cat(z.rows(), 2 * m);
    cat.leftCols(m) = emb_t;
    cat.rightCols(m) = emb_r;
    const Matrix mapped = cat * m_params.at(kTimeProj).matrix().transpose();
    Matrix out = trunk_forward(m_params, m_arch, z, mapped, labels, tape);
    if (tape) {
        tape->dual_time = true;
        tape->sin_t = std::move(sin_t);
        tape->pre_t = std::move(pre_t);
        tape->emb_t = std::move(emb_t);
        tape->sin_r = std::move(sin_r);
        tape->pre_r = std::move(pre_r);
        tape->emb_r = std::move(emb_r);
        tape->emb_cat = std::move(cat);
        tape->recorded = true;
    }
    return out;
}

Vector DualTimeVelocityNet::forward(const Vector& z, double t, double r, int label) const {
    Eigen::VectorXd ts(1), rs(1);
    ts[0] = t;
    rs[0] = r;
    const int labels[1] = {label};
    return forward(Matrix(z.transpose()), ts, rs, labels).row(0).transpose();
}

ParamStore DualTimeVelocityNet::backward(const Tape& tape, const Matrix& grad_output) const {
    if (!tape.recorded)
        throw StateError("backward() called without a recorded forward pass");
    if (!tape.dual_time)
        throw StateError("tape was recorded by a single-time network");
    const int m = m_arch.time_dim;
    ParamStore grads = m_params.zeros_like();
    const Matrix d_mapped = trunk_backward(m_params, m_arch, tape, grad_output, grads);
    grads.at(kTimeProj).matrix() += d_mapped.transpose() * tape.emb_cat;
    const Matrix d_cat = d_mapped * m_params.at(kTimeProj).matrix();
    embed_backward(tape.sin_t, tape.pre_t, d_cat.leftCols(m), grads);
    embed_backward(tape.sin_r, tape.pre_r, d_cat.rightCols(m), grads);
    return grads;
}

}  // namespace flowlab
