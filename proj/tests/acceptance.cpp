// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Optional arguments select criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flowlab/commands.hpp"
#include "flowlab/distill.hpp"
#include "flowlab/errors.hpp"
#include "flowlab/io.hpp"
#include "flowlab/o3s.hpp"
#include "flowlab/rng.hpp"

using namespace flowlab;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

double elapsed(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix random_points(Eigen::Index rows, Rng& rng) {
    Matrix m(rows, 2);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = rng.normal();
    return m;
}

// ---------------------------------------------------------------- 1

double probe_gradients(ParamStore& params, const ParamStore& grads, const std::function<double()>& loss, Rng& rng,
                       int probes_per_entry, int& probes) {
    const double h = 1e-5;
    double worst = 0.0;
    for (auto& entry : params) {
        const auto& g = grads.at(entry.name());
        for (int k = 0; k < probes_per_entry; ++k) {
            const std::size_t idx = rng.index(entry.size());
            double& w = entry.values()[idx];
            const double saved = w;
            w = saved + h;
            const double up = loss();
            w = saved - h;
            const double down = loss();
            w = saved;
            const double fd = (up - down) / (2.0 * h);
            const double an = g.values()[idx];
            worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6}));
            ++probes;
        }
    }
    return worst;
}

Outcome gradient_oracle() {
    Rng rng(101);
    Architecture arch;
    arch.hidden = {16, 16};
    arch.time_dim = 8;
    arch.cond_vocab = 3;
    arch.cond_dim = 4;
    const Eigen::Index b = 6;
    const Matrix z0 = random_points(b, rng);
    const Matrix z1 = random_points(b, rng);
    Eigen::VectorXd t(b), r(b);
    for (Eigen::Index i = 0; i < b; ++i) {
        const TimeInterval iv = sample_interval(rng, 0.05);
        t[i] = iv.t;
        r[i] = iv.r;
    }
    const std::vector<int> labels{0, 1, kNullCondition, 1, 0, kNullCondition};
    int probes = 0;

    VelocityNet teacher(arch, 7);
    auto teacher_loss = [&] { return cfm_loss(teacher, z0, z1, labels, t).value; };
    Tape tape;
    const LossEval le = cfm_loss(teacher, z0, z1, labels, t, &tape);
    const ParamStore tg = teacher.backward(tape, le.grad_output);
    double worst = probe_gradients(teacher.params(), tg, teacher_loss, rng, 10, probes);

    DualTimeVelocityNet student(arch, 8);
    for (double& v : student.params().at("time_proj.weight").values())
        v += 0.3 * rng.normal();
    DistillBatch batch{interpolate(z0, z1, t), t, r, labels};
    const Matrix target = random_points(b, rng);
    auto student_loss = [&] { return distill_loss(student, batch, target).value; };
    Tape stape;
    const LossEval ls = distill_loss(student, batch, target, &stape);
    const ParamStore sg = student.backward(stape, ls.grad_output);
    worst = std::max(worst, probe_gradients(student.params(), sg, student_loss, rng, 10, probes));

    return {probes >= 100 && worst <= 1e-4,
            std::to_string(probes) + " probes over all parameter kinds, worst relative error " + fmt(worst) +
                " (limit 1e-4)"};
}

// ---------------------------------------------------------------- 2

Outcome adaptation_identity() {
    RunConfig cfg;
    const VelocityNet teacher(cfg.architecture(), 31);
    const DualTimeVelocityNet student = adapt_init(teacher);
    Rng rng(32);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        Vector z(2);
        z << rng.normal(), rng.normal();
        const double t = rng.uniform();
        const double r = rng.uniform(t, 1.0);
        const int c = static_cast<int>(rng.index(9)) - 1;
        worst = std::max(worst, (student.forward(z, t, r, c) - teacher.forward(z, t, c)).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-12, "100 random (z,t,r,c), max abs diff " + fmt(worst) + " (limit 1e-12)"};
}

// ---------------------------------------------------------------- 3

// Linear net whose velocity is the rotation generator applied to z.
VelocityNet rotation_teacher() {
    Architecture arch;
    arch.hidden = {};
    arch.time_dim = 4;
    arch.cond_vocab = 2;
    arch.cond_dim = 2;
    VelocityNet net(arch, 1);
    auto w = net.params().at("layers.0.weight").matrix();
    w.setZero();
    w(0, 1) = -1.0;
    w(1, 0) = 1.0;
    net.params().at("layers.0.bias").vector().setZero();
    return net;
}

Vector rk4_rotation(Vector z, double t, double r, int steps) {
    const double h = (r - t) / steps;
    auto f = [](const Vector& x) {
        Vector v(2);
        v << -x[1], x[0];
        return v;
    };
    for (int k = 0; k < steps; ++k) {
        const Vector k1 = f(z);
        const Vector k2 = f(z + 0.5 * h * k1);
        const Vector k3 = f(z + 0.5 * h * k2);
        const Vector k4 = f(z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return z;
}

Outcome integration_oracle() {
    const VelocityNet teacher = rotation_teacher();
    const CfgConfig cfg{3.0, true};
    Rng rng(41);
    const std::vector<int> ns{8, 16, 32};
    std::vector<double> sums(ns.size(), 0.0);
    const int intervals = 50;
    for (int j = 0; j < intervals; ++j) {
        const TimeInterval iv = sample_interval(rng);
        Vector z(2);
        z << rng.normal(), rng.normal();
        const Vector oracle = (rk4_rotation(z, iv.t, iv.r, 10000) - z) / iv.length();
        auto error = [&](int n) {
            return (avg_velocity_target(teacher_displacement(teacher, z, iv, n, 0, cfg), iv).value - oracle).norm();
        };
        for (std::size_t k = 0; k < ns.size(); ++k)
            sums[k] += error(ns[k]) / error(2 * ns[k]);
    }
    bool pass = true;
    std::string detail = "mean error ratio n/2n over 50 intervals:";
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const double ratio = sums[k] / intervals;
        pass = pass && ratio >= 1.7 && ratio <= 2.3;
        detail += " n=" + std::to_string(ns[k]) + " " + fmt(ratio);
    }
    return {pass, detail + " (band [1.7, 2.3])"};
}

// ---------------------------------------------------------------- 4

Outcome interval_additivity() {
    RunConfig rc;
    const VelocityNet teacher(rc.architecture(), 51);
    const CfgConfig cfg{3.0, true};
    Rng rng(52);
    double worst = 0.0;
    for (int j = 0; j < 100; ++j) {
        const TimeInterval iv = sample_interval(rng, 0.05);
        const int total = 16;
        const int left_steps = 1 + static_cast<int>(rng.index(total - 1));
        const double s = iv.t + iv.length() * (static_cast<double>(left_steps) / total);
        Vector z(2);
        z << rng.normal(), rng.normal();
        const int c = static_cast<int>(rng.index(8));
        const Vector whole = teacher_displacement(teacher, z, iv, total, c, cfg);
        const Vector left = teacher_displacement(teacher, z, TimeInterval{iv.t, s}, left_steps, c, cfg);
        const Vector right =
            teacher_displacement(teacher, z + left, TimeInterval{s, iv.r}, total - left_steps, c, cfg);
        worst = std::max(worst, (whole - left - right).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-12, "100 random (z,t,s,r), max abs deviation " + fmt(worst) + " (limit 1e-12)"};
}

// ---------------------------------------------------------------- 5-7, 9, 10

struct PipelineRun {
    TeacherOutcome teacher;
    double teacher_seconds = 0.0;
    DistillOutcome student;
    double distill_seconds = 0.0;
    std::vector<double> student_swd;  // NFE 1..4, uniform
    std::vector<O3sOutcome> o3s;      // NFE 2, 3
    std::vector<double> o3s_eval_swd;
    double o3s_seconds = 0.0;
};

PipelineRun run_pipeline(const RunConfig& cfg) {
    PipelineRun run;
    std::ostringstream log;
    auto start = Clock::now();
    run.teacher = cmd_train_teacher(cfg, log);
    run.teacher_seconds = elapsed(start);

    start = Clock::now();
    run.student = cmd_distill(cfg, run.teacher.checkpoint, log);
    run.distill_seconds = elapsed(start);

    const RunData data = make_run_data(cfg);
    const Model student = Model::load(run.student.checkpoint, ModelKind::kStudent);
    for (int n = 1; n <= 4; ++n)
        run.student_swd.push_back(evaluate(student, cfg, data, StepSchedule::uniform(n), 0.0).swd);

    start = Clock::now();
    for (int n : {2, 3}) {
        RunConfig c = cfg;
        c.nfe = n;
        run.o3s.push_back(cmd_o3s(c, run.student.checkpoint, log));
        run.o3s_eval_swd.push_back(evaluate(student, cfg, data, run.o3s.back().result.best, 0.0).swd);
    }
    run.o3s_seconds = elapsed(start);
    return run;
}

RunConfig pipeline_config(const fs::path& dir) {
    RunConfig cfg;
    cfg.seed = 2025;
    cfg.teacher_nfe = 16;
    cfg.out = dir.string();
    cfg.validate();
    return cfg;
}

Outcome teacher_quality(const PipelineRun& run) {
    const double limit = 3.0 * run.teacher.noise_floor;
    return {run.teacher.swd32 <= limit && run.teacher_seconds <= 600.0,
            "32-NFE swd " + fmt(run.teacher.swd32) + " vs 3 x noise floor " + fmt(limit) + ", " +
                fmt(run.teacher_seconds, 3) + " s"};
}

Outcome distillation_headline(const PipelineRun& run) {
    const double teacher32 = run.teacher.swd32;
    const auto& s = run.student_swd;
    int inversions = 0;
    bool inversions_small = true;
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (s[k] > s[k - 1]) {
            ++inversions;
            inversions_small = inversions_small && s[k] - s[k - 1] <= run.teacher.noise_floor;
        }
    }
    const bool pass = s[2] <= 1.5 * teacher32 && s[0] <= 3.0 * teacher32 && inversions <= 1 && inversions_small &&
                      run.distill_seconds <= 900.0;
    return {pass, "student swd NFE1..4 = " + fmt(s[0]) + " " + fmt(s[1]) + " " + fmt(s[2]) + " " + fmt(s[3]) +
                      "; 3-NFE limit " + fmt(1.5 * teacher32) + ", 1-NFE limit " + fmt(3.0 * teacher32) +
                      "; inversions " + std::to_string(inversions) + ", distill " + fmt(run.distill_seconds, 3) +
                      " s"};
}

Outcome o3s_effectiveness(const PipelineRun& run) {
    bool pass = run.o3s_seconds <= 600.0;
    bool strict = false;
    std::string detail;
    for (std::size_t k = 0; k < run.o3s.size(); ++k) {
        const O3sResult& r = run.o3s[k].result;
        const double uniform = r.audit.front().metric;
        pass = pass && r.m_best >= uniform;
        strict = strict || r.m_best > uniform;
        for (std::size_t i = 1; i < r.audit.size(); ++i)
            pass = pass && r.audit[i].m_best >= r.audit[i - 1].m_best;
        detail += "NFE " + std::to_string(r.best.nfe()) + ": metric " + fmt(r.m_best) + " vs uniform " + fmt(uniform) +
                  " (" + std::to_string(r.metric_calls) + " evals, held-out swd " + fmt(run.o3s_eval_swd[k]) + "); ";
    }
    return {pass && strict, detail + "m_best non-decreasing, " + fmt(run.o3s_seconds, 3) + " s"};
}

Outcome teacher_nfe_ablation(const PipelineRun& base, const RunConfig& base_cfg) {
    std::vector<int> nfes{2, 4};
    std::vector<double> swd3, median;
    std::ostringstream log;
    const auto start = Clock::now();
    for (int n : nfes) {
        RunConfig cfg = base_cfg;
        cfg.teacher_nfe = n;
        cfg.out = (fs::path(base_cfg.out) / ("teacher_nfe" + std::to_string(n))).string();
        const DistillOutcome d = cmd_distill(cfg, base.teacher.checkpoint, log);
        const Model student = Model::load(d.checkpoint, ModelKind::kStudent);
        swd3.push_back(evaluate(student, cfg, make_run_data(cfg), StepSchedule::uniform(3), 0.0).swd);
        median.push_back(d.median_step_seconds);
    }
    nfes.push_back(16);
    swd3.push_back(base.student_swd[2]);
    median.push_back(base.student.median_step_seconds);
    const double seconds = elapsed(start) + base.distill_seconds;

    const bool quality = swd3[2] <= swd3[0];
    const bool timing = median[0] < median[1] && median[1] < median[2];
    std::string detail;
    for (std::size_t k = 0; k < nfes.size(); ++k)
        detail += "teacher NFE " + std::to_string(nfes[k]) + ": 3-NFE swd " + fmt(swd3[k]) + ", median " +
                  fmt(median[k] * 1e3, 3) + " ms/step; ";
    return {quality && timing && seconds <= 1800.0, detail + fmt(seconds, 3) + " s"};
}

std::string strip_seconds(const std::string& text) {
    std::istringstream in(text);
    std::string out, line;
    while (std::getline(in, line))
        if (line.find("\"seconds\"") == std::string::npos)
            out += line + "\n";
    return out;
}

Outcome determinism(const RunConfig& first_cfg, const PipelineRun& first) {
    RunConfig cfg = first_cfg;
    cfg.out = (fs::path(first_cfg.out).parent_path() / "rerun").string();
    fs::remove_all(cfg.out);
    const PipelineRun second = run_pipeline(cfg);

    std::vector<std::string> differing;
    const std::vector<std::string> files{"teacher.json",       "teacher_loss.csv",   "student.json",
                                         "student_loss.csv",   "schedule_nfe2.json", "schedule_nfe3.json",
                                         "o3s_audit_nfe2.csv", "o3s_audit_nfe3.csv"};
    for (const auto& f : files)
        if (read_text(fs::path(first_cfg.out) / f) != read_text(fs::path(cfg.out) / f))
            differing.push_back(f);

    // Evaluation reports written by the CLI, minus the wall-clock field.
    std::ostringstream log;
    for (const RunConfig* c : {&first_cfg, static_cast<const RunConfig*>(&cfg)}) {
        RunConfig e = *c;
        e.nfe = 3;
        cmd_eval(e, Model::load(fs::path(c->out) / "student.json", ModelKind::kStudent),
                 fs::path(c->out) / "schedule_nfe3.json", log);
    }
    const std::string report = "eval_student_nfe3_file.json";
    if (strip_seconds(read_text(fs::path(first_cfg.out) / report)) != strip_seconds(read_text(fs::path(cfg.out) / report)))
        differing.push_back(report);

    if (first.teacher.swd32 != second.teacher.swd32 || first.student_swd != second.student_swd ||
        first.o3s_eval_swd != second.o3s_eval_swd)
        differing.push_back("metrics");

    std::string detail = std::to_string(files.size() + 1) + " artifacts and all criterion 5-7 metrics compared";
    for (const auto& d : differing)
        detail += "; differs: " + d;
    return {differing.empty(), detail};
}

// ---------------------------------------------------------------- 8

Outcome ternary_family() {
    Rng rng(81);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const double lo = rng.uniform(-2.0, 1.0);
        const double hi = lo + rng.uniform(0.2, 3.0);
        const double peak = rng.uniform(lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo));
        const double a = rng.uniform(0.5, 4.0);
        std::function<double(double)> f;
        switch (k % 5) {
        case 0: f = [=](double x) { return -a * (x - peak) * (x - peak); }; break;
        case 1: f = [=](double x) { return -a * std::abs(x - peak); }; break;
        case 2: f = [=](double x) { return std::exp(-a * (x - peak) * (x - peak)); }; break;
        case 3: f = [=](double x) { return 1.0 / (1.0 + a * (x - peak) * (x - peak)); }; break;
        default: f = [=](double x) { return -std::pow(std::abs(x - peak), 1.5); }; break;
        }
        worst = std::max(worst, std::abs(ternary_search(f, lo, hi).x - peak));
    }

    double worst_o3s = 0.0;
    const std::vector<std::vector<double>> plants{{0.37}, {0.18, 0.64}, {0.12, 0.45, 0.81}};
    for (const auto& planted : plants) {
        const MetricFn metric = [&planted](const StepSchedule& s) {
            double m = 0.0;
            for (std::size_t i = 0; i < planted.size(); ++i)
                m -= (s[i + 1] - planted[i]) * (s[i + 1] - planted[i]);
            return m;
        };
        O3sConfig cfg;
        cfg.nfe = static_cast<int>(planted.size()) + 1;
        const O3sResult r = o3s_search(metric, cfg);
        for (std::size_t i = 0; i < planted.size(); ++i)
            worst_o3s = std::max(worst_o3s, std::abs(r.best[i + 1] - planted[i]));
    }
    return {worst <= 1e-3 && worst_o3s <= 5e-3, "ternary worst argmax error " + fmt(worst) +
                                                    " over 20 functions (limit 1e-3); o3s worst coordinate error " +
                                                    fmt(worst_o3s) + " for n=2,3,4 (limit 5e-3)"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));
    auto want = [&](int k) { return selected.empty() || selected.count(k) > 0; };

    const char* root_env = std::getenv(kOutputRootEnv);
    const fs::path root = root_env && *root_env ? fs::path(root_env) / "acceptance"
                                                : fs::temp_directory_path() / "flowlab_acceptance";
    int failures = 0;
    auto report = [&](int k, const std::string& name, const Outcome& o, double seconds) {
        std::printf("[%s] %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", k, name.c_str(), o.detail.c_str(), seconds);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    };
    auto timed = [&](int k, const std::string& name, const std::function<Outcome()>& fn) {
        if (!want(k))
            return;
        const auto start = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        report(k, name, o, elapsed(start));
    };

    timed(1, "gradient oracle", gradient_oracle);
    timed(2, "adaptation identity", adaptation_identity);
    timed(3, "integration oracle", integration_oracle);
    timed(4, "interval additivity", interval_additivity);

    if (want(5) || want(6) || want(7) || want(9) || want(10)) {
        fs::remove_all(root);
        const RunConfig cfg = pipeline_config(root / "run");
        const auto start = Clock::now();
        std::optional<PipelineRun> run;
        std::string failure;
        try {
            run = run_pipeline(cfg);
        } catch (const std::exception& e) {
            failure = std::string("pipeline threw: ") + e.what();
        }
        const double seconds = elapsed(start);
        auto from_run = [&](int k, const std::string& name, const std::function<Outcome()>& fn) {
            if (!want(k))
                return;
            if (!run) {
                report(k, name, {false, failure}, seconds);
                return;
            }
            timed(k, name, fn);
        };
        from_run(5, "teacher quality", [&] { return teacher_quality(*run); });
        from_run(6, "distillation headline", [&] { return distillation_headline(*run); });
        from_run(7, "O3S effectiveness", [&] { return o3s_effectiveness(*run); });
        timed(8, "ternary search", ternary_family);
        from_run(9, "teacher-NFE ablation", [&] { return teacher_nfe_ablation(*run, cfg); });
        from_run(10, "determinism", [&] { return determinism(cfg, *run); });
    } else {
        timed(8, "ternary search", ternary_family);
    }

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
