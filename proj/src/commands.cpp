#include "flowlab/commands.hpp"

#include <chrono>
#include <ostream>
#include <sstream>

#include "flowlab/errors.hpp"
#include "flowlab/io.hpp"

namespace flowlab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path out_file(const RunConfig& config, const std::string& name) {
    return fs::path(config.out) / name;
}

Json run_meta(const RunConfig& config, const std::string& command) {
    Json meta = Json::object();
    meta["command"] = command;
    // The output location is not part of the experiment; leaving it out keeps
    // checkpoints from different directories comparable byte for byte.
    Json resolved = config.to_json();
    resolved.erase("out");
    meta["config"] = resolved;
    return meta;
}

Checkpoint load_existing(const fs::path& path) {
    if (!fs::exists(path))
        throw ValidationError("checkpoint not found: " + path.string());
    return load_checkpoint(path);
}

StepSchedule uniform_for(const RunConfig& config, const Model& model) {
    return StepSchedule::uniform(config.nfe.value_or(model.default_nfe()));
}

}  // namespace

RunData make_run_data(const RunConfig& config) {
    const DatasetSpec spec = config.dataset_spec();
    RunData data;
    data.train = sample_data(spec, static_cast<std::size_t>(config.train_size), config.stream("data"));
    data.reference = sample_data(spec, static_cast<std::size_t>(config.eval_count), config.stream("reference"));
    data.eval_noise = gaussian_noise(static_cast<std::size_t>(config.eval_count), spec.dim, config.stream("eval"));
    return data;
}

fs::path prepare_output(const RunConfig& config) {
    const fs::path dir(config.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw ConfigError("cannot create output directory " + dir.string());
    return dir;
}

void write_resolved_config(const RunConfig& config, const std::string& command) {
    prepare_output(config);
    Json j = Json::object();
    j["format_version"] = kCheckpointFormatVersion;
    j["command"] = command;
    j["config"] = config.to_json();
    write_text(out_file(config, "config." + command + ".json"), j.dump(2) + "\n");
}

fs::path schedule_file(const RunConfig& config, int nfe) {
    return out_file(config, "schedule_nfe" + std::to_string(nfe) + ".json");
}

Model Model::load(const fs::path& path, ModelKind expected) {
    const Checkpoint ckpt = load_existing(path);
    if (expected == ModelKind::kTeacher)
        return Model(expected, teacher_from_checkpoint(ckpt));
    return Model(expected, student_from_checkpoint(ckpt));
}

int Model::default_nfe() const {
    return m_kind == ModelKind::kTeacher ? 32 : 3;
}

Matrix Model::sample(const Matrix& z0, const StepSchedule& schedule, std::span<const int> labels,
                     const CfgConfig& guidance) const {
    if (const auto* teacher = std::get_if<VelocityNet>(&m_net))
        return flowlab::sample(*teacher, z0, schedule, labels, guidance, false).final;
    return sample_student(std::get<DualTimeVelocityNet>(m_net), z0, schedule, labels);
}

Json EvalReport::to_json() const {
    Json j = Json::object();
    j["nfe"] = nfe;
    j["schedule"] = schedule.times();
    j["swd"] = swd;
    j["mmd"] = mmd.value;
    j["mmd_raw"] = mmd.raw;
    j["noise_floor"] = noise_floor;
    j["seconds"] = seconds;
    return j;
}

double run_noise_floor(const RunConfig& config) {
    return noise_floor(config.dataset_spec(), static_cast<std::size_t>(config.eval_count), config.noise_floor_trials,
                       config.stream("noise-floor"), config.projections);
}

EvalReport evaluate(const Model& model, const RunConfig& config, const RunData& data, const StepSchedule& schedule,
                    double floor) {
    EvalReport report;
    report.nfe = schedule.nfe();
    report.schedule = schedule;
    report.noise_floor = floor;
    const auto start = Clock::now();
    const Matrix generated = model.sample(data.eval_noise, schedule, data.reference.labels, config.guidance());
    report.seconds = seconds_since(start);
    if (!generated.allFinite())
        throw NumericalError("sampling produced non-finite values");
    report.swd = swd(generated, data.reference.points, config.projections, kProjectionSeed);
    report.mmd = mmd_rbf(generated, data.reference.points, config.mmd_bandwidth);
    return report;
}

StepSchedule pick_schedule(const RunConfig& config, const Model& model, const std::optional<fs::path>& path) {
    if (!path)
        return uniform_for(config, model);
    if (!fs::exists(*path))
        throw ValidationError("schedule file not found: " + path->string());
    StepSchedule schedule = read_schedule(*path);
    if (config.nfe && *config.nfe != schedule.nfe())
        throw ValidationError("schedule has " + std::to_string(schedule.nfe()) + " steps but --nfe is " +
                              std::to_string(*config.nfe));
    return schedule;
}

fs::path cmd_gen_data(const RunConfig& config, std::ostream& log) {
    prepare_output(config);
    write_resolved_config(config, "gen-data");
    const RunData data = make_run_data(config);
    const fs::path train = out_file(config, "train.csv");
    write_batch_csv(train, data.train);
    write_batch_csv(out_file(config, "reference.csv"), data.reference);
    log << "wrote " << data.train.size() << " training and " << data.reference.size() << " reference points to "
        << config.out << "\n";
    return train;
}

TeacherOutcome cmd_train_teacher(const RunConfig& config, std::ostream& log) {
    prepare_output(config);
    write_resolved_config(config, "train-teacher");
    const RunData data = make_run_data(config);
    const TeacherTrainConfig tc = config.teacher_config();
    const TeacherTrainResult trained = train_teacher(data.train, config.architecture(), tc);

    TeacherOutcome outcome;
    outcome.checkpoint = out_file(config, "teacher.json");
    Json meta = run_meta(config, "train-teacher");
    meta["steps"] = tc.steps;
    meta["final_loss"] = trained.loss_curve.empty() ? 0.0 : trained.loss_curve.back();
    save_checkpoint(outcome.checkpoint, make_checkpoint(trained.net, config.seed, meta));
    write_loss_csv(out_file(config, "teacher_loss.csv"), trained.loss_curve);

    const Model model = Model::load(outcome.checkpoint, ModelKind::kTeacher);
    outcome.noise_floor = run_noise_floor(config);
    outcome.swd32 = evaluate(model, config, data, StepSchedule::uniform(32), outcome.noise_floor).swd;
    log << "teacher: " << outcome.checkpoint.string() << "\n"
        << "final 32-NFE swd " << format_double(outcome.swd32) << " (noise floor " << format_double(outcome.noise_floor)
        << ")\n";
    return outcome;
}

DistillOutcome cmd_distill(const RunConfig& config, const fs::path& teacher_path, std::ostream& log) {
    prepare_output(config);
    write_resolved_config(config, "distill");
    const VelocityNet teacher = teacher_from_checkpoint(load_existing(teacher_path));
    const RunData data = make_run_data(config);
    const DistillConfig dc = config.distill_config();
    const StudentTrainResult trained = train_student(teacher, data.train, dc);

    DistillOutcome outcome;
    outcome.checkpoint = out_file(config, "student.json");
    outcome.median_step_seconds = trained.median_step_seconds;
    Json meta = run_meta(config, "distill");
    meta["steps"] = dc.steps;
    meta["teacher_nfe"] = dc.teacher_nfe;
    meta["final_loss"] = trained.loss_curve.empty() ? 0.0 : trained.loss_curve.back();
    save_checkpoint(outcome.checkpoint, make_checkpoint(trained.student, config.seed, meta));
    write_loss_csv(out_file(config, "student_loss.csv"), trained.loss_curve);
    write_timing_csv(out_file(config, "timing.csv"), trained.step_seconds, dc.teacher_nfe);
    log << "student: " << outcome.checkpoint.string() << "\n"
        << "teacher nfe " << dc.teacher_nfe << ", median seconds per step " << format_double(outcome.median_step_seconds)
        << "\n";
    return outcome;
}

O3sOutcome cmd_o3s(const RunConfig& config, const fs::path& student_path, std::ostream& log) {
    prepare_output(config);
    write_resolved_config(config, "o3s");
    const DualTimeVelocityNet student = student_from_checkpoint(load_existing(student_path));
    const int n = config.nfe.value_or(config.o3s_nfe);
    const SampleBatch dev_reference =
        sample_data(config.dataset_spec(), static_cast<std::size_t>(config.o3s_eval_size), config.stream("o3s"));
    const DevSet dev = make_dev_set(dev_reference, static_cast<std::size_t>(config.o3s_eval_size),
                                    config.stream("o3s-noise"));

    O3sOutcome outcome;
    try {
        outcome.result = o3s_search(make_swd_metric(student, dev, config.projections), config.o3s_config(n));
    } catch (const SearchAborted& e) {
        write_text(out_file(config, "o3s_audit_nfe" + std::to_string(n) + ".csv"), audit_to_csv(e.audit()));
        throw;
    }
    outcome.schedule = schedule_file(config, n);
    outcome.audit = out_file(config, "o3s_audit_nfe" + std::to_string(n) + ".csv");
    write_schedule(outcome.schedule, outcome.result.best);
    write_text(outcome.audit, audit_to_csv(outcome.result.audit));
    log << "o3s nfe " << n << ": " << outcome.result.best.to_json() << "\n"
        << "metric " << format_double(outcome.result.m_best) << " (uniform "
        << format_double(outcome.result.incumbent_trace.front()) << "), " << outcome.result.metric_calls
        << " metric evaluations\n";
    return outcome;
}

fs::path cmd_sample(const RunConfig& config, const Model& model, const std::optional<fs::path>& schedule_path,
                    std::ostream& log) {
    prepare_output(config);
    write_resolved_config(config, "sample");
    const StepSchedule schedule = pick_schedule(config, model, schedule_path);
    const RunData data = make_run_data(config);
    SampleBatch out{model.sample(data.eval_noise, schedule, data.reference.labels, config.guidance()),
                    data.reference.labels};
    if (!out.points.allFinite())
        throw NumericalError("sampling produced non-finite values");
    const fs::path path = out_file(config, "samples_" + model.name() + "_nfe" + std::to_string(schedule.nfe()) + ".csv");
    write_batch_csv(path, out);
    log << "wrote " << out.size() << " samples to " << path.string() << "\n";
    return path;
}

EvalReport cmd_eval(const RunConfig& config, const Model& model, const std::optional<fs::path>& schedule_path,
                    std::ostream& log) {
    prepare_output(config);
    write_resolved_config(config, "eval");
    const StepSchedule schedule = pick_schedule(config, model, schedule_path);
    const RunData data = make_run_data(config);
    const EvalReport report = evaluate(model, config, data, schedule, run_noise_floor(config));
    const std::string kind = schedule_path ? "file" : "uniform";
    const fs::path path =
        out_file(config, "eval_" + model.name() + "_nfe" + std::to_string(report.nfe) + "_" + kind + ".json");
    write_text(path, report.to_json().dump(2) + "\n");
    log << model.name() << " nfe " << report.nfe << ": swd " << format_double(report.swd) << ", mmd "
        << format_double(report.mmd.value) << ", noise floor " << format_double(report.noise_floor) << "\n";
    return report;
}

fs::path cmd_sweep(const RunConfig& config, const std::optional<fs::path>& teacher_path,
                   const std::optional<fs::path>& student_path, std::ostream& log) {
    if (!teacher_path && !student_path)
        throw ValidationError("sweep needs --teacher and/or --student");
    prepare_output(config);
    write_resolved_config(config, "sweep");
    const RunData data = make_run_data(config);

    std::ostringstream csv;
    csv << "model,nfe,schedule_kind,swd,mmd\n";
    auto row = [&](const Model& model, const std::string& kind, const StepSchedule& schedule) {
        const EvalReport r = evaluate(model, config, data, schedule, 0.0);
        csv << model.name() << ',' << r.nfe << ',' << kind << ',' << format_double(r.swd) << ','
            << format_double(r.mmd.value) << '\n';
        log << model.name() << " nfe " << r.nfe << " " << kind << ": swd " << format_double(r.swd) << "\n";
    };

    if (teacher_path) {
        const Model teacher = Model::load(*teacher_path, ModelKind::kTeacher);
        for (int n : {1, 2, 3, 4, 8, 16, 32})
            row(teacher, "uniform", StepSchedule::uniform(n));
    }
    if (student_path) {
        const Model student = Model::load(*student_path, ModelKind::kStudent);
        for (int n : {1, 2, 3, 4}) {
            row(student, "uniform", StepSchedule::uniform(n));
            if (fs::exists(schedule_file(config, n)))
                row(student, "o3s", read_schedule(schedule_file(config, n)));
        }
    }
    const fs::path path = out_file(config, "sweep.csv");
    write_text(path, csv.str());
    log << "wrote " << path.string() << "\n";
    return path;
}

}  // namespace flowlab
