#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flowlab/commands.hpp"
#include "flowlab/errors.hpp"

using namespace flowlab;

namespace {

struct Flags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> teacher;
    std::optional<std::string> student;
    std::optional<std::string> schedule;
    std::optional<int> nfe;
    std::optional<int> teacher_nfe;
};

std::optional<fs::path> as_path(const std::optional<std::string>& s) {
    if (!s)
        return std::nullopt;
    return fs::path(*s);
}

fs::path required(const std::optional<std::string>& s, const char* flag, const std::string& command) {
    if (!s)
        throw ValidationError(command + " needs " + flag);
    return *s;
}

Model pick_model(const Flags& f, const std::string& command) {
    if (f.teacher.has_value() == f.student.has_value())
        throw ValidationError(command + " needs exactly one of --teacher or --student");
    if (f.teacher)
        return Model::load(*f.teacher, ModelKind::kTeacher);
    return Model::load(*f.student, ModelKind::kStudent);
}

int run(const std::string& command, const Flags& f) {
    Overrides o;
    o.config = as_path(f.config);
    o.seed = f.seed;
    o.out = f.out;
    o.nfe = f.nfe;
    o.teacher_nfe = f.teacher_nfe;
    const RunConfig config = resolve_config(o);

    if (command == "gen-data")
        cmd_gen_data(config, std::cout);
    else if (command == "train-teacher")
        cmd_train_teacher(config, std::cout);
    else if (command == "distill")
        cmd_distill(config, required(f.teacher, "--teacher", command), std::cout);
    else if (command == "o3s")
        cmd_o3s(config, required(f.student, "--student", command), std::cout);
    else if (command == "sample")
        cmd_sample(config, pick_model(f, command), as_path(f.schedule), std::cout);
    else if (command == "eval")
        cmd_eval(config, pick_model(f, command), as_path(f.schedule), std::cout);
    else if (command == "sweep")
        cmd_sweep(config, as_path(f.teacher), as_path(f.student), std::cout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flow-matching teacher training, average-velocity distillation and step-schedule search."};
    app.require_subcommand(1);

    Flags f;
    app.add_option("--config", f.config, "JSON run config");
    app.add_option("--seed", f.seed, "root seed");
    app.add_option("--out", f.out, "output directory (overrides " + std::string(kOutputRootEnv) + ")");
    app.add_option("--teacher", f.teacher, "teacher checkpoint");
    app.add_option("--student", f.student, "student checkpoint");
    app.add_option("--schedule", f.schedule, "schedule JSON array");
    app.add_option("--nfe", f.nfe, "sampling steps");
    app.add_option("--teacher-nfe", f.teacher_nfe, "teacher sub-steps per distillation target");

    const std::pair<const char*, const char*> commands[] = {
        {"gen-data", "write training and reference batches as CSV"},
        {"train-teacher", "train the flow-matching teacher"},
        {"distill", "distill a dual-time student from --teacher"},
        {"o3s", "search a sampling schedule for --student"},
        {"sample", "sample from --teacher or --student"},
        {"eval", "score samples against held-out data"},
        {"sweep", "evaluate models over a grid of step counts"},
    };
    for (const auto& [name, help] : commands)
        app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, f);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
