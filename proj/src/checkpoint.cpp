#include "flowlab/checkpoint.hpp"

#include <fstream>

#include "flowlab/errors.hpp"

namespace flowlab {

std::string to_string(ModelKind kind) {
    return kind == ModelKind::kTeacher ? "teacher" : "student";
}

Json arch_to_json(const Architecture& arch) {
    Json j;
    j["d"] = arch.dim;
    j["hidden"] = arch.hidden;
    j["m"] = arch.time_dim;
    j["cond_vocab"] = arch.cond_vocab;
    j["cond_dim"] = arch.cond_dim;
    return j;
}

Architecture arch_from_json(const Json& j) {
    Architecture arch;
    try {
        arch.dim = j.at("d").get<int>();
        arch.hidden = j.at("hidden").get<std::vector<int>>();
        arch.time_dim = j.at("m").get<int>();
        arch.cond_vocab = j.at("cond_vocab").get<int>();
        arch.cond_dim = j.value("cond_dim", arch.cond_dim);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed architecture: ") + e.what());
    }
    arch.validate();
    return arch;
}

Json checkpoint_to_json(const Checkpoint& ckpt) {
    Json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["kind"] = to_string(ckpt.kind);
    j["arch"] = arch_to_json(ckpt.arch);
    Json params = Json::object();
    for (const auto& entry : ckpt.params) {
        Json p;
        p["shape"] = entry.shape();
        p["data"] = std::vector<double>(entry.values().begin(), entry.values().end());
        params[entry.name()] = std::move(p);
    }
    j["params"] = std::move(params);
    j["seed"] = ckpt.seed;
    j["train_meta"] = ckpt.train_meta;
    return j;
}

Checkpoint checkpoint_from_json(const Json& j) {
    Checkpoint ckpt;
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kCheckpointFormatVersion)
            throw ValidationError("unsupported checkpoint format_version " + std::to_string(version));
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "teacher")
            ckpt.kind = ModelKind::kTeacher;
        else if (kind == "student")
            ckpt.kind = ModelKind::kStudent;
        else
            throw ValidationError("unknown checkpoint kind '" + kind + "'");
        ckpt.arch = arch_from_json(j.at("arch"));
        for (const auto& [name, p] : j.at("params").items()) {
            auto& entry = ckpt.params.add(name, p.at("shape").get<std::vector<std::size_t>>());
            const auto data = p.at("data").get<std::vector<double>>();
            if (data.size() != entry.size())
                throw ValidationError("parameter '" + name + "' has " + std::to_string(data.size()) +
                                      " values, shape needs " + std::to_string(entry.size()));
            std::copy(data.begin(), data.end(), entry.values().begin());
        }
        ckpt.seed = j.at("seed").get<std::uint64_t>();
        ckpt.train_meta = j.value("train_meta", Json::object());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed checkpoint: ") + e.what());
    }
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out)
        throw ValidationError("cannot write checkpoint " + path.string());
    out << checkpoint_to_json(ckpt).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open checkpoint " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
    }
    return checkpoint_from_json(j);
}

Checkpoint make_checkpoint(const VelocityNet& net, std::uint64_t seed, Json train_meta) {
    return {ModelKind::kTeacher, net.arch(), net.params(), seed, std::move(train_meta)};
}

Checkpoint make_checkpoint(const DualTimeVelocityNet& net, std::uint64_t seed, Json train_meta) {
    return {ModelKind::kStudent, net.arch(), net.params(), seed, std::move(train_meta)};
}

VelocityNet teacher_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.kind != ModelKind::kTeacher)
        throw ValidationError("expected a teacher checkpoint, got " + to_string(ckpt.kind));
    try {
        return VelocityNet(ckpt.arch, ckpt.params);
    } catch (const ShapeError& e) {
        throw ValidationError(e.what());
    }
}

DualTimeVelocityNet student_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.kind != ModelKind::kStudent)
        throw ValidationError("expected a student checkpoint, got " + to_string(ckpt.kind));
    try {
        return DualTimeVelocityNet(ckpt.arch, ckpt.params);
    } catch (const ShapeError& e) {
        throw ValidationError(e.what());
    }
}

}  // namespace flowlab
