#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "flowlab/param_store.hpp"
#include "flowlab/velocity_net.hpp"

namespace flowlab {

using Json = nlohmann::ordered_json;

inline constexpr int kCheckpointFormatVersion = 1;

enum class ModelKind { kTeacher, kStudent };

std::string to_string(ModelKind kind);

/// On-disk model: {format_version, kind, arch, params, seed, train_meta}.
/// Parameters are stored as {name: {shape, data}} in insertion order; doubles are
/// written in shortest round-trip form so load(save(x)) is bit-exact.
struct Checkpoint {
    ModelKind kind = ModelKind::kTeacher;
    Architecture arch;
    ParamStore params;
    std::uint64_t seed = 0;
    Json train_meta = Json::object();
};

Json arch_to_json(const Architecture& arch);
Architecture arch_from_json(const Json& j);

Json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const Json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(const VelocityNet& net, std::uint64_t seed, Json train_meta = Json::object());
Checkpoint make_checkpoint(const DualTimeVelocityNet& net, std::uint64_t seed, Json train_meta = Json::object());

/// Throw ValidationError when the stored kind does not match.
VelocityNet teacher_from_checkpoint(const Checkpoint& ckpt);
DualTimeVelocityNet student_from_checkpoint(const Checkpoint& ckpt);

}  // namespace flowlab
