#include "flowlab/run_config.hpp"

#include <cstdlib>
#include <set>

#include "flowlab/errors.hpp"
#include "flowlab/io.hpp"
#include "flowlab/rng.hpp"

namespace flowlab {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok)
        throw ConfigError(message);
}

class Reader {
public:
    explicit Reader(const Json& j) : m_json(j) {
        require(j.is_object(), "config must be a JSON object");
    }

    template <class T>
    void operator()(const char* key, T& field) {
        m_known.insert(key);
        const auto it = m_json.find(key);
        if (it == m_json.end())
            return;
        try {
            field = it->template get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(std::string("config key '") + key + "' has the wrong type");
        }
    }

    void optional_int(const char* key, std::optional<int>& field) {
        m_known.insert(key);
        const auto it = m_json.find(key);
        if (it == m_json.end() || it->is_null())
            return;
        require(it->is_number_integer(), std::string("config key '") + key + "' must be an integer");
        field = it->get<int>();
    }

    void reject_unknown() const {
        for (const auto& [key, value] : m_json.items())
            require(m_known.count(key) > 0, "unknown config key '" + key + "'");
    }

private:
    const Json& m_json;
    std::set<std::string> m_known;
};

template <class Config, class Visitor>
void visit_fields(Config& c, Visitor& v) {
    v("dataset", c.dataset);
    v("dataset_noise", c.dataset_noise);
    v("train_size", c.train_size);
    v("eval_count", c.eval_count);
    v("hidden", c.hidden);
    v("time_dim", c.time_dim);
    v("cond_dim", c.cond_dim);
    v("teacher_steps", c.teacher_steps);
    v("teacher_batch", c.teacher_batch);
    v("teacher_lr", c.teacher_lr);
    v("teacher_final_lr_fraction", c.teacher_final_lr_fraction);
    v("cond_dropout", c.cond_dropout);
    v("cfg_weight", c.cfg_weight);
    v("cfg_enabled", c.cfg_enabled);
    v("teacher_nfe", c.teacher_nfe);
    v("interval_eps", c.interval_eps);
    v("distill_steps", c.distill_steps);
    v("distill_batch", c.distill_batch);
    v("distill_lr", c.distill_lr);
    v("distill_final_lr_fraction", c.distill_final_lr_fraction);
    v("student_init", c.student_init);
    v("distill_states", c.distill_states);
    v("timing_warmup", c.timing_warmup);
    v("o3s_nfe", c.o3s_nfe);
    v("o3s_tol", c.o3s_tol);
    v("o3s_max_iter", c.o3s_max_iter);
    v("o3s_bounds", c.o3s_bounds);
    v("o3s_eval_size", c.o3s_eval_size);
    v.optional_int("nfe", c.nfe);
    v("projections", c.projections);
    v("mmd_bandwidth", c.mmd_bandwidth);
    v("noise_floor_trials", c.noise_floor_trials);
    v("seed", c.seed);
    v("out", c.out);
}

class Writer {
public:
    template <class T>
    void operator()(const char* key, const T& field) {
        json[key] = field;
    }
    void optional_int(const char* key, const std::optional<int>& field) {
        json[key] = field ? Json(*field) : Json(nullptr);
    }
    Json json = Json::object();
};

}  // namespace

void RunConfig::validate() const {
    require(!dataset.empty(), "config needs a dataset name");
    dataset_spec().validate();
    require(dataset_noise >= 0.0, "dataset_noise must be >= 0");
    require(train_size >= 1, "train_size must be >= 1");
    require(eval_count >= 2, "eval_count must be >= 2");
    architecture().validate();
    require(teacher_steps >= 0 && distill_steps >= 0, "step counts must be >= 0");
    require(teacher_batch >= 1 && distill_batch >= 1, "batch sizes must be >= 1");
    require(teacher_lr > 0.0 && distill_lr > 0.0, "learning rates must be positive");
    require(teacher_final_lr_fraction > 0.0 && teacher_final_lr_fraction <= 1.0 && distill_final_lr_fraction > 0.0 &&
                distill_final_lr_fraction <= 1.0,
            "final_lr_fraction must lie in (0, 1]");
    require(cond_dropout >= 0.0 && cond_dropout <= 1.0, "cond_dropout must lie in [0, 1]");
    require(cfg_weight >= 0.0, "cfg_weight must be >= 0");
    require(teacher_nfe >= 1, "teacher_nfe must be >= 1");
    require(interval_eps > 0.0 && interval_eps < 1.0, "interval_eps must lie in (0, 1)");
    require(student_init == "adapt" || student_init == "fresh", "student_init must be adapt or fresh");
    require(distill_states == "interpolate" || distill_states == "teacher", "distill_states must be interpolate or teacher");
    require(timing_warmup >= 0, "timing_warmup must be >= 0");
    require(o3s_nfe >= 1, "o3s_nfe must be >= 1");
    require(o3s_tol > 0.0 && o3s_max_iter >= 1, "o3s_tol must be positive and o3s_max_iter >= 1");
    require(o3s_bounds == "neighbors" || o3s_bounds == "printed", "o3s_bounds must be neighbors or printed");
    require(o3s_eval_size >= 2, "o3s_eval_size must be >= 2");
    require(!nfe || *nfe >= 1, "nfe must be >= 1");
    require(projections >= 1, "projections must be >= 1");
    require(mmd_bandwidth > 0.0, "mmd_bandwidth must be positive");
    require(noise_floor_trials >= 3, "noise_floor_trials must be >= 3");
    require(!out.empty(), "out must not be empty");
}

DatasetSpec RunConfig::dataset_spec() const {
    DatasetSpec spec;
    spec.name = dataset;
    spec.noise = dataset_noise;
    spec.seed = stream("data");
    return spec;
}

Architecture RunConfig::architecture() const {
    Architecture arch;
    arch.dim = 2;
    arch.hidden = hidden;
    arch.time_dim = time_dim;
    arch.cond_vocab = dataset_spec().class_count() + 1;
    arch.cond_dim = cond_dim;
    return arch;
}

CfgConfig RunConfig::guidance() const {
    return {cfg_weight, cfg_enabled && dataset_spec().conditional()};
}

TeacherTrainConfig RunConfig::teacher_config() const {
    TeacherTrainConfig c;
    c.steps = teacher_steps;
    c.batch = teacher_batch;
    c.adam.lr = teacher_lr;
    c.final_lr_fraction = teacher_final_lr_fraction;
    c.cond_dropout = cond_dropout;
    c.init_seed = stream("init");
    c.train_seed = stream("training");
    return c;
}

DistillConfig RunConfig::distill_config() const {
    DistillConfig c;
    c.teacher_nfe = teacher_nfe;
    c.cfg = guidance();
    c.interval_eps = interval_eps;
    c.steps = distill_steps;
    c.batch = distill_batch;
    c.adam.lr = distill_lr;
    c.final_lr_fraction = distill_final_lr_fraction;
    c.init = student_init == "fresh" ? StudentInit::kFresh : StudentInit::kAdapt;
    c.states = distill_states == "teacher" ? StateSource::kTeacherTrajectory : StateSource::kInterpolate;
    c.init_seed = stream("student-init");
    c.train_seed = stream("distill");
    c.interval_seed = stream("intervals");
    c.timing_warmup = timing_warmup;
    return c;
}

O3sConfig RunConfig::o3s_config(int n) const {
    O3sConfig c;
    c.nfe = n;
    c.tol = o3s_tol;
    c.max_iter = o3s_max_iter;
    c.bounds = o3s_bounds == "printed" ? SearchBounds::kPrinted : SearchBounds::kNeighbors;
    return c;
}

std::uint64_t RunConfig::stream(const char* name) const {
    return derive_seed(seed, name);
}

Json RunConfig::to_json() const {
    Writer w;
    visit_fields(*this, w);
    return w.json;
}

RunConfig RunConfig::from_json(const Json& j) {
    RunConfig c;
    Reader r(j);
    require(j.contains("dataset"), "config is missing the dataset name");
    visit_fields(c, r);
    r.reject_unknown();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError("config file not found: " + path.string());
    Json j;
    try {
        j = Json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

RunConfig resolve_config(const Overrides& o) {
    RunConfig c = o.config ? RunConfig::load(*o.config) : RunConfig{};
    if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0')
        c.out = root;
    if (o.seed)
        c.seed = *o.seed;
    if (o.out)
        c.out = *o.out;
    if (o.nfe)
        c.nfe = *o.nfe;
    if (o.teacher_nfe)
        c.teacher_nfe = *o.teacher_nfe;
    c.validate();
    return c;
}

}  // namespace flowlab
