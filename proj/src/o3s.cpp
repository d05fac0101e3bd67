#include "flowlab/o3s.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace flowlab {

TernaryResult ternary_search(const std::function<double(double)>& f, double lo, double hi, double tol, int max_iter) {
    if (!(lo < hi))
        throw ArgumentError("ternary_search needs lo < hi");
    TernaryResult best;
    bool have_probe = false;
    auto probe = [&](double x) {
        const double v = f(x);
        if (!have_probe || v > best.value) {
            best.x = x;
            best.value = v;
            have_probe = true;
        }
        return v;
    };

    double a = lo;
    double b = hi;
    int it = 0;
    while (b - a > tol && it < max_iter) {
        const double third = (b - a) / 3.0;
        const double m1 = a + third;
        const double m2 = b - third;
        const double f1 = probe(m1);
        const double f2 = probe(m2);
        if (f1 < f2)
            a = m1;
        else
            b = m2;
        ++it;
    }
    if (!have_probe)
        probe(0.5 * (a + b));
    best.iterations = it;
    return best;
}

ScheduleEvaluator::ScheduleEvaluator(MetricFn metric, double quantum) : m_metric(std::move(metric)), m_quantum(quantum) {
    if (!(quantum > 0.0))
        throw ConfigError("schedule quantum must be positive");
}

StepSchedule ScheduleEvaluator::quantize(const StepSchedule& schedule) const {
    std::vector<double> times = schedule.times();
    for (double& t : times)
        t = std::round(t / m_quantum) * m_quantum;
    times.front() = 0.0;
    times.back() = 1.0;
    return StepSchedule(std::move(times));
}

std::pair<double, int> ScheduleEvaluator::evaluate(const StepSchedule& schedule) {
    const StepSchedule q = quantize(schedule);
    std::vector<std::int64_t> key;
    key.reserve(q.times().size());
    for (double t : q.times())
        key.push_back(std::llround(t / m_quantum));
    if (auto it = m_cache.find(key); it != m_cache.end())
        return it->second;

    ++m_calls;
    const double value = m_metric(q);
    if (!std::isfinite(value))
        throw NumericalError("metric returned a non-finite value");
    const int index = static_cast<int>(m_audit.size());
    m_audit.push_back({index, q.times(), value, false, 0.0});
    m_cache.emplace(std::move(key), std::make_pair(value, index));
    return {value, index};
}

namespace {

void fill_incumbent_column(std::vector<AuditEntry>& audit) {
    double incumbent = -std::numeric_limits<double>::infinity();
    for (auto& entry : audit) {
        if (entry.accepted)
            incumbent = std::max(incumbent, entry.metric);
        entry.m_best = incumbent;
    }
}

}  // namespace

O3sResult o3s_search(const MetricFn& metric, const O3sConfig& config) {
    if (config.nfe < 1)
        throw ConfigError("O3S needs nfe >= 1");
    ScheduleEvaluator evaluator(metric, config.quantum);
    O3sResult result;

    try {
        StepSchedule best = evaluator.quantize(StepSchedule::uniform(config.nfe));
        auto [m_best, seed_index] = evaluator.evaluate(best);
        evaluator.audit()[static_cast<std::size_t>(seed_index)].accepted = true;
        result.incumbent_trace.push_back(m_best);

        const int n = config.nfe;
        int patience = 0;
        bool stop = n < 2;
        while (!stop) {
            ++result.sweeps;
            bool improved = false;
            for (int i = n - 1; i >= 1 && !stop; --i) {
                const auto idx = static_cast<std::size_t>(i);
                const double lo = best[idx - 1];
                const double hi = config.bounds == SearchBounds::kNeighbors ? best[idx + 1] : best[idx];

                // Too narrow to hold a distinct quantized point.
                if (hi - lo <= 2.0 * config.quantum) {
                    if (++patience >= n)
                        stop = true;
                    result.incumbent_trace.push_back(m_best);
                    continue;
                }

                auto place = [&](double x) {
                    std::vector<double> times = best.times();
                    times[idx] = x;
                    return StepSchedule(std::move(times));
                };
                const TernaryResult found = ternary_search(
                    [&](double x) { return evaluator.evaluate(place(x)).first; }, lo, hi, config.tol, config.max_iter);

                const StepSchedule candidate = evaluator.quantize(place(found.x));
                const auto [m_optim, optim_index] = evaluator.evaluate(candidate);
                if (m_optim > m_best) {
                    best = candidate;
                    m_best = m_optim;
                    evaluator.audit()[static_cast<std::size_t>(optim_index)].accepted = true;
                    patience = 0;
                    improved = true;
                } else {
                    ++patience;
                    if (patience >= n)
                        stop = true;
                }
                result.incumbent_trace.push_back(m_best);
            }
            if (!improved)
                stop = true;
        }
        result.best = best;
        result.m_best = m_best;
    } catch (const Error& e) {
        fill_incumbent_column(evaluator.audit());
        throw SearchAborted(std::string("O3S aborted: ") + e.what(), evaluator.audit(), e.kind());
    } catch (const std::exception& e) {
        fill_incumbent_column(evaluator.audit());
        throw SearchAborted(std::string("O3S aborted: ") + e.what(), evaluator.audit(), ErrorKind::kNumerical);
    }

    fill_incumbent_column(evaluator.audit());
    result.audit = evaluator.audit();
    result.metric_calls = evaluator.metric_calls();
    return result;
}

DevSet make_dev_set(const SampleBatch& reference, std::size_t eval_size, std::uint64_t seed) {
    reference.validate();
    if (eval_size < 1)
        throw ArgumentError("dev set needs eval_size >= 1");
    DevSet dev{reference, gaussian_noise(eval_size, reference.dim(), seed), std::vector<int>(eval_size)};
    for (std::size_t i = 0; i < eval_size; ++i)
        dev.labels[i] = reference.labels[i % reference.size()];
    return dev;
}

double metric_swd(const Sampler& sampler, const DevSet& dev, const StepSchedule& schedule, int n_projections) {
    if (dev.reference.size() == 0)
        throw ArgumentError("metric_swd needs a non-empty reference");
    const Matrix generated = sampler(dev.noise, schedule, dev.labels);
    return -swd(generated, dev.reference.points, n_projections, kProjectionSeed);
}

double metric_swd(const DualTimeVelocityNet& student, const DevSet& dev, const StepSchedule& schedule, int n_projections) {
    const Sampler sampler = [&student](const Matrix& z0, const StepSchedule& s, std::span<const int> labels) {
        return sample_student(student, z0, s, labels);
    };
    return metric_swd(sampler, dev, schedule, n_projections);
}

MetricFn make_swd_metric(const DualTimeVelocityNet& student, const DevSet& dev, int n_projections) {
    return [&student, &dev, n_projections](const StepSchedule& s) { return metric_swd(student, dev, s, n_projections); };
}

std::string audit_to_csv(const std::vector<AuditEntry>& audit) {
    std::ostringstream out;
    out << "eval_index,schedule_json,metric,accepted,m_best\n";
    for (const auto& e : audit) {
        out << e.eval_index << ",\"" << nlohmann::json(e.schedule).dump() << "\"," << nlohmann::json(e.metric).dump()
            << ',' << (e.accepted ? 1 : 0) << ',' << nlohmann::json(e.m_best).dump() << '\n';
    }
    return out.str();
}

}  // namespace flowlab
