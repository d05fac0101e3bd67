#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "flowlab/distill.hpp"
#include "flowlab/errors.hpp"
#include "flowlab/flow.hpp"
#include "flowlab/metrics.hpp"
#include "flowlab/sample_batch.hpp"

namespace flowlab {

struct TernaryResult {
    double x = 0.0;
    double value = 0.0;
    int iterations = 0;
};

/// Two-probe ternary search for the maximum of a unimodal f on (lo, hi). Stops when
/// the bracket is no wider than tol or after max_iter iterations and returns the best
/// probed point. Probes stay strictly inside (lo, hi). Throws ArgumentError if lo >= hi.
TernaryResult ternary_search(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-3,
                             int max_iter = 30);

/// Generation-quality score of a schedule on a fixed dev set; higher is better.
using MetricFn = std::function<double(const StepSchedule&)>;

/// Where the interior point t_i may move during its coordinate search.
enum class SearchBounds {
    kNeighbors,  // (t_{i-1}, t_{i+1})
    kPrinted,    // (t_{i-1}, t_i)
};

struct O3sConfig {
    int nfe = 3;
    double tol = 1e-3;
    int max_iter = 30;
    SearchBounds bounds = SearchBounds::kNeighbors;
    /// Cache-key and evaluation grid for schedule coordinates.
    double quantum = 1e-6;
};

struct AuditEntry {
    int eval_index = 0;
    std::vector<double> schedule;
    double metric = 0.0;
    bool accepted = false;
    /// Incumbent metric once this evaluation has been processed.
    double m_best = 0.0;
};

/// Memoizing metric wrapper. Schedules are rounded to the quantum before
/// evaluation; a cached schedule costs no metric call.
class ScheduleEvaluator {
public:
    ScheduleEvaluator(MetricFn metric, double quantum);

    /// Returns (metric, index of the audit entry that produced it).
    std::pair<double, int> evaluate(const StepSchedule& schedule);
    StepSchedule quantize(const StepSchedule& schedule) const;

    int metric_calls() const { return m_calls; }
    std::vector<AuditEntry>& audit() { return m_audit; }
    const std::vector<AuditEntry>& audit() const { return m_audit; }

private:
    MetricFn m_metric;
    double m_quantum;
    std::map<std::vector<std::int64_t>, std::pair<double, int>> m_cache;
    std::vector<AuditEntry> m_audit;
    int m_calls = 0;
};

struct O3sResult {
    StepSchedule best = StepSchedule::uniform(1);
    double m_best = 0.0;
    std::vector<AuditEntry> audit;
    /// m_best after seeding and after every coordinate search.
    std::vector<double> incumbent_trace;
    int metric_calls = 0;
    int sweeps = 0;
};

/// Raised when the metric fails mid-search; carries the audit log so far.
class SearchAborted : public Error {
public:
    SearchAborted(const std::string& what, std::vector<AuditEntry> audit, ErrorKind kind)
        : Error(kind, what), m_audit(std::move(audit)) {}
    const std::vector<AuditEntry>& audit() const { return m_audit; }

private:
    std::vector<AuditEntry> m_audit;
};

/// Coordinate-wise ternary search over the interior points of an n-step schedule,
/// starting from the uniform grid. Sweeps i = n-1 .. 1; a coordinate move is kept
/// only if it strictly improves the incumbent (resetting patience), otherwise
/// patience grows. Stops when patience reaches n or a sweep brings no improvement.
O3sResult o3s_search(const MetricFn& metric, const O3sConfig& config);

/// Maps initial noise to final samples under a schedule.
using Sampler = std::function<Matrix(const Matrix& z0, const StepSchedule& schedule, std::span<const int> labels)>;

/// Fixed dev set: reference batch plus the noise and labels used to generate from it.
struct DevSet {
    SampleBatch reference;
    Matrix noise;
    std::vector<int> labels;
};

/// Noise of eval_size rows from the seed; labels cycle through the reference labels.
DevSet make_dev_set(const SampleBatch& reference, std::size_t eval_size, std::uint64_t seed);

/// -SWD(sampler(noise, schedule), reference).
double metric_swd(const Sampler& sampler, const DevSet& dev, const StepSchedule& schedule,
                  int n_projections = kDefaultProjections);
double metric_swd(const DualTimeVelocityNet& student, const DevSet& dev, const StepSchedule& schedule,
                  int n_projections = kDefaultProjections);

MetricFn make_swd_metric(const DualTimeVelocityNet& student, const DevSet& dev, int n_projections = kDefaultProjections);

/// Audit rows as CSV: eval_index,schedule_json,metric,accepted,m_best.
std::string audit_to_csv(const std::vector<AuditEntry>& audit);

}  // namespace flowlab
