#include "flowlab/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "flowlab/errors.hpp"

namespace flowlab {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ValidationError("cannot write " + path.string());
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double v) {
    return nlohmann::json(v).dump();
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<double>& losses) {
    std::ostringstream out;
    out << "step,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i)
        out << i << ',' << format_double(losses[i]) << '\n';
    write_text(path, out.str());
}

void write_batch_csv(const std::filesystem::path& path, const SampleBatch& batch) {
    std::ostringstream out;
    for (int k = 0; k < batch.dim(); ++k)
        out << 'x' << k << ',';
    out << "label\n";
    for (Eigen::Index i = 0; i < batch.points.rows(); ++i) {
        for (Eigen::Index k = 0; k < batch.points.cols(); ++k)
            out << format_double(batch.points(i, k)) << ',';
        out << batch.labels[static_cast<std::size_t>(i)] << '\n';
    }
    write_text(path, out.str());
}

SampleBatch read_batch_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError(path.string() + " is empty");
    const auto columns = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
    if (columns < 1)
        throw ValidationError(path.string() + " has no coordinate columns");

    std::vector<double> values;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream row(line);
        std::string cell;
        for (Eigen::Index k = 0; k < columns; ++k) {
            if (!std::getline(row, cell, ','))
                throw ValidationError("short row in " + path.string());
            values.push_back(std::stod(cell));
        }
        if (!std::getline(row, cell))
            throw ValidationError("missing label in " + path.string());
        labels.push_back(std::stoi(cell));
    }
    SampleBatch batch{Matrix(static_cast<Eigen::Index>(labels.size()), columns), std::move(labels)};
    std::copy(values.begin(), values.end(), batch.points.data());
    return batch;
}

void write_timing_csv(const std::filesystem::path& path, const std::vector<double>& seconds, int teacher_nfe) {
    std::ostringstream out;
    out << "step,seconds,teacher_nfe\n";
    for (std::size_t i = 0; i < seconds.size(); ++i)
        out << i << ',' << format_double(seconds[i]) << ',' << teacher_nfe << '\n';
    write_text(path, out.str());
}

void write_schedule(const std::filesystem::path& path, const StepSchedule& schedule) {
    write_text(path, schedule.to_json() + "\n");
}

StepSchedule read_schedule(const std::filesystem::path& path) {
    return StepSchedule::from_json(read_text(path));
}

}  // namespace flowlab
