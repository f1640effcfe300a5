#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kale {

enum class Split { train, val, test };

std::string_view to_string(Split s) noexcept;

struct MetricRecord {
    std::string run_id;
    std::uint64_t epoch = 0;
    Split split = Split::train;
    std::string metric;
    double value = 0.0;
};

/// Nine significant digits, the value column of the metrics CSV.
std::string format_metric_value(double value);

/// Appends `run_id,epoch,split,metric,value`; writes the header first when the
/// file does not exist yet. The parent directory must exist.
void log_metrics_csv(const std::filesystem::path& path, const MetricRecord& record);

/// Single-writer logger bound to one CSV file.
class MetricLogger {
public:
    explicit MetricLogger(std::filesystem::path path) : path_(std::move(path)) {}
    void log(const MetricRecord& record) const { log_metrics_csv(path_, record); }
    void log(const std::vector<MetricRecord>& records) const;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace kale
