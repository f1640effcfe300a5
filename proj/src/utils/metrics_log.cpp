#include "kale/metrics_log.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "kale/errors.hpp"

namespace kale {

std::string_view to_string(Split s) noexcept {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "train";
}

std::string format_metric_value(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

void log_metrics_csv(const std::filesystem::path& path, const MetricRecord& record) {
    if (!std::isfinite(record.value)) {
        throw ValueError("metric '" + record.metric + "' has non-finite value");
    }
    for (std::string_view field : {std::string_view(record.run_id), std::string_view(record.metric)}) {
        if (field.find_first_of(",\n") != std::string_view::npos) {
            throw ValueError("metric CSV field contains a separator: " + std::string(field));
        }
    }
    const auto parent = path.parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent)) {
        throw IoError("metrics directory does not exist: " + parent.string());
    }
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot open metrics file for append: " + path.string());
    if (fresh) out << "run_id,epoch,split,metric,value\n";
    out << record.run_id << ',' << record.epoch << ',' << to_string(record.split) << ','
        << record.metric << ',' << format_metric_value(record.value) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

void MetricLogger::log(const std::vector<MetricRecord>& records) const {
    for (const auto& r : records) log_metrics_csv(path_, r);
}

}  // namespace kale
