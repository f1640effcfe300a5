#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "kale/errors.hpp"
#include "kale/metrics_log.hpp"

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / ("kale_metrics_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(MetricsLog, HeaderThenRows) {
    const auto dir = temp_dir("rows");
    const auto path = dir / "m.csv";
    kale::log_metrics_csv(path, {"r1", 1, kale::Split::train, "loss", 0.5});
    auto l = lines(path);
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l[0], "run_id,epoch,split,metric,value");
    EXPECT_EQ(l[1], "r1,1,train,loss,0.5");
    kale::log_metrics_csv(path, {"r1", 2, kale::Split::val, "accuracy", 1.0 / 3.0});
    l = lines(path);
    ASSERT_EQ(l.size(), 3u);
    EXPECT_EQ(l[0], "run_id,epoch,split,metric,value");
    EXPECT_EQ(l[2], "r1,2,val,accuracy,0.333333333");
}

TEST(MetricsLog, FormatNineSignificantDigits) {
    EXPECT_EQ(kale::format_metric_value(1.0 / 3.0), "0.333333333");
    EXPECT_EQ(kale::format_metric_value(2.0), "2");
    EXPECT_EQ(kale::format_metric_value(123456789012.0), "1.23456789e+11");
    EXPECT_EQ(kale::to_string(kale::Split::test), "test");
}

TEST(MetricsLog, Errors) {
    const auto dir = temp_dir("errors");
    EXPECT_THROW(kale::log_metrics_csv(dir / "missing" / "m.csv", {"r", 0, kale::Split::train, "loss", 1.0}),
                 kale::IoError);
    EXPECT_THROW(kale::log_metrics_csv(dir / "m.csv",
                                       {"r", 0, kale::Split::train, "loss", std::numeric_limits<double>::quiet_NaN()}),
                 kale::ValueError);
    EXPECT_THROW(kale::log_metrics_csv(dir / "m.csv", {"r,x", 0, kale::Split::train, "loss", 1.0}), kale::ValueError);
    EXPECT_THROW(kale::log_metrics_csv(dir / "m.csv", {"r", 0, kale::Split::train, "a,b", 1.0}), kale::ValueError);
}

TEST(MetricsLog, LoggerBatch) {
    const auto dir = temp_dir("logger");
    kale::MetricLogger logger(dir / "m.csv");
    logger.log(std::vector<kale::MetricRecord>{{"r", 1, kale::Split::train, "loss", 1.5},
                                               {"r", 1, kale::Split::test, "auc", 0.75}});
    logger.log({"r", 2, kale::Split::train, "loss", 1.25});
    const auto l = lines(logger.path());
    ASSERT_EQ(l.size(), 4u);
    EXPECT_EQ(l[2], "r,1,test,auc,0.75");
}
