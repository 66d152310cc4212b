#pragma once
// Small fixtures shared by the unit tests.
#include "satthermo/dataset.hpp"
#include "satthermo/random.hpp"
#include "satthermo/timeseries.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace testing_support {

using namespace satthermo;

inline Timestamp ts(int y, unsigned m, unsigned d, int hh = 0, int mm = 0) {
    return std::chrono::sys_days{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}} +
           std::chrono::hours{hh} + Minutes{mm};
}

inline Timestamp t0() { return ts(2023, 1, 1); }

/// Rows of features drawn uniformly from [lo, hi] per column, target = f(row).
inline Dataset make_dataset(std::size_t n, std::vector<std::string> names,
                            std::vector<std::pair<double, double>> ranges,
                            const std::function<double(std::span<const double>)>& f,
                            std::uint64_t seed = 7, TargetKind kind = TargetKind::topsoil) {
    Dataset ds(kind, std::move(names));
    Rng rng(seed);
    std::vector<double> row(ranges.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < ranges.size(); ++j) {
            row[j] = ranges[j].first + (ranges[j].second - ranges[j].first) * uniform01(rng);
        }
        ds.add_row(t0() + kModelStep * static_cast<long>(i), row, f(row));
    }
    return ds;
}

/// (T, RH) dataset following the published topsoil equation, with optional Gaussian noise.
inline Dataset eq2_dataset(std::size_t n, double sigma = 0.0, std::uint64_t seed = 7) {
    Rng noise(seed ^ 0x5eedULL);
    return make_dataset(
        n, default_features(), {{5.0, 35.0}, {20.0, 90.0}},
        [&](std::span<const double> x) { return 0.88 * x[0] + 0.19 * x[1] - 8.05 + sigma * standard_normal(noise); },
        seed);
}

/// Fresh, empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        std::string name = "satthermo_";
        if (info) name += std::string(info->test_suite_name()) + "_" + info->name();
        for (auto& c : name) {
            if (c == '/') c = '_';
        }
        path_ = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testing_support
