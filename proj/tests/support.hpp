#pragma once

#include "mofsmith/dataset.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace testing {

inline std::filesystem::path source_dir() { return MOFSMITH_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }

inline const mofsmith::dataset::Registry& fixture_registry() {
    static const auto registry = mofsmith::dataset::load_registry(data_dir());
    return registry;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

/// Fresh directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("mofsmith-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

constexpr std::size_t big_rows = 12020;
constexpr std::size_t yusgid_index = 11739;

/// A data root with one searchable table `coremof` of `rows` materials. YUSGID sits at
/// index label 11739 with PLD 3.71515; every other value is seeded noise.
inline std::filesystem::path make_big_dataset(const std::string& name, std::size_t rows = big_rows) {
    auto dir = scratch_dir(name);
    std::mt19937_64 rng(12020);
    std::lognormal_distribution<double> pld(1.5, 0.35);
    std::uniform_real_distribution<double> density(0.2, 2.5);
    std::ostringstream csv;
    csv << ",name,Pore limiting diameter (Å),Largest cavity diameter (Å),Density (g/cm^3)\n";
    char buf[64];
    for (std::size_t i = 0; i < rows; ++i) {
        double p = pld(rng);
        double lcd = p * 1.3;
        double rho = density(rng);
        std::string id = "M" + std::to_string(100000 + i);
        if (i == yusgid_index) {
            id = "YUSGID";
            p = 3.71515;
            lcd = 4.2;
        }
        std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g", p, lcd, rho);
        csv << i << "," << id << "," << buf << "\n";
    }
    write_file(dir / "coremof.csv", csv.str());
    nlohmann::json reg = {
        {"tables", {{{"name", "coremof"}, {"path", "coremof.csv"}, {"key_column", "name"}, {"searchable", true}}}},
        {"primary_table", "coremof"},
    };
    write_file(dir / "registry.json", reg.dump(2));
    return dir;
}

} // namespace testing
