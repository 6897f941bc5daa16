#pragma once

#include "mofsmith/core.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace mofsmith::structure {

class CifParseError : public Error {
public:
    CifParseError(std::size_t line, const std::string& what)
        : Error("CIF parse error at line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MissingCellBlock : public Error {
public:
    using Error::Error;
};

struct StructureInfo {
    std::string name;  ///< data_ block name
    double a = 0, b = 0, c = 0;
    double alpha = 0, beta = 0, gamma = 0;  ///< degrees
    std::size_t atom_count = 0;
    std::map<std::string, std::size_t> composition;
    std::string formula;  ///< Hill order
    double volume = 0;    ///< cubic angstrom
};

/// Reads the first data block: cell lengths and angles, and the _atom_site_ loop.
StructureInfo parse_cif_text(std::string_view text);
StructureInfo parse_cif(const std::filesystem::path& path);

/// V = abc * sqrt(1 - cos^2 a - cos^2 b - cos^2 g + 2 cos a cos b cos g).
double cell_volume(double a, double b, double c, double alpha, double beta, double gamma);

/// Rows are the lattice vectors: a along x, b in the xy plane.
Eigen::Matrix3d lattice_matrix(double a, double b, double c, double alpha, double beta, double gamma);

/// Carbon first, then hydrogen, then the rest alphabetically; without carbon, all alphabetical.
std::string hill_formula(const std::map<std::string, std::size_t>& composition);

std::string describe_structure(const StructureInfo& info);

} // namespace mofsmith::structure
