#include "mofsmith/structure.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

namespace mofsmith::structure {

namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

// CIF values may carry a standard uncertainty: 10.234(5).
std::optional<double> cif_number(std::string_view s) {
    auto p = s.find('(');
    if (p != std::string_view::npos) s = s.substr(0, p);
    return text::parse_number(s);
}

// Splits a CIF data line into tokens, honoring single and double quotes.
std::vector<std::string> tokens(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        char q = line[i];
        if (q == '\'' || q == '"') {
            auto e = line.find(q, i + 1);
            if (e == std::string_view::npos) e = line.size();
            out.emplace_back(line.substr(i + 1, e - i - 1));
            i = e + 1;
        } else {
            auto s = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            out.emplace_back(line.substr(s, i - s));
        }
    }
    return out;
}

// "Zn1" -> "Zn", "O2A" -> "O", "C" -> "C"
std::string element_of(std::string_view label) {
    std::string el;
    for (char c : label) {
        if (!std::isalpha(static_cast<unsigned char>(c))) break;
        if (el.empty()) el += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        else if (el.size() == 1 && std::islower(static_cast<unsigned char>(c))) el += c;
        else break;
    }
    return el;
}

} // namespace

double cell_volume(double a, double b, double c, double alpha, double beta, double gamma) {
    if (!(a > 0 && b > 0 && c > 0)) throw Error("cell lengths must be positive");
    for (double x : {alpha, beta, gamma})
        if (!(x > 0 && x < 180)) throw Error("cell angles must lie strictly between 0 and 180 degrees");
    double ca = std::cos(radians(alpha)), cb = std::cos(radians(beta)), cg = std::cos(radians(gamma));
    double r = 1 - ca * ca - cb * cb - cg * cg + 2 * ca * cb * cg;
    if (!(r > 0)) throw Error("cell angles do not form a valid cell");
    return a * b * c * std::sqrt(r);
}

Eigen::Matrix3d lattice_matrix(double a, double b, double c, double alpha, double beta, double gamma) {
    double ca = std::cos(radians(alpha)), cb = std::cos(radians(beta));
    double cg = std::cos(radians(gamma)), sg = std::sin(radians(gamma));
    double cx = c * cb;
    double cy = c * (ca - cb * cg) / sg;
    double cz = std::sqrt(c * c - cx * cx - cy * cy);
    Eigen::Matrix3d m;
    m << a, 0, 0,
         b * cg, b * sg, 0,
         cx, cy, cz;
    return m;
}

std::string hill_formula(const std::map<std::string, std::size_t>& composition) {
    std::string out;
    auto put = [&](const std::string& el, std::size_t n) {
        out += el;
        if (n != 1) out += std::to_string(n);
    };
    bool carbon = composition.count("C") > 0;
    if (carbon) {
        put("C", composition.at("C"));
        if (composition.count("H")) put("H", composition.at("H"));
    }
    for (const auto& [el, n] : composition) {
        if (carbon && (el == "C" || el == "H")) continue;
        put(el, n);
    }
    return out;
}

StructureInfo parse_cif_text(std::string_view src) {
    StructureInfo info;
    std::map<std::string, double> cell;
    auto lines = text::split(src, '\n');
    bool seen_block = false;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto line = text::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        if (text::starts_with(line, "data_")) {
            if (seen_block) break;  // only the first block
            seen_block = true;
            info.name = std::string(line.substr(5));
            continue;
        }
        if (text::starts_with(line, "_cell_length_") || text::starts_with(line, "_cell_angle_")) {
            auto t = tokens(line);
            if (t.size() < 2) throw CifParseError(i + 1, "missing value for " + t[0]);
            auto v = cif_number(t[1]);
            if (!v) throw CifParseError(i + 1, "not a number: " + t[1]);
            cell[t[0]] = *v;
            continue;
        }
        if (line == "loop_") {
            std::vector<std::string> headers;
            std::size_t j = i + 1;
            for (; j < lines.size(); ++j) {
                auto h = text::trim(lines[j]);
                if (h.empty() || h.front() != '_') break;
                headers.emplace_back(h);
            }
            bool atoms = !headers.empty() && text::starts_with(headers[0], "_atom_site_") &&
                         !text::starts_with(headers[0], "_atom_site_aniso");
            std::optional<std::size_t> symbol_col, label_col;
            for (std::size_t h = 0; h < headers.size(); ++h) {
                if (headers[h] == "_atom_site_type_symbol") symbol_col = h;
                if (headers[h] == "_atom_site_label") label_col = h;
            }
            if (atoms && !symbol_col && !label_col)
                throw CifParseError(i + 1, "atom_site loop without label or type_symbol");
            std::vector<std::string> pending;
            for (; j < lines.size(); ++j) {
                auto row = text::trim(lines[j]);
                if (row.empty() || row.front() == '#') {
                    if (row.empty() && pending.empty()) break;
                    continue;
                }
                if (row.front() == '_' || row == "loop_" || text::starts_with(row, "data_")) break;
                for (auto& t : tokens(row)) pending.push_back(std::move(t));
                while (pending.size() >= headers.size()) {
                    if (atoms) {
                        auto el = element_of(pending[symbol_col ? *symbol_col : *label_col]);
                        if (el.empty()) throw CifParseError(j + 1, "cannot determine element");
                        ++info.composition[el];
                        ++info.atom_count;
                    }
                    pending.erase(pending.begin(), pending.begin() + static_cast<long>(headers.size()));
                }
            }
            if (!pending.empty()) throw CifParseError(j, "incomplete loop row");
            i = j - 1;
        }
    }

    static constexpr const char* keys[] = {"_cell_length_a", "_cell_length_b", "_cell_length_c",
                                           "_cell_angle_alpha", "_cell_angle_beta", "_cell_angle_gamma"};
    for (auto k : keys)
        if (!cell.count(k)) throw MissingCellBlock(std::string("missing ") + k);
    info.a = cell["_cell_length_a"];
    info.b = cell["_cell_length_b"];
    info.c = cell["_cell_length_c"];
    info.alpha = cell["_cell_angle_alpha"];
    info.beta = cell["_cell_angle_beta"];
    info.gamma = cell["_cell_angle_gamma"];
    if (info.a <= 0 || info.b <= 0 || info.c <= 0) throw CifParseError(0, "cell lengths must be positive");
    for (double ang : {info.alpha, info.beta, info.gamma})
        if (!(ang > 0 && ang < 180)) throw CifParseError(0, "cell angles must lie in (0, 180)");
    try {
        info.volume = cell_volume(info.a, info.b, info.c, info.alpha, info.beta, info.gamma);
    } catch (const Error& e) {
        throw CifParseError(0, e.what());
    }
    info.formula = hill_formula(info.composition);
    return info;
}

StructureInfo parse_cif(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    auto info = parse_cif_text(ss.str());
    if (info.name.empty()) info.name = path.stem().string();
    return info;
}

std::string describe_structure(const StructureInfo& info) {
    auto g = [](double v) { return text::format_general(v, 6); };
    std::string out = "Structure " + info.name + " has formula " + (info.formula.empty() ? "(no atoms)" : info.formula) +
                      " with " + std::to_string(info.atom_count) + " atoms in the cell. ";
    out += "Cell lengths a = " + g(info.a) + " Å, b = " + g(info.b) + " Å, c = " + g(info.c) + " Å; ";
    out += "angles alpha = " + g(info.alpha) + "°, beta = " + g(info.beta) + "°, gamma = " + g(info.gamma) + "°. ";
    out += "Cell volume is " + g(info.volume) + " Å^3.";
    return out;
}

} // namespace mofsmith::structure
