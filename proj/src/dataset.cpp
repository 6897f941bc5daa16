#include "mofsmith/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace mofsmith::dataset {

std::string_view to_string(DType dtype) noexcept {
    switch (dtype) {
    case DType::number: return "number";
    case DType::text: return "text";
    case DType::boolean: return "boolean";
    }
    return "text";
}

std::string format_value(const Value& v) {
    if (is_null(v)) return "";
    if (auto d = std::get_if<double>(&v)) return text::format_number(*d);
    if (auto b = std::get_if<bool>(&v)) return *b ? "True" : "False";
    return std::get<std::string>(v);
}

Table::Table(std::string name, std::vector<Column> columns, std::vector<Row> rows,
             std::vector<std::string> index, std::string key_column)
    : name_(std::move(name)), columns_(std::move(columns)), rows_(std::move(rows)),
      index_(std::move(index)), key_column_(std::move(key_column)) {
    for (const auto& r : rows_)
        if (r.size() != columns_.size()) throw Error("table '" + name_ + "': ragged row");
    if (index_.empty()) {
        index_.reserve(rows_.size());
        for (std::size_t i = 0; i < rows_.size(); ++i) index_.push_back(std::to_string(i));
    }
    if (index_.size() != rows_.size()) throw Error("table '" + name_ + "': index length mismatch");
    check_keys();
}

std::optional<std::size_t> Table::find_column(std::string_view header) const noexcept {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].header == header) return i;
    return std::nullopt;
}

std::size_t Table::column_index(std::string_view header) const {
    if (auto i = find_column(header)) return *i;
    throw UnknownColumn(std::string(header));
}

void Table::set_key_column(std::string header) {
    column_index(header);
    key_column_ = std::move(header);
    check_keys();
}

void Table::check_keys() const {
    auto k = find_column(key_column_);
    if (!k) return;
    std::set<std::string> seen;
    for (const auto& r : rows_) {
        if (is_null(r[*k])) continue;
        auto key = std::string(text::trim(format_value(r[*k])));
        if (!seen.insert(key).second) throw DuplicateKey(key);
    }
}

std::vector<std::vector<std::string>> read_csv_records(std::string_view in) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    std::size_t line = 1;
    std::size_t i = 0;
    bool any = false;
    if (in.substr(0, 3) == "\xEF\xBB\xBF") i = 3;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
        any = false;
    };

    while (i < in.size()) {
        char c = in[i];
        if (c == '"' && field.empty()) {
            std::size_t open_line = line;
            ++i;
            while (true) {
                if (i >= in.size()) throw CsvParseError(open_line, "unterminated quoted field");
                if (in[i] == '"') {
                    if (i + 1 < in.size() && in[i + 1] == '"') {
                        field += '"';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                if (in[i] == '\n') ++line;
                field += in[i++];
            }
            any = true;
            if (i < in.size() && in[i] != ',' && in[i] != '\n' && in[i] != '\r')
                throw CsvParseError(line, "unexpected character after closing quote");
            continue;
        }
        if (c == ',') {
            end_field();
            any = true;
            ++i;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < in.size() && in[i + 1] == '\n') ++i;
            ++i;
            end_record();
            ++line;
        } else {
            if (c == '"') throw CsvParseError(line, "quote inside unquoted field");
            field += c;
            any = true;
            ++i;
        }
    }
    if (any || !field.empty() || !record.empty()) end_record();
    return records;
}

namespace {

bool parse_bool(std::string_view s, bool& out) {
    auto t = text::lower(text::trim(s));
    if (t == "true" || t == "yes") {
        out = true;
        return true;
    }
    if (t == "false" || t == "no") {
        out = false;
        return true;
    }
    return false;
}

} // namespace

Table parse_table(std::string_view csv_text, std::string name, std::string key_column) {
    auto records = read_csv_records(csv_text);
    if (records.empty()) throw CsvParseError(1, "missing header row");
    auto header = std::move(records.front());
    bool has_index = !header.empty() && header.front().empty();
    std::size_t first = has_index ? 1 : 0;
    std::size_t width = header.size();

    std::vector<std::string> index;
    std::vector<std::vector<std::string>> cells;
    cells.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        auto& rec = records[r];
        if (rec.size() == 1 && rec[0].empty()) continue; // blank line
        if (rec.size() != width)
            throw CsvParseError(r + 1, "expected " + std::to_string(width) + " fields, got " +
                                           std::to_string(rec.size()));
        if (has_index) index.push_back(rec[0]);
        cells.push_back(std::move(rec));
    }

    std::vector<Column> columns;
    for (std::size_t c = first; c < width; ++c) {
        bool numeric = true, boolean = true;
        for (const auto& rec : cells) {
            auto cell = text::trim(rec[c]);
            if (cell.empty()) continue;
            if (numeric && !text::parse_number(cell)) numeric = false;
            bool b;
            if (boolean && !parse_bool(cell, b)) boolean = false;
        }
        DType t = numeric ? DType::number : boolean ? DType::boolean : DType::text;
        columns.push_back({header[c], t});
    }

    std::vector<Row> rows;
    rows.reserve(cells.size());
    for (const auto& rec : cells) {
        Row row;
        row.reserve(columns.size());
        for (std::size_t c = first; c < width; ++c) {
            const auto& col = columns[c - first];
            auto cell = text::trim(rec[c]);
            if (cell.empty()) {
                row.emplace_back(std::monostate{});
            } else if (col.dtype == DType::number) {
                row.emplace_back(*text::parse_number(cell));
            } else if (col.dtype == DType::boolean) {
                bool b = false;
                parse_bool(cell, b);
                row.emplace_back(b);
            } else {
                row.emplace_back(std::string(rec[c]));
            }
        }
        rows.push_back(std::move(row));
    }
    return Table(std::move(name), std::move(columns), std::move(rows), std::move(index),
                 std::move(key_column));
}

Table load_table(const std::filesystem::path& path, std::string name, std::string key_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_table(ss.str(), std::move(name), std::move(key_column));
}

std::string strip_material_suffix(std::string_view key) {
    auto pos = key.rfind('_');
    if (pos == std::string_view::npos || pos == 0 || pos + 1 == key.size()) return std::string(key);
    auto suffix = key.substr(pos + 1);
    bool word = std::all_of(suffix.begin(), suffix.end(),
                            [](unsigned char c) { return std::isalnum(c); });
    return word ? std::string(key.substr(0, pos)) : std::string(key);
}

namespace {

std::optional<std::size_t> match_key(const Table& table, std::size_t col, std::string_view key) {
    const auto& rows = table.rows();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto s = std::get_if<std::string>(&rows[i][col]);
        if (s && text::trim(*s) == key) return i;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto s = std::get_if<std::string>(&rows[i][col]);
        if (s && text::iequals(text::trim(*s), key)) return i;
    }
    return std::nullopt;
}

} // namespace

std::optional<std::size_t> material_row(const Table& table, std::string_view key) {
    auto col = table.find_column(table.key_column());
    if (!col) return std::nullopt;
    key = text::trim(key);
    if (key.empty()) return std::nullopt;
    if (auto r = match_key(table, *col, key)) return r;
    auto stem = strip_material_suffix(key);
    if (stem != key) return match_key(table, *col, stem);
    return std::nullopt;
}

void Registry::add_table(Table table, bool searchable,
                         std::map<std::string, std::vector<std::string>> aliases) {
    if (find_table(table.name())) throw Error("table '" + table.name() + "' registered twice");
    for (const auto& [col, _] : aliases) table.column_index(col);
    tables_.push_back({std::move(table), searchable, std::move(aliases)});
}

void Registry::register_lookup(LookupRegistration reg) {
    const Table& t = table(reg.table);
    auto col = t.find_column(reg.column);
    if (!col) throw UnknownColumn(reg.column);
    if (t.columns()[*col].dtype != DType::number)
        throw Error("lookup column '" + reg.column + "' is not numeric");
    if (!t.has_key()) throw Error("lookup table '" + reg.table + "' has no key column");
    if (reg.material_kind == MaterialKind::gene) {
        const auto& rows = t.rows();
        auto k = t.column_index(t.key_column());
        for (const auto& r : rows)
            if (auto s = std::get_if<std::string>(&r[k])) parse_gene(*s);
    }
    auto existing = std::find_if(properties_.begin(), properties_.end(),
                                 [&](const PropertySpec& p) { return p.name == reg.property.name; });
    if (existing == properties_.end()) {
        properties_.push_back(reg.property);
    } else if (existing->unit != reg.property.unit || existing->scale != reg.property.scale) {
        throw Error("property '" + reg.property.name + "' registered with conflicting metadata");
    } else {
        for (const auto& a : reg.property.aliases)
            if (std::find(existing->aliases.begin(), existing->aliases.end(), a) == existing->aliases.end())
                existing->aliases.push_back(a);
    }
    lookups_.push_back(std::move(reg));
}

const Table& Registry::table(std::string_view name) const {
    if (auto t = find_table(name)) return *t;
    throw UnknownTable(std::string(name));
}

const Table* Registry::find_table(std::string_view name) const noexcept {
    auto e = find_entry(name);
    return e ? &e->table : nullptr;
}

const TableEntry* Registry::find_entry(std::string_view name) const noexcept {
    for (const auto& e : tables_)
        if (e.table.name() == name) return &e;
    for (const auto& e : tables_)
        if (text::iequals(e.table.name(), name)) return &e;
    return nullptr;
}

const PropertySpec* Registry::find_property(std::string_view name) const noexcept {
    for (const auto& p : properties_)
        if (p.name == name) return &p;
    return nullptr;
}

std::string fold_property_name(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto c = static_cast<unsigned char>(s[i]);
        if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x82) {
            auto d = static_cast<unsigned char>(s[i + 2]);
            if (d >= 0x80 && d <= 0x89) {
                while (!out.empty() && out.back() == ' ') out.pop_back();
                out += static_cast<char>('0' + (d - 0x80));
                i += 2;
                continue;
            }
        }
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

const PropertySpec* Registry::resolve_property(std::string_view name) const noexcept {
    auto trimmed = text::trim(name);
    while (!trimmed.empty() && (trimmed.front() == '`' || trimmed.front() == '\'' || trimmed.front() == '"'))
        trimmed.remove_prefix(1);
    while (!trimmed.empty() && (trimmed.back() == '`' || trimmed.back() == '\'' || trimmed.back() == '"'))
        trimmed.remove_suffix(1);
    if (auto p = find_property(trimmed)) return p;
    auto folded = fold_property_name(trimmed);
    for (const auto& p : properties_)
        if (fold_property_name(p.name) == folded) return &p;
    for (const auto& p : properties_)
        for (const auto& a : p.aliases)
            if (fold_property_name(a) == folded) return &p;
    return nullptr;
}

std::optional<LookupRegistration> Registry::lookup(std::string_view property, MaterialKind kind) const {
    for (const auto& l : lookups_)
        if (l.property.name == property && l.material_kind == kind) return l;
    return std::nullopt;
}

void Registry::set_primary_table(std::string name) {
    table(name);
    primary_ = std::move(name);
}

const Table& Registry::primary_table() const {
    if (primary_.empty()) throw Error("registry has no primary table");
    return table(primary_);
}

void Registry::set_gene_pool(GenePool pool) {
    const Table& t = table(pool.table);
    t.column_index(pool.pool_column);
    gene_pool_ = std::move(pool);
}

Registry load_registry(const std::filesystem::path& root) {
    auto file = root / "registry.json";
    std::ifstream in(file);
    if (!in) throw IoError("cannot read '" + file.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed registry '" + file.string() + "': " + e.what());
    }

    Registry reg;
    try {
        for (const auto& t : doc.at("tables")) {
            auto name = t.at("name").get<std::string>();
            auto key = t.value("key_column", std::string("name"));
            auto table = load_table(root / t.at("path").get<std::string>(), name, key);
            std::map<std::string, std::vector<std::string>> aliases;
            if (t.contains("aliases"))
                aliases = t.at("aliases").get<std::map<std::string, std::vector<std::string>>>();
            reg.add_table(std::move(table), t.value("searchable", true), std::move(aliases));
        }
        if (doc.contains("primary_table")) reg.set_primary_table(doc.at("primary_table").get<std::string>());
        if (doc.contains("topology_column")) reg.set_topology_column(doc.at("topology_column").get<std::string>());
        for (const auto& p : doc.value("properties", nlohmann::json::array())) {
            PropertySpec spec;
            spec.name = p.at("name").get<std::string>();
            spec.unit = p.value("unit", std::string());
            spec.scale = parse_scale(p.value("scale", std::string("linear")));
            spec.aliases = p.value("aliases", std::vector<std::string>{});
            for (const auto& l : p.at("lookups")) {
                auto kind = l.value("material_kind", std::string("named_mof"));
                if (kind != "named_mof" && kind != "gene")
                    throw Error("unknown material_kind '" + kind + "'");
                reg.register_lookup({spec, l.at("table").get<std::string>(), l.at("column").get<std::string>(),
                                     kind == "gene" ? MaterialKind::gene : MaterialKind::named_mof});
            }
        }
        if (doc.contains("gene_pool")) {
            const auto& g = doc.at("gene_pool");
            reg.set_gene_pool({g.at("table").get<std::string>(), g.at("pool_column").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed registry '" + file.string() + "': " + e.what());
    }
    return reg;
}

std::optional<std::filesystem::path> resolve_data_root(const std::optional<std::string>& flag) {
    if (flag && !flag->empty()) return std::filesystem::path(*flag);
    if (const char* env = std::getenv("MOFSMITH_DATA"); env && *env) return std::filesystem::path(env);
    return std::nullopt;
}

} // namespace mofsmith::dataset
