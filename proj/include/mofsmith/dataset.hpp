#pragma once

#include "mofsmith/core.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mofsmith::dataset {

class IoError : public Error {
public:
    using Error::Error;
};

class CsvParseError : public Error {
public:
    CsvParseError(std::size_t line, const std::string& what)
        : Error("CSV parse error at line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateKey : public Error {
public:
    explicit DuplicateKey(const std::string& key) : Error("duplicate key '" + key + "'"), key_(key) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class UnknownTable : public Error {
public:
    explicit UnknownTable(const std::string& name) : Error("unknown table '" + name + "'") {}
};

class UnknownColumn : public Error {
public:
    explicit UnknownColumn(const std::string& name) : Error("unknown column '" + name + "'") {}
};

enum class DType { number, text, boolean };

std::string_view to_string(DType dtype) noexcept;

/// A cell: null, number, text, or boolean.
using Value = std::variant<std::monostate, double, std::string, bool>;

inline bool is_null(const Value& v) noexcept { return std::holds_alternative<std::monostate>(v); }
std::string format_value(const Value& v);

struct Column {
    std::string header;
    DType dtype = DType::text;
    bool operator==(const Column&) const = default;
};

using Row = std::vector<Value>;

/// Column-typed, row-major table. Rows carry an index label (the CSV's leading
/// unnamed column when present, otherwise the 0-based row position).
class Table {
public:
    Table() = default;
    Table(std::string name, std::vector<Column> columns, std::vector<Row> rows,
          std::vector<std::string> index, std::string key_column = "name");

    const std::string& name() const noexcept { return name_; }
    const std::vector<Column>& columns() const noexcept { return columns_; }
    const std::vector<Row>& rows() const noexcept { return rows_; }
    const std::vector<std::string>& index() const noexcept { return index_; }
    const std::string& key_column() const noexcept { return key_column_; }
    std::size_t row_count() const noexcept { return rows_.size(); }
    std::size_t column_count() const noexcept { return columns_.size(); }

    std::optional<std::size_t> find_column(std::string_view header) const noexcept;
    std::size_t column_index(std::string_view header) const;
    bool has_key() const noexcept { return find_column(key_column_).has_value(); }

    /// Re-keys the table; throws UnknownColumn or DuplicateKey.
    void set_key_column(std::string header);

    bool operator==(const Table&) const = default;

private:
    std::string name_;
    std::vector<Column> columns_;
    std::vector<Row> rows_;
    std::vector<std::string> index_;
    std::string key_column_;

    void check_keys() const;
};

/// RFC-4180 reader. Returns records; quoted fields may contain commas, quotes, newlines.
std::vector<std::vector<std::string>> read_csv_records(std::string_view text);

Table parse_table(std::string_view csv_text, std::string name, std::string key_column = "name");
Table load_table(const std::filesystem::path& path, std::string name,
                 std::string key_column = "name");

/// Exact match on the key column, then case-insensitive, then the same two
/// attempts with one trailing `_<word>` suffix stripped ("YUSGID_clean" -> "YUSGID").
std::optional<std::size_t> material_row(const Table& table, std::string_view key);

/// Strips one trailing `_<word>` suffix; returns the input unchanged when none.
std::string strip_material_suffix(std::string_view key);

/// Lowercases and folds unicode subscript digits onto the preceding word ("CO ₂" -> "co2").
std::string fold_property_name(std::string_view name);

enum class MaterialKind { named_mof, gene };

struct LookupRegistration {
    PropertySpec property;
    std::string table;
    std::string column;
    MaterialKind material_kind = MaterialKind::named_mof;
};

struct TableEntry {
    Table table;
    bool searchable = true;
    std::map<std::string, std::vector<std::string>> column_aliases;
};

/// Immutable after construction: tables, property specs, and lookup bindings.
class Registry {
public:
    void add_table(Table table, bool searchable = true,
                   std::map<std::string, std::vector<std::string>> aliases = {});
    void register_lookup(LookupRegistration registration);

    const Table& table(std::string_view name) const;
    const Table* find_table(std::string_view name) const noexcept;
    const TableEntry* find_entry(std::string_view name) const noexcept;
    const std::vector<TableEntry>& tables() const noexcept { return tables_; }

    const std::vector<PropertySpec>& properties() const noexcept { return properties_; }
    const PropertySpec* find_property(std::string_view name) const noexcept;
    /// Matches canonical names, then aliases, case-insensitively with unicode subscript digits folded.
    const PropertySpec* resolve_property(std::string_view name) const noexcept;
    std::optional<LookupRegistration> lookup(std::string_view property, MaterialKind kind) const;
    const std::vector<LookupRegistration>& lookups() const noexcept { return lookups_; }

    void set_primary_table(std::string name);
    const Table& primary_table() const;
    const std::string& primary_table_name() const noexcept { return primary_; }

    void set_topology_column(std::string column) { topology_column_ = std::move(column); }
    const std::string& topology_column() const noexcept { return topology_column_; }

    struct GenePool {
        std::string table;
        std::string pool_column;
    };
    void set_gene_pool(GenePool pool);
    const std::optional<GenePool>& gene_pool() const noexcept { return gene_pool_; }

private:
    std::vector<TableEntry> tables_;
    std::vector<PropertySpec> properties_;
    std::vector<LookupRegistration> lookups_;
    std::string primary_;
    std::string topology_column_ = "topology";
    std::optional<GenePool> gene_pool_;
};

/// Reads `registry.json` under `root`; table paths are relative to `root`.
Registry load_registry(const std::filesystem::path& root);

/// Resolution order for the dataset root: explicit flag, then `MOFSMITH_DATA`.
std::optional<std::filesystem::path> resolve_data_root(const std::optional<std::string>& flag);

} // namespace mofsmith::dataset
