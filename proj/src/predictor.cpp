#include "mofsmith/predictor.hpp"

#include "mofsmith/intent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

namespace mofsmith::predictor {

using dataset::MaterialKind;
using dataset::Registry;

MaterialSelector MaterialSelector::parse(std::string_view text) {
    auto t = text::trim(text);
    while (!t.empty() && (t.front() == '`' || t.front() == '"' || t.front() == '\'')) t.remove_prefix(1);
    while (!t.empty() && (t.back() == '`' || t.back() == '"' || t.back() == '\'' || t.back() == '.')) t.remove_suffix(1);
    t = text::trim(t);
    if (t.empty()) throw MalformedPlan("empty material list");
    MaterialSelector s;
    if (t == "*") {
        s.kind = Kind::all;
        return s;
    }
    if (t.back() == '*' && t.find(',') == std::string_view::npos) {
        auto topo = text::trim(t.substr(0, t.size() - 1));
        if (topo.empty() || !is_gene_part(topo)) throw MalformedPlan("invalid topology selector '" + std::string(t) + "'");
        s.kind = Kind::topology;
        s.topology = std::string(topo);
        return s;
    }
    for (const auto& part : text::split(t, ',')) {
        auto id = text::trim(part);
        while (!id.empty() && (id.front() == '`' || id.front() == '"' || id.front() == '\'')) id.remove_prefix(1);
        while (!id.empty() && (id.back() == '`' || id.back() == '"' || id.back() == '\'')) id.remove_suffix(1);
        if (id.empty()) throw MalformedPlan("empty material name in '" + std::string(t) + "'");
        s.ids.emplace_back(id);
    }
    return s;
}

std::string MaterialSelector::to_string() const {
    switch (kind) {
    case Kind::all: return "*";
    case Kind::topology: return topology + "*";
    case Kind::named: return text::join(ids, ", ");
    }
    return "";
}

namespace {

// Returns the value after "Key:" when `line` starts with that keyword.
std::optional<std::string_view> field(std::string_view line, std::string_view key) {
    if (!text::starts_with(line, key)) return std::nullopt;
    auto rest = line.substr(key.size());
    rest = text::trim(rest);
    if (rest.empty() || rest.front() != ':') return std::nullopt;
    return text::trim(rest.substr(1));
}

} // namespace

PredictPlan parse_predict_plan(std::string_view src, const Registry& registry) {
    PredictPlan plan;
    std::optional<std::string> pending;
    for (const auto& raw : text::split(src, '\n')) {
        auto line = text::trim(raw);
        if (line.empty()) continue;
        if (auto v = field(line, "Final Thought")) {
            plan.final_thought = std::string(*v);
        } else if (auto t = field(line, "Thought")) {
            if (plan.thought.empty()) plan.thought = std::string(*t);
        } else if (auto p = field(line, "Property")) {
            if (pending) throw MalformedPlan("Property '" + *pending + "' has no Material line");
            const auto* spec = registry.resolve_property(*p);
            if (!spec || !registry.lookup(spec->name, MaterialKind::named_mof)) throw UnknownProperty(std::string(*p));
            pending = spec->name;
        } else if (auto m = field(line, "Materials")) {
            if (!pending) throw MalformedPlan("Material line without a preceding Property");
            plan.pairs.push_back({*pending, MaterialSelector::parse(*m)});
            pending.reset();
        } else if (auto m2 = field(line, "Material")) {
            if (!pending) throw MalformedPlan("Material line without a preceding Property");
            plan.pairs.push_back({*pending, MaterialSelector::parse(*m2)});
            pending.reset();
        }
    }
    if (pending) throw MalformedPlan("Property '" + *pending + "' has no Material line");
    if (plan.pairs.empty()) throw MalformedPlan("plan has no Property/Material pair");
    return plan;
}

std::vector<std::string> resolve_materials(const MaterialSelector& selector, const Registry& registry) {
    const auto& table = registry.primary_table();
    auto key = table.column_index(table.key_column());
    std::vector<std::string> out;
    auto key_of = [&](std::size_t r) { return dataset::format_value(table.rows()[r][key]); };
    switch (selector.kind) {
    case MaterialSelector::Kind::named:
        for (const auto& id : selector.ids) {
            auto row = dataset::material_row(table, id);
            if (!row) throw UnknownMaterial(id);
            out.push_back(key_of(*row));
        }
        break;
    case MaterialSelector::Kind::all:
        for (std::size_t r = 0; r < table.row_count(); ++r) out.push_back(key_of(r));
        break;
    case MaterialSelector::Kind::topology: {
        auto col = table.find_column(registry.topology_column());
        if (!col) throw dataset::UnknownColumn(registry.topology_column());
        for (std::size_t r = 0; r < table.row_count(); ++r)
            if (text::iequals(dataset::format_value(table.rows()[r][*col]), selector.topology)) out.push_back(key_of(r));
        break;
    }
    }
    return out;
}

PredictionTable predict(const Registry& registry, std::string_view property, const std::vector<std::string>& ids,
                        MissPolicy misses) {
    const auto* spec = registry.resolve_property(property);
    if (!spec) throw UnknownProperty(std::string(property));
    auto reg = registry.lookup(spec->name, MaterialKind::named_mof);
    if (!reg) throw UnknownProperty(std::string(property));
    const auto& table = registry.table(reg->table);
    auto col = table.column_index(reg->column);
    PredictionTable out;
    out.property = *spec;
    for (const auto& id : ids) {
        auto row = dataset::material_row(table, id);
        const double* v = row ? std::get_if<double>(&table.rows()[*row][col]) : nullptr;
        if (!v) {
            if (misses == MissPolicy::raise) throw ModelMiss(spec->name, id);
            out.missing.push_back(id);
            continue;
        }
        out.rows.push_back({id, *v});
    }
    return out;
}

const std::string& log_caveat() {
    static const std::string s =
        "However, this is a **logarithmic value**. To get the original value, an exponential must be applied.";
    return s;
}

std::string prediction_markdown(const PredictionTable& table) {
    std::string head = table.property.name;
    if (!table.property.unit.empty()) head += " (" + table.property.unit + ")";
    if (table.logarithmic()) head += " [log]";
    std::string out = "| | " + head + " |\n|---|---|\n";
    for (const auto& r : table.rows) out += "| " + r.id + " | " + text::format_general(r.value) + " |\n";
    return out;
}

namespace {

std::string with_unit(double v, const PropertySpec& p) {
    auto s = text::format_general(v);
    return p.unit.empty() ? s : s + " " + p.unit;
}

// Descending (or ascending) by value; ties by id.
std::vector<Prediction> ranked(std::vector<Prediction> rows, bool descending) {
    std::sort(rows.begin(), rows.end(), [&](const Prediction& a, const Prediction& b) {
        if (a.value != b.value) return descending ? a.value > b.value : a.value < b.value;
        return a.id < b.id;
    });
    return rows;
}

std::string listing(const std::vector<Prediction>& rows, const PropertySpec& p, std::size_t limit = 10) {
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < rows.size() && i < limit; ++i)
        parts.push_back(rows[i].id + " (" + with_unit(rows[i].value, p) + ")");
    auto out = text::join(parts, ", ");
    if (rows.size() > limit) out += ", and " + std::to_string(rows.size() - limit) + " more";
    return out;
}

std::string finish(std::string answer, const PredictionTable& t) {
    if (t.logarithmic()) answer += " " + log_caveat();
    return answer;
}

} // namespace

std::optional<std::string> answer_deterministic(std::string_view question, const PredictionTable& t) {
    const auto& p = t.property;
    if (t.rows.empty()) return std::nullopt;
    if (t.rows.size() == 1) {
        return finish("The predicted " + p.name + " for " + t.rows[0].id + " is **" + with_unit(t.rows[0].value, p) + "**.",
                      t);
    }
    auto count = intent::requested_count(question);
    if (auto near = intent::near_value(question)) {
        auto rows = t.rows;
        std::sort(rows.begin(), rows.end(), [&](const Prediction& a, const Prediction& b) {
            double da = std::abs(a.value - *near), db = std::abs(b.value - *near);
            if (da != db) return da < db;
            return a.id < b.id;
        });
        rows.resize(std::min(rows.size(), count.value_or(1)));
        return finish("The materials with predicted " + p.name + " closest to " + text::format_number(*near) + " are " +
                          listing(rows, p) + ".",
                      t);
    }
    if (auto th = intent::threshold(question)) {
        std::vector<Prediction> rows;
        for (const auto& r : t.rows) {
            bool keep = th->kind == intent::Threshold::Kind::greater ? r.value > th->value
                        : th->kind == intent::Threshold::Kind::less  ? r.value < th->value
                                                                     : r.value >= th->value && r.value <= th->upper;
            if (keep) rows.push_back(r);
        }
        rows = ranked(std::move(rows), th->kind != intent::Threshold::Kind::less);
        if (rows.empty()) return finish("No material meets that condition on the predicted " + p.name + ".", t);
        return finish(std::to_string(rows.size()) + " materials meet that condition on the predicted " + p.name + ": " +
                          listing(rows, p) + ".",
                      t);
    }
    if (auto dir = intent::superlative(question)) {
        bool high = *dir == intent::Direction::high;
        auto rows = ranked(t.rows, high);
        std::string word = high ? "highest" : "lowest";
        if (count && *count > 1) {
            rows.resize(std::min(rows.size(), *count));
            return finish("The " + std::to_string(rows.size()) + " materials with the " + word + " predicted " + p.name +
                              " are " + listing(rows, p) + ".",
                          t);
        }
        return finish("The material with the " + word + " predicted " + p.name + " is " + rows[0].id + " (**" +
                          with_unit(rows[0].value, p) + "**).",
                      t);
    }
    if (t.rows.size() <= 5) {
        std::vector<std::string> parts;
        for (const auto& r : t.rows) parts.push_back(r.id + " is **" + with_unit(r.value, p) + "**");
        return finish("The predicted " + p.name + " for " + text::join(parts, "; for ") + ".", t);
    }
    return std::nullopt;
}

std::string answer_from_table(std::string_view question, const PredictionTable& table,
                              const std::function<std::string(const std::string&)>& fallback) {
    if (table.rows.empty()) throw Unanswerable("no predictions to answer from");
    if (auto a = answer_deterministic(question, table)) return *a;
    if (!fallback) throw Unanswerable("the question needs free-form reasoning over " + std::to_string(table.rows.size()) + " predictions");
    auto answer = std::string(text::trim(fallback(prediction_markdown(table))));
    if (answer.empty() || text::iequals(answer, "nothing")) throw Unanswerable("no answer could be derived from the predictions");
    return finish(answer, table);
}

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

std::filesystem::path export_csv(const PredictionTable& table, const std::filesystem::path& dir,
                                 std::string_view timestamp) {
    std::filesystem::create_directories(dir);
    auto path = dir / (table.property.name + "_" + std::string(timestamp) + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dataset::IoError("cannot write " + path.string());
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    };
    out << "id,value,unit,scale\n";
    for (const auto& r : table.rows)
        out << quote(r.id) << ',' << text::format_number(r.value) << ',' << quote(table.property.unit) << ','
            << to_string(table.property.scale) << '\n';
    return path;
}

} // namespace mofsmith::predictor
