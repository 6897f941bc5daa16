#pragma once

#include "mofsmith/dataset.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mofsmith::predictor {

class UnknownProperty : public Error {
public:
    explicit UnknownProperty(const std::string& name) : Error("unknown property '" + name + "'") {}
};

class MalformedPlan : public Error {
public:
    using Error::Error;
};

class UnknownMaterial : public Error {
public:
    explicit UnknownMaterial(const std::string& id) : Error("unknown material '" + id + "'") {}
};

class ModelMiss : public Error {
public:
    ModelMiss(const std::string& property, const std::string& id)
        : Error("no " + property + " prediction available for '" + id + "'"), id_(id) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class Unanswerable : public Error {
public:
    using Error::Error;
};

struct MaterialSelector {
    enum class Kind { named, all, topology };
    Kind kind = Kind::named;
    std::vector<std::string> ids;
    std::string topology;

    /// "XEGKUR, ACOGEF" | "*" | "pcu*"
    static MaterialSelector parse(std::string_view text);
    std::string to_string() const;
    bool operator==(const MaterialSelector&) const = default;
};

struct PlanPair {
    std::string property;  ///< canonical registry name
    MaterialSelector materials;
    bool operator==(const PlanPair&) const = default;
};

struct PredictPlan {
    std::string thought;
    std::vector<PlanPair> pairs;
    std::string final_thought;
};

/// Reads repeated `Property:` / `Material:` (or `Materials:`) line pairs plus the
/// optional `Thought:` and `Final Thought:` lines. Property names resolve through the
/// registry's named-MOF lookups.
PredictPlan parse_predict_plan(std::string_view text, const dataset::Registry& registry);

/// Keys of the primary table selected by `selector`, in table order for `all` and
/// `topology`, in request order for `named` (after suffix normalization).
std::vector<std::string> resolve_materials(const MaterialSelector& selector, const dataset::Registry& registry);

struct Prediction {
    std::string id;
    double value = 0;
    bool operator==(const Prediction&) const = default;
};

struct PredictionTable {
    PropertySpec property;
    std::vector<Prediction> rows;
    std::vector<std::string> missing;

    bool logarithmic() const noexcept { return property.scale == Scale::log; }
};

enum class MissPolicy { raise, skip };

PredictionTable predict(const dataset::Registry& registry, std::string_view property,
                        const std::vector<std::string>& ids, MissPolicy misses = MissPolicy::raise);

/// "However, this is a **logarithmic value**. ..." appended to log-scale observations.
const std::string& log_caveat();

/// Pipe table (id, value) with a header naming the property and unit.
std::string prediction_markdown(const PredictionTable& table);

/// Answers single-value, top/bottom-k, nearest-to-value, and threshold questions.
/// Returns nothing when the question needs free-form reasoning.
std::optional<std::string> answer_deterministic(std::string_view question, const PredictionTable& table);

/// Deterministic answer when possible, otherwise `fallback(markdown)`. A fallback that
/// is absent or answers "nothing" raises Unanswerable.
std::string answer_from_table(std::string_view question, const PredictionTable& table,
                              const std::function<std::string(const std::string&)>& fallback = {});

/// Writes `<dir>/<property>_<timestamp>.csv` with columns id,value,unit,scale.
std::filesystem::path export_csv(const PredictionTable& table, const std::filesystem::path& dir,
                                 std::string_view timestamp);

std::string utc_timestamp();

} // namespace mofsmith::predictor
