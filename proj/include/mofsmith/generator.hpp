#pragma once

#include "mofsmith/dataset.hpp"

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mofsmith::generator {

class MalformedPlan : public Error {
public:
    using Error::Error;
};

class UnknownProperty : public Error {
public:
    explicit UnknownProperty(const std::string& name)
        : Error("unknown property '" + name + "' (no gene-keyed surrogate)") {}
};

class ObjectiveCountMismatch : public Error {
public:
    ObjectiveCountMismatch(std::size_t properties, std::size_t objectives)
        : Error(std::to_string(properties) + " properties but " + std::to_string(objectives) + " objectives") {}
};

class NoParents : public Error {
public:
    using Error::Error;
};

class BuilderUnavailable : public Error {
public:
    using Error::Error;
};

class BuilderFailed : public Error {
public:
    BuilderFailed(const Gene& gene, const std::string& message)
        : Error("structure builder failed for " + format_gene(gene) + ": " + message) {}
};

struct GenPlan {
    std::string thought;
    std::vector<std::string> properties;
    std::vector<Objective> objectives;
    std::string search_plan;
    std::string ga_plan;
    std::string final_thought;
};

/// Reads Property / Objective / Search look-up table / Genetic algorithm / Final thought
/// lines. With a registry, each property must have a gene-keyed lookup and is
/// replaced by its canonical name.
GenPlan parse_gen_plan(std::string_view text, const dataset::Registry* registry = nullptr);

struct GAConfig {
    std::size_t cycles = 3;
    std::vector<std::string> topologies{"pcu", "dia", "acs", "rtl", "cds", "srs", "ths", "bcu", "fsc"};
    std::size_t parents_per_topology = 100;
    std::size_t children_per_topology = 100;
    /// Pool entries taken per topology (in table order).
    std::size_t base_pool_size = 2000;
    std::uint64_t seed = 0;
    std::size_t widen_attempts = 3;
    bool parallel = false;
};

/// A gene with its property values (parallel to the plan's properties) and fitness.
struct Candidate {
    Gene gene;
    std::vector<double> values;
    double fitness = 0;
    bool operator==(const Candidate&) const = default;
};

/// Interquartile range with linear-interpolation quartiles, floored at 1e-9.
double iqr(std::vector<double> values);

double objective_score(double value, const Objective& objective, double normalizer);
/// Sum of normalized per-objective scores; lower is better.
double fitness(const std::vector<double>& values, const std::vector<Objective>& objectives,
               const std::vector<double>& normalizers);

/// Fitness order with gene order breaking ties.
bool fitter(const Candidate& a, const Candidate& b);

/// The k fittest pool entries. Near/range objectives first restrict to an acceptance
/// window (half-width 0.1 IQR around the target, or the interval itself), doubled up to
/// `widen_attempts` times while fewer than k entries fall inside. A partly filled final
/// window is topped up with the fittest entries outside it; an empty one raises NoParents.
std::vector<Candidate> select_parents(const std::vector<Candidate>& pool, const std::vector<Objective>& objectives,
                                      const std::vector<double>& normalizers, std::size_t k,
                                      std::size_t widen_attempts = 3);

struct Proposal {
    std::vector<Gene> children;
    bool exhausted = false;  ///< fewer than k new combinations existed
};

/// Proposes up to k new genes that reuse the parents' topology, block1 values (in the
/// block1 slot) and block2 values (in the block2 slot), skipping `excluded` and the
/// parents. Parents are ordered fittest first; fitter parents' blocks are drawn more often.
Proposal propose_children(const std::vector<Gene>& parents, std::size_t k, std::mt19937_64& rng,
                          const std::set<Gene>& excluded = {});

/// Keeps only valid, novel proposals and tops the batch up deterministically.
Proposal validate_children(const std::vector<Gene>& proposed, const std::vector<Gene>& parents, std::size_t k,
                           std::mt19937_64& rng, const std::set<Gene>& excluded);

/// Parses a comma-separated "block1+block2" or full-gene list emitted by a model proposer.
std::vector<Gene> parse_children(std::string_view text, std::string_view topology);

/// Values for every plan property, or nothing when the surrogate has no entry.
using Surrogate = std::function<std::optional<std::vector<double>>(const Gene&)>;

/// Optional model-backed proposer: (parents, k) -> raw completion text.
using ModelProposer = std::function<std::string(const std::vector<Gene>& parents, std::size_t k)>;

struct Summary {
    std::size_t count = 0;
    double mean = 0, std = 0, min = 0, max = 0;
    double best_fitness = 0;
};

Summary summarize(const std::vector<Candidate>& candidates, std::size_t property_index = 0);

struct Generation {
    std::size_t index = 0;
    std::vector<Candidate> population;  ///< parents carried into the next cycle
    std::vector<Candidate> offspring;   ///< children evaluated this cycle (empty for generation 0)
};

struct TopologyRun {
    std::string topology;
    std::vector<Generation> generations;
    std::vector<std::string> log;
    Candidate best;
};

struct GenerationSummary {
    std::size_t index = 0;
    Summary population;
    Summary offspring;
};

struct GAResult {
    GenPlan plan;
    GAConfig config;
    std::vector<double> normalizers;
    std::vector<TopologyRun> runs;
    std::vector<GenerationSummary> generations;
    Candidate best;
    std::size_t evaluated = 0;
    std::vector<std::string> log;
};

/// Base pool keyed by topology: entries whose values come from the surrogate.
using GenePool = std::map<std::string, std::vector<Candidate>>;

/// Builds the base pool from the registry's gene table: rows flagged in the pool column,
/// grouped by topology, first `base_pool_size` per topology.
GenePool load_gene_pool(const dataset::Registry& registry, const GenPlan& plan, std::size_t base_pool_size);
Surrogate gene_surrogate(const dataset::Registry& registry, const GenPlan& plan);

/// Elitist refinement per topology: generation 0 = select_parents over that topology's pool;
/// each cycle proposes children, evaluates them, and keeps the best k of parents and children.
GAResult run_ga(const GenPlan& plan, const GAConfig& config, const GenePool& pool, const Surrogate& surrogate,
                const ModelProposer& model = {});

std::string ga_result_json(const GAResult& result);
std::string ga_summary_json(const GAResult& result);
std::string ga_summary_csv(const GAResult& result);

struct BuilderConfig {
    std::string command;  ///< empty selects the stub
    std::vector<std::string> args;  ///< `{gene}` and `{output}` are substituted
    std::string output_template = "structures/{gene}.cif";
};

struct StructureRef {
    Gene gene;
    std::string path;
    bool placeholder = true;
    double a = 0, b = 0, c = 0;
    bool operator==(const StructureRef&) const = default;
};

StructureRef build_structure(const Gene& gene, const BuilderConfig& builder = {});

} // namespace mofsmith::generator
