#include "mofsmith/generator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sys/wait.h>
#include <thread>
#include <unordered_map>

namespace mofsmith::generator {

using nlohmann::json;

namespace {

std::optional<std::string_view> field(std::string_view line, std::string_view key) {
    if (line.size() < key.size() || !text::iequals(line.substr(0, key.size()), key)) return std::nullopt;
    auto rest = text::trim(line.substr(key.size()));
    if (rest.empty() || rest.front() != ':') return std::nullopt;
    return text::trim(rest.substr(1));
}

std::string strip_ticks(std::string_view s) {
    s = text::trim(s);
    while (!s.empty() && (s.front() == '`' || s.front() == '\'' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == '`' || s.back() == '\'' || s.back() == '"' || s.back() == '.')) s.remove_suffix(1);
    return std::string(text::trim(s));
}

} // namespace

GenPlan parse_gen_plan(std::string_view src, const dataset::Registry* registry) {
    GenPlan plan;
    bool have_props = false, have_obj = false;
    for (const auto& raw : text::split(src, '\n')) {
        auto line = text::trim(raw);
        if (line.empty()) continue;
        if (auto v = field(line, "Final thought")) {
            plan.final_thought = std::string(*v);
        } else if (auto t = field(line, "Thought")) {
            if (plan.thought.empty()) plan.thought = std::string(*t);
        } else if (auto p = field(line, "Property")) {
            if (have_props) throw MalformedPlan("Property line appears twice");
            have_props = true;
            for (const auto& part : text::split(*p, ',')) {
                auto name = strip_ticks(part);
                if (name.empty()) throw MalformedPlan("empty property name");
                if (registry) {
                    const auto* spec = registry->resolve_property(name);
                    if (!spec || !registry->lookup(spec->name, dataset::MaterialKind::gene)) throw UnknownProperty(name);
                    name = spec->name;
                }
                plan.properties.push_back(name);
            }
        } else if (auto o = field(line, "Objective")) {
            if (have_obj) throw MalformedPlan("Objective line appears twice");
            have_obj = true;
            for (const auto& part : text::split(*o, ',')) {
                try {
                    plan.objectives.push_back(parse_objective(strip_ticks(part)));
                } catch (const Error& e) {
                    throw MalformedPlan(e.what());
                }
            }
        } else if (auto s = field(line, "Search look-up table")) {
            plan.search_plan = std::string(*s);
        } else if (auto g = field(line, "Genetic algorithm")) {
            plan.ga_plan = std::string(*g);
        }
    }
    if (!have_props) throw MalformedPlan("plan has no Property line");
    if (!have_obj) throw MalformedPlan("plan has no Objective line");
    if (plan.properties.size() != plan.objectives.size())
        throw ObjectiveCountMismatch(plan.properties.size(), plan.objectives.size());
    return plan;
}

double iqr(std::vector<double> v) {
    if (v.empty()) return 1e-9;
    std::sort(v.begin(), v.end());
    auto q = [&](double p) {
        double pos = p * static_cast<double>(v.size() - 1);
        auto lo = static_cast<std::size_t>(std::floor(pos));
        auto hi = static_cast<std::size_t>(std::ceil(pos));
        return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
    };
    return std::max(q(0.75) - q(0.25), 1e-9);
}

double objective_score(double v, const Objective& o, double n) {
    switch (o.kind) {
    case ObjectiveKind::max: return -v / n;
    case ObjectiveKind::min: return v / n;
    case ObjectiveKind::near: return std::abs(v - o.target) / n;
    case ObjectiveKind::range:
        if (v < o.low) return (o.low - v) / n;
        if (v > o.high) return (v - o.high) / n;
        return 0.0;
    }
    return 0.0;
}

double fitness(const std::vector<double>& values, const std::vector<Objective>& objectives,
               const std::vector<double>& normalizers) {
    if (values.size() != objectives.size() || normalizers.size() != objectives.size())
        throw Error("fitness: values, objectives, and normalizers differ in length");
    double total = 0;
    for (std::size_t i = 0; i < values.size(); ++i) total += objective_score(values[i], objectives[i], normalizers[i]);
    return total;
}

bool fitter(const Candidate& a, const Candidate& b) {
    if (a.fitness != b.fitness) return a.fitness < b.fitness;
    return a.gene < b.gene;
}

std::vector<Candidate> select_parents(const std::vector<Candidate>& pool, const std::vector<Objective>& objectives,
                                      const std::vector<double>& normalizers, std::size_t k,
                                      std::size_t widen_attempts) {
    if (pool.empty()) throw NoParents("the look-up pool is empty");
    if (k == 0) return {};
    auto sorted = pool;
    std::sort(sorted.begin(), sorted.end(), fitter);

    bool windowed = std::any_of(objectives.begin(), objectives.end(), [](const Objective& o) {
        return o.kind == ObjectiveKind::near || o.kind == ObjectiveKind::range;
    });
    if (!windowed) {
        sorted.resize(std::min(k, sorted.size()));
        return sorted;
    }

    auto inside = [&](const Candidate& c, std::size_t attempt) {
        double scale = std::ldexp(1.0, static_cast<int>(attempt));
        for (std::size_t j = 0; j < objectives.size(); ++j) {
            const auto& o = objectives[j];
            double v = c.values[j];
            if (o.kind == ObjectiveKind::near) {
                if (std::abs(v - o.target) > 0.1 * normalizers[j] * scale) return false;
            } else if (o.kind == ObjectiveKind::range) {
                double half = (o.high - o.low) / 2;
                double base = (std::isfinite(half) && half > 0) ? half : 0.1 * normalizers[j];
                double slack = (scale - 1) * base;
                if (v < o.low - slack || v > o.high + slack) return false;
            }
        }
        return true;
    };

    std::vector<Candidate> in;
    for (std::size_t attempt = 0; attempt <= widen_attempts; ++attempt) {
        in.clear();
        for (const auto& c : sorted)
            if (inside(c, attempt)) in.push_back(c);
        if (in.size() >= k) {
            in.resize(k);
            return in;
        }
    }
    if (in.empty()) throw NoParents("no look-up entry falls near the objective, even after widening the window");
    std::set<Gene> taken;
    for (const auto& c : in) taken.insert(c.gene);
    for (const auto& c : sorted) {
        if (in.size() >= k) break;
        if (!taken.count(c.gene)) in.push_back(c);
    }
    return in;
}

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct BlockUrn {
    std::vector<std::string> blocks;
    std::vector<double> cumulative;

    std::string draw(std::mt19937_64& rng) const {
        double u = unit_uniform(rng) * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        auto i = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                                   static_cast<std::ptrdiff_t>(blocks.size()) - 1));
        return blocks[i];
    }
};

// Weight n - rank per occurrence; blocks listed in first-seen order.
BlockUrn make_urn(const std::vector<Gene>& parents, bool first) {
    BlockUrn urn;
    std::map<std::string, double> weight;
    auto n = static_cast<double>(parents.size());
    for (std::size_t r = 0; r < parents.size(); ++r) {
        const auto& b = first ? parents[r].block1 : parents[r].block2;
        if (!weight.count(b)) urn.blocks.push_back(b);
        weight[b] += n - static_cast<double>(r);
    }
    double acc = 0;
    for (const auto& b : urn.blocks) urn.cumulative.push_back(acc += weight[b]);
    return urn;
}

} // namespace

Proposal propose_children(const std::vector<Gene>& parents, std::size_t k, std::mt19937_64& rng,
                          const std::set<Gene>& excluded) {
    Proposal out;
    if (parents.empty() || k == 0) {
        out.exhausted = k > 0;
        return out;
    }
    const auto& topo = parents.front().topology;
    for (const auto& p : parents)
        if (p.topology != topo) throw Error("propose_children: parents span several topologies");

    auto urn1 = make_urn(parents, true);
    auto urn2 = make_urn(parents, false);
    std::set<Gene> blocked(excluded.begin(), excluded.end());
    blocked.insert(parents.begin(), parents.end());

    std::vector<Gene> open;
    for (const auto& b1 : urn1.blocks)
        for (const auto& b2 : urn2.blocks) {
            Gene g{topo, b1, b2};
            if (!blocked.count(g)) open.push_back(std::move(g));
        }
    std::sort(open.begin(), open.end());

    if (open.size() <= k) {
        out.children = std::move(open);
        out.exhausted = out.children.size() < k;
        return out;
    }

    std::set<Gene> chosen;
    std::size_t tries = 0, max_tries = 20 * k + 100;
    while (out.children.size() < k && tries++ < max_tries) {
        Gene g{topo, urn1.draw(rng), urn2.draw(rng)};
        if (blocked.count(g) || chosen.count(g)) continue;
        chosen.insert(g);
        out.children.push_back(std::move(g));
    }
    for (const auto& g : open) {
        if (out.children.size() >= k) break;
        if (!chosen.count(g)) {
            chosen.insert(g);
            out.children.push_back(g);
        }
    }
    return out;
}

std::vector<Gene> parse_children(std::string_view src, std::string_view topology) {
    std::vector<Gene> out;
    std::string flat(src);
    std::replace(flat.begin(), flat.end(), '\n', ',');
    for (const auto& part : text::split(flat, ',')) {
        auto t = strip_ticks(part);
        if (t.empty()) continue;
        auto pieces = text::split(t, '+');
        try {
            if (pieces.size() == 2) out.push_back(parse_gene(std::string(topology) + "+" + t));
            else out.push_back(parse_gene(t));
        } catch (const MalformedGene&) {
        }
    }
    return out;
}

Proposal validate_children(const std::vector<Gene>& proposed, const std::vector<Gene>& parents, std::size_t k,
                           std::mt19937_64& rng, const std::set<Gene>& excluded) {
    Proposal out;
    if (parents.empty()) {
        out.exhausted = k > 0;
        return out;
    }
    std::set<std::string> b1s, b2s;
    for (const auto& p : parents) {
        b1s.insert(p.block1);
        b2s.insert(p.block2);
    }
    std::set<Gene> blocked(excluded.begin(), excluded.end());
    blocked.insert(parents.begin(), parents.end());
    for (const auto& g : proposed) {
        if (out.children.size() >= k) break;
        if (g.topology != parents.front().topology || !b1s.count(g.block1) || !b2s.count(g.block2) || blocked.count(g))
            continue;
        blocked.insert(g);
        out.children.push_back(g);
    }
    if (out.children.size() < k) {
        auto extra = propose_children(parents, k - out.children.size(), rng, blocked);
        out.children.insert(out.children.end(), extra.children.begin(), extra.children.end());
        out.exhausted = extra.exhausted;
    }
    return out;
}

Summary summarize(const std::vector<Candidate>& cs, std::size_t property_index) {
    Summary s;
    s.count = cs.size();
    if (cs.empty()) return s;
    double sum = 0;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -s.min;
    s.best_fitness = std::numeric_limits<double>::infinity();
    for (const auto& c : cs) {
        double v = c.values.at(property_index);
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
        s.best_fitness = std::min(s.best_fitness, c.fitness);
    }
    s.mean = sum / static_cast<double>(cs.size());
    if (cs.size() > 1) {
        double ss = 0;
        for (const auto& c : cs) ss += (c.values[property_index] - s.mean) * (c.values[property_index] - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(cs.size() - 1));
    }
    return s;
}

Surrogate gene_surrogate(const dataset::Registry& registry, const GenPlan& plan) {
    std::vector<std::shared_ptr<std::unordered_map<std::string, double>>> maps;
    for (const auto& p : plan.properties) {
        auto reg = registry.lookup(p, dataset::MaterialKind::gene);
        if (!reg) throw UnknownProperty(p);
        const auto& t = registry.table(reg->table);
        auto key = t.column_index(t.key_column());
        auto col = t.column_index(reg->column);
        auto m = std::make_shared<std::unordered_map<std::string, double>>();
        for (const auto& r : t.rows())
            if (auto v = std::get_if<double>(&r[col]))
                if (auto g = std::get_if<std::string>(&r[key])) m->emplace(format_gene(parse_gene(*g)), *v);
        maps.push_back(std::move(m));
    }
    return [maps](const Gene& g) -> std::optional<std::vector<double>> {
        auto key = format_gene(g);
        std::vector<double> out;
        for (const auto& m : maps) {
            auto it = m->find(key);
            if (it == m->end()) return std::nullopt;
            out.push_back(it->second);
        }
        return out;
    };
}

GenePool load_gene_pool(const dataset::Registry& registry, const GenPlan& plan, std::size_t base_pool_size) {
    const auto& gp = registry.gene_pool();
    if (!gp) throw Error("the registry declares no gene pool");
    const auto& t = registry.table(gp->table);
    auto key = t.column_index(t.key_column());
    auto flag = t.column_index(gp->pool_column);
    auto surrogate = gene_surrogate(registry, plan);
    GenePool pool;
    for (const auto& r : t.rows()) {
        const auto& f = r[flag];
        bool in = (std::holds_alternative<bool>(f) && std::get<bool>(f)) ||
                  (std::holds_alternative<double>(f) && std::get<double>(f) != 0);
        if (!in) continue;
        auto s = std::get_if<std::string>(&r[key]);
        if (!s) continue;
        auto gene = parse_gene(*s);
        auto& bucket = pool[gene.topology];
        if (bucket.size() >= base_pool_size) continue;
        if (auto v = surrogate(gene)) bucket.push_back({gene, *v, 0});
    }
    return pool;
}

namespace {

TopologyRun run_topology(const GenPlan& plan, const GAConfig& cfg, const std::string& topo, std::size_t topo_index,
                         std::vector<Candidate> pool, const std::vector<double>& norms, const Surrogate& surrogate,
                         const ModelProposer& model) {
    TopologyRun run;
    run.topology = topo;
    std::mt19937_64 rng(cfg.seed ^ static_cast<std::uint64_t>(topo_index));
    for (auto& c : pool) c.fitness = fitness(c.values, plan.objectives, norms);

    Generation g0;
    g0.population = select_parents(pool, plan.objectives, norms, cfg.parents_per_topology, cfg.widen_attempts);
    std::set<Gene> seen;
    for (const auto& c : g0.population) seen.insert(c.gene);
    run.generations.push_back(std::move(g0));

    for (std::size_t cycle = 1; cycle <= cfg.cycles; ++cycle) {
        const auto& parents = run.generations.back().population;
        std::vector<Gene> parent_genes;
        for (const auto& c : parents) parent_genes.push_back(c.gene);

        Proposal prop;
        if (model) {
            auto proposed = parse_children(model(parent_genes, cfg.children_per_topology), topo);
            prop = validate_children(proposed, parent_genes, cfg.children_per_topology, rng, seen);
        } else {
            prop = propose_children(parent_genes, cfg.children_per_topology, rng, seen);
        }
        if (prop.exhausted)
            run.log.push_back("cycle " + std::to_string(cycle) + ": only " + std::to_string(prop.children.size()) +
                              " new combinations left");

        Generation gen;
        gen.index = cycle;
        for (const auto& child : prop.children) {
            seen.insert(child);
            auto values = surrogate(child);
            if (!values) {
                run.log.push_back("cycle " + std::to_string(cycle) + ": no surrogate value for " + format_gene(child) +
                                  ", discarded");
                continue;
            }
            gen.offspring.push_back({child, *values, fitness(*values, plan.objectives, norms)});
        }
        std::vector<Candidate> merged = parents;
        merged.insert(merged.end(), gen.offspring.begin(), gen.offspring.end());
        std::sort(merged.begin(), merged.end(), fitter);
        merged.resize(std::min(merged.size(), cfg.parents_per_topology));
        gen.population = std::move(merged);
        run.generations.push_back(std::move(gen));
    }
    run.best = run.generations.back().population.front();
    return run;
}

} // namespace

GAResult run_ga(const GenPlan& plan, const GAConfig& config, const GenePool& pool, const Surrogate& surrogate,
                const ModelProposer& model) {
    if (config.topologies.empty()) throw Error("GA needs at least one topology");
    if (config.parents_per_topology == 0 || config.children_per_topology == 0 || config.base_pool_size == 0)
        throw Error("GA population sizes must be positive");
    if (plan.properties.size() != plan.objectives.size())
        throw ObjectiveCountMismatch(plan.properties.size(), plan.objectives.size());

    GAResult result;
    result.plan = plan;
    result.config = config;

    std::vector<std::vector<Candidate>> pools(config.topologies.size());
    for (std::size_t i = 0; i < config.topologies.size(); ++i) {
        auto it = pool.find(config.topologies[i]);
        if (it == pool.end()) continue;
        auto& p = pools[i];
        p.assign(it->second.begin(), it->second.begin() + static_cast<std::ptrdiff_t>(std::min(it->second.size(), config.base_pool_size)));
    }
    for (std::size_t j = 0; j < plan.properties.size(); ++j) {
        std::vector<double> vals;
        for (const auto& p : pools)
            for (const auto& c : p) vals.push_back(c.values.at(j));
        result.normalizers.push_back(iqr(std::move(vals)));
    }

    std::vector<std::optional<TopologyRun>> runs(config.topologies.size());
    std::vector<std::string> failures(config.topologies.size());
    auto work = [&](std::size_t i) {
        try {
            runs[i] = run_topology(plan, config, config.topologies[i], i, pools[i], result.normalizers, surrogate, model);
        } catch (const NoParents& e) {
            failures[i] = e.what();
        }
    };
    if (config.parallel) {
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < runs.size(); ++i) threads.emplace_back(work, i);
        for (auto& t : threads) t.join();
    } else {
        for (std::size_t i = 0; i < runs.size(); ++i) work(i);
    }

    bool any = false;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (!runs[i]) continue;
        any = true;
        auto& r = *runs[i];
        if (result.runs.empty() || fitter(r.best, result.best)) result.best = r.best;
        result.evaluated += r.generations.front().population.size();
        for (const auto& g : r.generations) result.evaluated += g.offspring.size();
        result.runs.push_back(std::move(r));
    }
    if (!any) {
        std::string why;
        for (std::size_t i = 0; i < failures.size(); ++i)
            if (!failures[i].empty()) {
                why = config.topologies[i] + ": " + failures[i];
                break;
            }
        throw NoParents("no topology yielded parents (" + (why.empty() ? std::string("no pool entries") : why) + ")");
    }
    for (std::size_t i = 0; i < failures.size(); ++i)
        if (!failures[i].empty()) result.log.push_back(config.topologies[i] + " skipped: " + failures[i]);

    for (std::size_t g = 0; g <= config.cycles; ++g) {
        std::vector<Candidate> pop, off;
        for (const auto& r : result.runs) {
            const auto& gen = r.generations[g];
            pop.insert(pop.end(), gen.population.begin(), gen.population.end());
            off.insert(off.end(), gen.offspring.begin(), gen.offspring.end());
        }
        result.generations.push_back({g, summarize(pop), summarize(off)});
    }
    return result;
}

namespace {

json candidate_json(const Candidate& c) {
    return {{"gene", format_gene(c.gene)}, {"values", c.values}, {"fitness", c.fitness}};
}

json summary_json(const Summary& s) {
    return {{"count", s.count}, {"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max},
            {"best_fitness", s.best_fitness}};
}

json plan_json(const GenPlan& p) {
    json objectives = json::array();
    for (const auto& o : p.objectives) objectives.push_back(format_objective(o));
    return {{"properties", p.properties}, {"objectives", objectives}};
}

json config_json(const GAConfig& c) {
    return {{"cycles", c.cycles},
            {"topologies", c.topologies},
            {"parents_per_topology", c.parents_per_topology},
            {"children_per_topology", c.children_per_topology},
            {"base_pool_size", c.base_pool_size},
            {"seed", c.seed}};
}

} // namespace

std::string ga_result_json(const GAResult& r) {
    json runs = json::array();
    for (const auto& run : r.runs) {
        json gens = json::array();
        for (const auto& g : run.generations) {
            json pop = json::array(), off = json::array();
            for (const auto& c : g.population) pop.push_back(candidate_json(c));
            for (const auto& c : g.offspring) off.push_back(candidate_json(c));
            gens.push_back({{"index", g.index}, {"population", pop}, {"offspring", off}});
        }
        runs.push_back({{"topology", run.topology}, {"generations", gens}, {"log", run.log}, {"best", candidate_json(run.best)}});
    }
    json doc{{"plan", plan_json(r.plan)},
             {"config", config_json(r.config)},
             {"normalizers", r.normalizers},
             {"runs", runs},
             {"best", candidate_json(r.best)},
             {"evaluated", r.evaluated},
             {"log", r.log}};
    return doc.dump(1);
}

std::string ga_summary_json(const GAResult& r) {
    json gens = json::array();
    for (const auto& g : r.generations) {
        // Histogram series: initial parents for generation 0, new children afterwards.
        json values = json::array();
        for (const auto& run : r.runs) {
            const auto& gen = run.generations[g.index];
            for (const auto& c : g.index == 0 ? gen.population : gen.offspring) values.push_back(c.values.at(0));
        }
        gens.push_back({{"index", g.index},
                        {"population", summary_json(g.population)},
                        {"offspring", summary_json(g.offspring)},
                        {"values", values}});
    }
    json doc{{"plan", plan_json(r.plan)},
             {"cycles", r.config.cycles},
             {"generations", gens},
             {"best", candidate_json(r.best)}};
    if (!r.plan.objectives.empty() && r.plan.objectives[0].kind == ObjectiveKind::near)
        doc["target"] = r.plan.objectives[0].target;
    return doc.dump();
}

std::string ga_summary_csv(const GAResult& r) {
    std::string out = "generation,population_count,population_mean,population_std,population_min,population_max,"
                      "best_fitness,offspring_count,offspring_mean,offspring_std\n";
    for (const auto& g : r.generations) {
        auto n = [](double v) { return text::format_number(v); };
        out += std::to_string(g.index) + "," + std::to_string(g.population.count) + "," + n(g.population.mean) + "," +
               n(g.population.std) + "," + n(g.population.min) + "," + n(g.population.max) + "," +
               n(g.population.best_fitness) + "," + std::to_string(g.offspring.count) + "," + n(g.offspring.mean) +
               "," + n(g.offspring.std) + "\n";
    }
    return out;
}

namespace {

std::string substitute(std::string s, const std::string& key, const std::string& value) {
    for (auto p = s.find(key); p != std::string::npos; p = s.find(key, p + value.size())) s.replace(p, key.size(), value);
    return s;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

} // namespace

StructureRef build_structure(const Gene& gene, const BuilderConfig& builder) {
    auto text_gene = format_gene(gene);
    StructureRef ref;
    ref.gene = gene;
    ref.path = substitute(builder.output_template, "{gene}", text_gene);
    if (builder.command.empty()) {
        auto h = text::fnv1a(text_gene);
        ref.a = 10 + static_cast<double>(h % 2000) / 100;
        ref.b = 10 + static_cast<double>((h >> 16) % 2000) / 100;
        ref.c = 10 + static_cast<double>((h >> 32) % 2000) / 100;
        return ref;
    }
    std::string cmd = shell_quote(builder.command);
    for (const auto& a : builder.args)
        cmd += " " + shell_quote(substitute(substitute(a, "{gene}", text_gene), "{output}", ref.path));
    cmd += " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    if (status == -1) throw BuilderUnavailable("cannot launch builder '" + builder.command + "'");
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (code == 127) throw BuilderUnavailable("builder command not found: " + builder.command);
    if (code != 0) throw BuilderFailed(gene, "exit status " + std::to_string(code));
    ref.placeholder = false;
    return ref;
}

} // namespace mofsmith::generator
