#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "easched/core.hpp"
#include "easched/objective.hpp"

namespace easched {

// Knobs for the evolutionary scheduler.  None of these have a single "right"
// value; the defaults are conservative and everything is config-overridable.
// stagnation_limit stops a run early once the best cost has not improved for
// that many generations (0 disables the early stop).
struct GaParams {
    int population_size = 50;
    int generations = 200;
    double crossover_rate = 0.9;
    double mutation_rate = 0.02;
    int elitism_count = 2;
    std::uint64_t seed = 0;
    CostWeights weights;
    int stagnation_limit = 50;

    void validate() const;
};

// One candidate assignment of a task batch: genes[j] is the id of the VM that
// tasks[j] goes to.
using Chromosome = std::vector<std::string>;

// Greedy seeding pass.  Tasks are taken in decreasing CPU-demand order and
// each goes to the feasible VM where placing it raises predicted power the
// most — deliberately packing heavy work onto already-loaded machines so the
// evolutionary search starts from a consolidated layout.  Tasks with no
// feasible VM are listed rather than failing the whole pass.
struct MwfdResult {
    ScheduleMapping mapping;
    std::vector<std::string> unassigned;
};

MwfdResult mwfd_schedule(std::span<const Task> tasks, std::span<const VmView> vms,
                         const Constraints& c, RangePolicy policy = RangePolicy::Strict,
                         ClampCounter* clamps = nullptr);

// Population seeded from the greedy mapping: chromosome 0 is the seed itself,
// the rest are copies with each gene resampled over that task's feasible VMs
// with probability params.mutation_rate.
std::vector<Chromosome> init_population(std::span<const Task> tasks,
                                        std::span<const VmView> vms, const Constraints& c,
                                        const GaParams& params, std::mt19937_64& rng,
                                        RangePolicy policy = RangePolicy::Strict,
                                        ClampCounter* clamps = nullptr);

// Single-point exchange: offspring are a[0..point)+b[point..) and the mirror.
// Requires equal lengths and 0 < point < length.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            std::size_t point);

// Each gene is independently replaced by a uniformly random member of vm_ids
// with probability rate.
Chromosome mutate(const Chromosome& chrom, double rate, std::span<const std::string> vm_ids,
                  std::mt19937_64& rng);

struct GaResult {
    std::optional<ScheduleMapping> mapping;
    double best_cost = 0.0;
    // Best population cost after each generation, for convergence inspection.
    std::vector<double> best_cost_history;
    std::string failure;
};

// The evolutionary scheduler: greedy-seeded population, binary tournament
// selection, single-point crossover, per-gene mutation.  An offspring only
// displaces its parent when it is strictly cheaper, and the elite survive
// unconditionally, so the best cost never worsens between generations.  Runs
// for params.generations generations or until the stagnation limit trips.
GaResult ga_schedule(std::span<const Task> tasks, std::span<const VmView> vms,
                     const Constraints& c, const GaParams& params,
                     RangePolicy policy = RangePolicy::Strict, ClampCounter* clamps = nullptr);

// Exhaustive minimizer over all v^m assignments, for verification on small
// instances.  Enumeration is lexicographic over VM order and the first
// minimum encountered wins, which pins the tie-break.
struct BruteForceResult {
    std::optional<ScheduleMapping> mapping;
    double best_cost = 0.0;
};

BruteForceResult brute_force_schedule(std::span<const Task> tasks, std::span<const VmView> vms,
                                      const CostWeights& w, const Constraints& c,
                                      RangePolicy policy = RangePolicy::Strict,
                                      ClampCounter* clamps = nullptr);

} // namespace easched
