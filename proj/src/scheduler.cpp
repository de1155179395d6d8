#include "easched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "easched/rng.hpp"

namespace easched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ScheduleMapping to_mapping(const Chromosome& chrom, std::span<const Task> tasks) {
    ScheduleMapping m;
    for (std::size_t j = 0; j < tasks.size(); ++j) m.assignment[tasks[j].id] = chrom[j];
    return m;
}

// VMs each task could legally land on against the initial states; used both
// for seeding perturbations and for explaining infeasibility.
std::vector<std::vector<std::string>> feasible_vms_per_task(std::span<const Task> tasks,
                                                            std::span<const VmView> vms,
                                                            const Constraints& c) {
    std::vector<std::vector<std::string>> feasible(tasks.size());
    for (std::size_t j = 0; j < tasks.size(); ++j) {
        for (const auto& vm : vms) {
            if (check_capacity(vm.spec, vm.load(), tasks[j].demand, c)) {
                feasible[j].push_back(vm.spec.id);
            }
        }
    }
    return feasible;
}

} // namespace

void GaParams::validate() const {
    if (population_size < 2) throw std::invalid_argument("GaParams: population_size must be >= 2");
    if (generations < 1) throw std::invalid_argument("GaParams: generations must be >= 1");
    if (crossover_rate < 0.0 || crossover_rate > 1.0) {
        throw std::invalid_argument("GaParams: crossover_rate must be in [0,1]");
    }
    if (mutation_rate < 0.0 || mutation_rate > 1.0) {
        throw std::invalid_argument("GaParams: mutation_rate must be in [0,1]");
    }
    if (elitism_count < 0 || elitism_count >= population_size) {
        throw std::invalid_argument("GaParams: elitism_count must be in [0, population_size)");
    }
    if (weights.alpha < 0.0 || weights.alpha > 1.0) {
        throw std::invalid_argument("GaParams: alpha must be in [0,1]");
    }
    if (stagnation_limit < 0) throw std::invalid_argument("GaParams: stagnation_limit must be >= 0");
}

MwfdResult mwfd_schedule(std::span<const Task> tasks, std::span<const VmView> vms,
                         const Constraints& c, RangePolicy policy, ClampCounter* clamps) {
    MwfdResult result;

    std::vector<const Task*> order;
    order.reserve(tasks.size());
    for (const auto& t : tasks) order.push_back(&t);
    std::sort(order.begin(), order.end(), [](const Task* a, const Task* b) {
        if (a->demand.cpu_pct != b->demand.cpu_pct) return a->demand.cpu_pct > b->demand.cpu_pct;
        return a->id < b->id;
    });

    std::vector<UtilizationVector> load;
    load.reserve(vms.size());
    for (const auto& vm : vms) load.push_back(vm.load());

    for (const Task* task : order) {
        const VmView* best = nullptr;
        std::size_t best_i = 0;
        double best_rise = 0.0;
        for (std::size_t i = 0; i < vms.size(); ++i) {
            const VmView& vm = vms[i];
            if (!vm.power) throw std::invalid_argument("mwfd_schedule: VM without power model");
            if (!check_capacity(vm.spec, load[i], task->demand, c)) continue;
            double before = predict_power(*vm.power, load[i], policy, clamps);
            double after = predict_power(*vm.power, load[i] + task->demand, policy, clamps);
            double rise = after - before;
            if (!best || rise > best_rise ||
                (rise == best_rise && vm.spec.id < best->spec.id)) {
                best = &vm;
                best_i = i;
                best_rise = rise;
            }
        }
        if (!best) {
            result.unassigned.push_back(task->id);
            continue;
        }
        result.mapping.assignment[task->id] = best->spec.id;
        load[best_i] += task->demand;
    }
    return result;
}

std::vector<Chromosome> init_population(std::span<const Task> tasks,
                                        std::span<const VmView> vms, const Constraints& c,
                                        const GaParams& params, std::mt19937_64& rng,
                                        RangePolicy policy, ClampCounter* clamps) {
    params.validate();
    if (vms.empty()) throw std::invalid_argument("init_population: no VMs");

    MwfdResult seed_result = mwfd_schedule(tasks, vms, c, policy, clamps);

    // Tasks the greedy pass could not place still need a gene; point them at
    // the first VM and let the infinite-cost sentinel sort it out.
    Chromosome seed(tasks.size());
    for (std::size_t j = 0; j < tasks.size(); ++j) {
        auto it = seed_result.mapping.assignment.find(tasks[j].id);
        seed[j] = it != seed_result.mapping.assignment.end() ? it->second : vms[0].spec.id;
    }

    auto feasible = feasible_vms_per_task(tasks, vms, c);

    std::vector<Chromosome> population;
    population.reserve(static_cast<std::size_t>(params.population_size));
    population.push_back(seed);
    for (int k = 1; k < params.population_size; ++k) {
        Chromosome chrom = seed;
        for (std::size_t j = 0; j < chrom.size(); ++j) {
            if (!chance(rng, params.mutation_rate)) continue;
            if (feasible[j].empty()) continue;
            chrom[j] = feasible[j][uniform_index(rng, feasible[j].size())];
        }
        population.push_back(std::move(chrom));
    }
    return population;
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            std::size_t point) {
    if (a.size() != b.size()) throw std::invalid_argument("crossover: length mismatch");
    if (point == 0 || point >= a.size()) {
        throw std::invalid_argument("crossover: point must split both parents");
    }
    Chromosome o1(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(point));
    o1.insert(o1.end(), b.begin() + static_cast<std::ptrdiff_t>(point), b.end());
    Chromosome o2(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(point));
    o2.insert(o2.end(), a.begin() + static_cast<std::ptrdiff_t>(point), a.end());
    return {std::move(o1), std::move(o2)};
}

Chromosome mutate(const Chromosome& chrom, double rate, std::span<const std::string> vm_ids,
                  std::mt19937_64& rng) {
    if (vm_ids.empty()) throw std::invalid_argument("mutate: empty vm id list");
    Chromosome out = chrom;
    for (auto& gene : out) {
        if (chance(rng, rate)) gene = vm_ids[uniform_index(rng, vm_ids.size())];
    }
    return out;
}

GaResult ga_schedule(std::span<const Task> tasks, std::span<const VmView> vms,
                     const Constraints& c, const GaParams& params, RangePolicy policy,
                     ClampCounter* clamps) {
    params.validate();
    if (vms.empty()) throw std::invalid_argument("ga_schedule: no VMs");

    GaResult result;
    if (tasks.empty()) {
        result.mapping = ScheduleMapping{};
        result.best_cost = 0.0;
        return result;
    }

    std::mt19937_64 rng(params.seed);
    EvalContext ctx = make_eval_context(tasks, vms, c, policy, clamps);

    std::vector<std::string> vm_ids;
    vm_ids.reserve(vms.size());
    for (const auto& vm : vms) vm_ids.push_back(vm.spec.id);

    auto evaluate = [&](const Chromosome& chrom) {
        return chromosome_cost(to_mapping(chrom, tasks), tasks, vms, ctx, params.weights, c,
                               policy, clamps);
    };

    std::vector<Chromosome> population =
        init_population(tasks, vms, c, params, rng, policy, clamps);
    std::vector<double> costs;
    costs.reserve(population.size());
    for (const auto& chrom : population) costs.push_back(evaluate(chrom));

    const std::size_t pop_size = population.size();
    const std::size_t chrom_len = tasks.size();

    auto tournament = [&]() {
        std::size_t a = uniform_index(rng, pop_size);
        std::size_t b = uniform_index(rng, pop_size);
        if (costs[a] < costs[b]) return a;
        if (costs[b] < costs[a]) return b;
        return std::min(a, b);
    };

    double best_so_far = *std::min_element(costs.begin(), costs.end());
    result.best_cost_history.push_back(best_so_far);
    int stagnant = 0;

    for (int gen = 0; gen < params.generations; ++gen) {
        std::vector<std::size_t> order(pop_size);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });

        std::vector<Chromosome> next;
        std::vector<double> next_costs;
        next.reserve(pop_size);
        next_costs.reserve(pop_size);
        for (int e = 0; e < params.elitism_count; ++e) {
            next.push_back(population[order[static_cast<std::size_t>(e)]]);
            next_costs.push_back(costs[order[static_cast<std::size_t>(e)]]);
        }

        while (next.size() < pop_size) {
            std::size_t p1 = tournament();
            std::size_t p2 = tournament();
            Chromosome c1 = population[p1];
            Chromosome c2 = population[p2];
            if (chrom_len >= 2 && chance(rng, params.crossover_rate)) {
                std::size_t point = 1 + uniform_index(rng, chrom_len - 1);
                std::tie(c1, c2) = crossover(c1, c2, point);
            }
            c1 = mutate(c1, params.mutation_rate, vm_ids, rng);
            c2 = mutate(c2, params.mutation_rate, vm_ids, rng);

            // A child only displaces the parent it descended from when it is
            // strictly cheaper; otherwise the parent carries over unchanged.
            double cost1 = evaluate(c1);
            if (cost1 < costs[p1]) {
                next.push_back(std::move(c1));
                next_costs.push_back(cost1);
            } else {
                next.push_back(population[p1]);
                next_costs.push_back(costs[p1]);
            }
            if (next.size() >= pop_size) break;
            double cost2 = evaluate(c2);
            if (cost2 < costs[p2]) {
                next.push_back(std::move(c2));
                next_costs.push_back(cost2);
            } else {
                next.push_back(population[p2]);
                next_costs.push_back(costs[p2]);
            }
        }

        population = std::move(next);
        costs = std::move(next_costs);

        double gen_best = *std::min_element(costs.begin(), costs.end());
        result.best_cost_history.push_back(gen_best);
        if (gen_best < best_so_far) {
            best_so_far = gen_best;
            stagnant = 0;
        } else {
            ++stagnant;
            if (params.stagnation_limit > 0 && stagnant >= params.stagnation_limit) break;
        }
    }

    std::size_t best_i = 0;
    for (std::size_t i = 1; i < pop_size; ++i) {
        if (costs[i] < costs[best_i]) best_i = i;
    }
    result.best_cost = costs[best_i];

    if (result.best_cost == kInf) {
        auto feasible = feasible_vms_per_task(tasks, vms, c);
        std::ostringstream msg;
        msg << "no feasible assignment found";
        bool first = true;
        for (std::size_t j = 0; j < tasks.size(); ++j) {
            if (!feasible[j].empty()) continue;
            msg << (first ? "; tasks with no feasible VM: " : ", ") << tasks[j].id;
            first = false;
        }
        if (first) msg << "; per-task placements exist but no explored combination fits";
        result.failure = msg.str();
        return result;
    }

    result.mapping = to_mapping(population[best_i], tasks);
    return result;
}

BruteForceResult brute_force_schedule(std::span<const Task> tasks, std::span<const VmView> vms,
                                      const CostWeights& w, const Constraints& c,
                                      RangePolicy policy, ClampCounter* clamps) {
    if (vms.empty()) throw std::invalid_argument("brute_force_schedule: no VMs");

    BruteForceResult result;
    if (tasks.empty()) {
        result.mapping = ScheduleMapping{};
        return result;
    }

    double combos = std::pow(static_cast<double>(vms.size()), static_cast<double>(tasks.size()));
    if (combos > 1e6) {
        throw std::invalid_argument("brute_force_schedule: more than 1e6 assignments");
    }

    EvalContext ctx = make_eval_context(tasks, vms, c, policy, clamps);

    std::vector<std::size_t> idx(tasks.size(), 0);
    double best = kInf;
    while (true) {
        ScheduleMapping m;
        for (std::size_t j = 0; j < tasks.size(); ++j) {
            m.assignment[tasks[j].id] = vms[idx[j]].spec.id;
        }
        double cost = chromosome_cost(m, tasks, vms, ctx, w, c, policy, clamps);
        if (cost < best) {
            best = cost;
            result.mapping = std::move(m);
        }

        // Advance the odometer with the last position fastest, which walks
        // assignments in lexicographic order.
        std::size_t pos = idx.size();
        while (pos > 0) {
            --pos;
            if (++idx[pos] < vms.size()) break;
            idx[pos] = 0;
            if (pos == 0) {
                if (best == kInf) result.mapping.reset();
                result.best_cost = best;
                return result;
            }
        }
    }
}

} // namespace easched
