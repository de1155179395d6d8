#include "easched/objective.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

namespace easched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFitnessEpsilon = 1e-9;

double normalize_in(double v, double lo, double hi) {
    if (hi <= lo) return 0.0;
    return (v - lo) / (hi - lo);
}

} // namespace

UtilizationVector VmView::load() const {
    UtilizationVector total;
    for (const auto& o : ongoing) total += o.task.demand;
    return total;
}

double EvalContext::norm_et(double et_s) const { return normalize_in(et_s, et_lo, et_hi); }

double EvalContext::norm_ec(double ec_j) const { return normalize_in(ec_j, ec_lo, ec_hi); }

std::vector<double> min_max_normalize(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("min_max_normalize: empty input");
    double lo = values[0];
    double hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(normalize_in(v, lo, hi));
    return out;
}

double cost(double et_norm, double ec_norm, const CostWeights& w) {
    return w.alpha * et_norm + (1.0 - w.alpha) * ec_norm;
}

bool check_capacity(const VmSpec& vm, const UtilizationVector& current_load,
                    const UtilizationVector& new_demand, const Constraints& c) {
    if (current_load.cpu_pct + new_demand.cpu_pct >= c.cpu_threshold_pct) return false;
    if (current_load.mem_mb + new_demand.mem_mb > vm.ram_mb) return false;
    return true;
}

std::vector<CandidateEvaluation> evaluate_candidates(const Task& task,
                                                     std::span<const VmView> vms,
                                                     const CostWeights& w, const Constraints& c,
                                                     RangePolicy policy, ClampCounter* clamps) {
    if (vms.empty()) throw std::invalid_argument("evaluate_candidates: no VMs");

    std::vector<CandidateEvaluation> evals(vms.size());
    std::vector<double> ets;
    std::vector<double> ecs;
    std::vector<std::size_t> feasible_idx;

    for (std::size_t i = 0; i < vms.size(); ++i) {
        const VmView& vm = vms[i];
        auto& e = evals[i];
        e.vm_id = vm.spec.id;
        if (!vm.power) throw std::invalid_argument("evaluate_candidates: VM without power model");
        if (!check_capacity(vm.spec, vm.load(), task.demand, c)) {
            e.feasible = false;
            e.cost = kInf;
            continue;
        }
        int n = static_cast<int>(vm.ongoing.size()) + 1;
        e.et_s = execution_time(task.length_mi, vm.spec.mips, n);
        e.ec_j = incremental_energy(task, vm.spec, vm.ongoing, *vm.power, policy, clamps).total_j;
        e.feasible = true;
        feasible_idx.push_back(i);
        ets.push_back(e.et_s);
        ecs.push_back(e.ec_j);
    }

    if (!feasible_idx.empty()) {
        auto et_norms = min_max_normalize(ets);
        auto ec_norms = min_max_normalize(ecs);
        for (std::size_t k = 0; k < feasible_idx.size(); ++k) {
            auto& e = evals[feasible_idx[k]];
            e.et_norm = et_norms[k];
            e.ec_norm = ec_norms[k];
            e.cost = cost(e.et_norm, e.ec_norm, w);
        }
    }
    return evals;
}

const CandidateEvaluation* select_candidate(std::span<const CandidateEvaluation> evals) {
    const CandidateEvaluation* best = nullptr;
    for (const auto& e : evals) {
        if (!e.feasible) continue;
        if (!best || e.cost < best->cost || (e.cost == best->cost && e.vm_id < best->vm_id)) {
            best = &e;
        }
    }
    return best;
}

EvalContext make_eval_context(std::span<const Task> tasks, std::span<const VmView> vms,
                              const Constraints& c, RangePolicy policy, ClampCounter* clamps) {
    EvalContext ctx;
    bool any = false;
    for (const auto& task : tasks) {
        for (const auto& vm : vms) {
            if (!vm.power) throw std::invalid_argument("make_eval_context: VM without power model");
            if (!check_capacity(vm.spec, vm.load(), task.demand, c)) continue;
            int n = static_cast<int>(vm.ongoing.size()) + 1;
            double et = execution_time(task.length_mi, vm.spec.mips, n);
            double ec =
                incremental_energy(task, vm.spec, vm.ongoing, *vm.power, policy, clamps).total_j;
            if (!any) {
                ctx.et_lo = ctx.et_hi = et;
                ctx.ec_lo = ctx.ec_hi = ec;
                any = true;
            } else {
                ctx.et_lo = std::min(ctx.et_lo, et);
                ctx.et_hi = std::max(ctx.et_hi, et);
                ctx.ec_lo = std::min(ctx.ec_lo, ec);
                ctx.ec_hi = std::max(ctx.ec_hi, ec);
            }
        }
    }
    return ctx;
}

double chromosome_cost(const ScheduleMapping& mapping, std::span<const Task> tasks,
                       std::span<const VmView> vms, const EvalContext& ctx,
                       const CostWeights& w, const Constraints& c, RangePolicy policy,
                       ClampCounter* clamps) {
    std::vector<VmSpec> specs;
    specs.reserve(vms.size());
    for (const auto& vm : vms) specs.push_back(vm.spec);
    if (!validate_mapping(mapping, tasks, specs)) {
        throw std::invalid_argument("chromosome_cost: mapping does not cover the task set");
    }

    std::map<std::string, std::size_t> vm_index;
    for (std::size_t i = 0; i < vms.size(); ++i) vm_index[vms[i].spec.id] = i;

    // Apply placements in arrival order so each task sees the load created by
    // the ones placed before it, mirroring the execution sequence.
    std::vector<const Task*> order;
    order.reserve(tasks.size());
    for (const auto& t : tasks) order.push_back(&t);
    std::sort(order.begin(), order.end(),
              [](const Task* a, const Task* b) { return task_order_less(*a, *b); });

    std::vector<std::vector<RunningExecution>> state;
    state.reserve(vms.size());
    for (const auto& vm : vms) state.push_back(vm.ongoing);

    double total = 0.0;
    for (const Task* task : order) {
        std::size_t i = vm_index.at(mapping.assignment.at(task->id));
        const VmView& vm = vms[i];
        auto& ongoing = state[i];

        UtilizationVector load;
        for (const auto& o : ongoing) load += o.task.demand;
        if (!check_capacity(vm.spec, load, task->demand, c)) return kInf;

        int n = static_cast<int>(ongoing.size()) + 1;
        double et = execution_time(task->length_mi, vm.spec.mips, n);
        double ec = incremental_energy(*task, vm.spec, ongoing, *vm.power, policy, clamps).total_j;
        total += cost(ctx.norm_et(et), ctx.norm_ec(ec), w);

        ongoing.push_back(RunningExecution{*task, 0.0, task->length_mi});
    }
    return total;
}

double chromosome_cost(const ScheduleMapping& mapping, std::span<const Task> tasks,
                       std::span<const VmView> vms, const CostWeights& w, const Constraints& c,
                       RangePolicy policy, ClampCounter* clamps) {
    EvalContext ctx = make_eval_context(tasks, vms, c, policy, clamps);
    return chromosome_cost(mapping, tasks, vms, ctx, w, c, policy, clamps);
}

double fitness(double cost) {
    if (cost == kInf) return 0.0;
    return 1.0 / (cost + kFitnessEpsilon);
}

} // namespace easched
