#pragma once

#include <span>
#include <string>
#include <vector>

#include "easched/core.hpp"
#include "easched/energy.hpp"
#include "easched/power.hpp"

namespace easched {

// Weight of the time term in the scalarized cost; the energy term gets the
// complement.  0.5 treats both objectives equally.
struct CostWeights {
    double alpha = 0.5;
};

struct CandidateEvaluation {
    std::string vm_id;
    double et_s = 0.0;
    double ec_j = 0.0;
    double et_norm = 0.0;
    double ec_norm = 0.0;
    double cost = 0.0;
    bool feasible = false;
};

// Snapshot of one VM as the scheduler sees it: its static spec, whatever is
// currently running on it, and the power model used to estimate energy there.
// Schedulers that deliberately reason with a coarser model than the meter
// simply get handed views pointing at that coarser model.
struct VmView {
    VmSpec spec;
    std::vector<RunningExecution> ongoing;
    const PowerModel* power = nullptr;

    UtilizationVector load() const;
};

// Fixed normalization bounds so that costs computed for different candidate
// assignments of the same task batch are comparable.  Built once per decision
// from the feasible (task, VM) pairs against the initial VM states.
struct EvalContext {
    double et_lo = 0.0;
    double et_hi = 0.0;
    double ec_lo = 0.0;
    double ec_hi = 0.0;

    double norm_et(double et_s) const;
    double norm_ec(double ec_j) const;
};

// (v - min) / (max - min) elementwise; a degenerate range maps everything to 0.
std::vector<double> min_max_normalize(std::span<const double> values);

double cost(double et_norm, double ec_norm, const CostWeights& w);

// Placement feasibility: the CPU the VM would reach must stay strictly below
// the threshold, and memory must fit within the VM's RAM.
bool check_capacity(const VmSpec& vm, const UtilizationVector& current_load,
                    const UtilizationVector& new_demand, const Constraints& c);

// Score every VM as a destination for one task.  Feasible VMs get a cost from
// time and energy normalized across the feasible set; infeasible VMs carry an
// infinite cost.  The caller handles the all-infeasible case.
std::vector<CandidateEvaluation> evaluate_candidates(const Task& task,
                                                     std::span<const VmView> vms,
                                                     const CostWeights& w, const Constraints& c,
                                                     RangePolicy policy = RangePolicy::Strict,
                                                     ClampCounter* clamps = nullptr);

// Lowest-cost feasible candidate, ties broken by lowest vm id.  Null when
// nothing is feasible.
const CandidateEvaluation* select_candidate(std::span<const CandidateEvaluation> evals);

EvalContext make_eval_context(std::span<const Task> tasks, std::span<const VmView> vms,
                              const Constraints& c, RangePolicy policy = RangePolicy::Strict,
                              ClampCounter* clamps = nullptr);

// Total cost of assigning a whole batch of tasks per the mapping.  Tasks are
// applied in arrival order and each placement becomes part of the load the
// following ones see, so the sum reflects the sequence the simulator would
// actually execute.  Any capacity violation along the way poisons the whole
// chromosome with an infinite cost.
double chromosome_cost(const ScheduleMapping& mapping, std::span<const Task> tasks,
                       std::span<const VmView> vms, const EvalContext& ctx,
                       const CostWeights& w, const Constraints& c,
                       RangePolicy policy = RangePolicy::Strict,
                       ClampCounter* clamps = nullptr);

// Convenience overload that builds the normalization context itself.
double chromosome_cost(const ScheduleMapping& mapping, std::span<const Task> tasks,
                       std::span<const VmView> vms, const CostWeights& w, const Constraints& c,
                       RangePolicy policy = RangePolicy::Strict,
                       ClampCounter* clamps = nullptr);

// Inverse cost with a small regularizer so a perfect cost of 0 stays finite.
// Infeasible (infinite-cost) assignments get fitness 0.
double fitness(double cost);

} // namespace easched
