#pragma once

#include <span>

#include "easched/core.hpp"
#include "easched/power.hpp"

namespace easched {

// A task currently executing on a VM, observed mid-flight.  remaining_mi is
// the work left at the observation instant; it shrinks as the shared-MIPS
// timeline advances.
struct RunningExecution {
    Task task;
    double started_s = 0.0;
    double remaining_mi = 0.0;
};

// Energy attributed to one newly placed task, split by phase.  While any
// previously running task is still active the VM draws power at the combined
// utilization (parallel phase); once the newcomer runs alone it draws power at
// its own utilization (solo phase).  et_prime_s is the newcomer's projected
// duration at the initial degree of sharing; net_prev_s is the time until the
// first previously running task would finish under that same sharing.
struct EnergyBreakdown {
    double total_j = 0.0;
    double parallel_phase_j = 0.0;
    double solo_phase_j = 0.0;
    double et_prime_s = 0.0;
    double net_prev_s = 0.0;
};

// Time to run length_mi on a VM rated at mips while n_tasks share it.  Sharing
// is modeled as an even split of the processor: each of n tasks progresses at
// mips/n, so the duration scales linearly with n.
double execution_time(double length_mi, double mips, int n_tasks);

// Energy for a task drawing a constant power over its whole execution.
double task_energy_simple(double power_w, double et_s);

// Time for an already-running task to finish its remaining work once the VM is
// shared n_after ways.
double new_execution_time(const RunningExecution& ongoing, double mips, int n_after);

// Energy charged to new_task when it is placed on vm alongside the given
// ongoing executions.  The timeline is cut at every completion boundary; in
// each segment every active task progresses at mips/n and the newcomer is
// charged the VM power at the summed utilization of everything active.  With
// an idle VM this collapses to constant-power accounting; with one ongoing
// task it reproduces the classic two-task split (parallel until whichever
// finishes first, then a solo tail if the newcomer outlives the incumbent).
// A newcomer that would finish exactly when the incumbent does is treated as
// finishing first, so the solo tail vanishes continuously.
EnergyBreakdown incremental_energy(const Task& new_task, const VmSpec& vm,
                                   std::span<const RunningExecution> ongoing,
                                   const PowerModel& model,
                                   RangePolicy policy = RangePolicy::Strict,
                                   ClampCounter* clamps = nullptr);

} // namespace easched
