#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "easched/core.hpp"
#include "easched/power.hpp"
#include "easched/scheduler.hpp"

namespace easched {

enum class SchedulerKind { Mwfd, GaLcMlr, GaLm, BruteForce };

const char* scheduler_kind_name(SchedulerKind kind);

// One simulated VM with the two power models that matter to it: the meter is
// the ground truth used for all reported energy, the sched model is whatever
// the scheduling policy reasons with internally.  For the full-fidelity
// scheduler the two point at the same model; the baseline deliberately gets a
// coarser sched model while being metered identically.
struct VmBinding {
    VmSpec spec;
    const PowerModel* meter = nullptr;
    const PowerModel* sched = nullptr;
};

struct TaskRecord {
    std::string task_id;
    std::string vm_id;
    double arrival_s = 0.0;
    double start_s = 0.0;
    double finish_s = 0.0;
    double energy_j = 0.0;
};

struct SimReport {
    std::vector<TaskRecord> records;
    std::vector<std::string> rejected_ids;
    double total_energy_j = 0.0;
    double mean_execution_time_s = 0.0;
    long long rejected_task_count = 0;
    long long clamp_events = 0;
    long long constraint_violations = 0;
    // Worst relative mismatch between a task's nominal length and the work the
    // engine actually integrated for it; a health check on the event math.
    double max_work_residual_rel = 0.0;
};

struct SimParams {
    SchedulerKind scheduler = SchedulerKind::GaLcMlr;
    GaParams ga;
    Constraints constraints;
    std::uint64_t seed = 0;
};

// Discrete-event run over the whole workload.  Arrivals sharing a timestamp
// form one batch and are scheduled together; placed tasks share their VM's
// MIPS evenly, so every placement and completion re-rates the remaining work
// of everything else on that VM.  Reported energy integrates each VM's meter
// power over the piecewise-constant utilization segments while the VM is
// busy.  Tasks that cannot be placed are rejected, never queued.
SimReport run_simulation(std::span<const Task> workload, std::span<const VmBinding> vms,
                         const SimParams& params);

} // namespace easched
