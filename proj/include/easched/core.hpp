#ifndef EASCHED_CORE_HPP
#define EASCHED_CORE_HPP

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace easched {

/// Resource demand of a task, or aggregated load of a VM: CPU share in
/// percent, resident memory in MB, disk traffic in bytes/s, network
/// traffic in bytes/s. These four quantities are the predictors of the
/// server power models.
struct UtilizationVector {
    double cpu_pct = 0.0;
    double mem_mb = 0.0;
    double disk_bps = 0.0;
    double net_bps = 0.0;

    UtilizationVector& operator+=(const UtilizationVector& o) {
        cpu_pct += o.cpu_pct;
        mem_mb += o.mem_mb;
        disk_bps += o.disk_bps;
        net_bps += o.net_bps;
        return *this;
    }
    UtilizationVector& operator-=(const UtilizationVector& o) {
        cpu_pct -= o.cpu_pct;
        mem_mb -= o.mem_mb;
        disk_bps -= o.disk_bps;
        net_bps -= o.net_bps;
        return *this;
    }
    friend UtilizationVector operator+(UtilizationVector a, const UtilizationVector& b) { return a += b; }
    friend UtilizationVector operator-(UtilizationVector a, const UtilizationVector& b) { return a -= b; }
    friend bool operator==(const UtilizationVector&, const UtilizationVector&) = default;

    /// True when cpu_pct is in [0,100] and all components are finite and >= 0.
    /// Sums used transiently during capacity checks may exceed 100% CPU; those
    /// are rejected by the threshold constraint, not here.
    bool is_valid() const {
        return std::isfinite(cpu_pct) && cpu_pct >= 0.0 && cpu_pct <= 100.0 &&
               std::isfinite(mem_mb) && mem_mb >= 0.0 &&
               std::isfinite(disk_bps) && disk_bps >= 0.0 &&
               std::isfinite(net_bps) && net_bps >= 0.0;
    }
};

/// Unit of scheduling: a compute request with a fixed length in Million
/// Instructions and a constant resource demand while it runs.
struct Task {
    std::string id;
    double length_mi = 0.0;
    UtilizationVector demand;
    double arrival_s = 0.0;
};

/// Processing order: by arrival time, ties broken by id so every sort in the
/// pipeline is deterministic.
inline bool task_order_less(const Task& a, const Task& b) {
    if (a.arrival_s != b.arrival_s) return a.arrival_s < b.arrival_s;
    return a.id < b.id;
}

/// Virtual machine capacity: processing speed in MIPS and RAM in MB.
/// host_id names the physical machine whose power model applies.
struct VmSpec {
    std::string id;
    double mips = 0.0;
    double ram_mb = 0.0;
    std::string host_id;
};

/// Physical machine. Only the attached power model matters to scheduling;
/// the label keeps the hardware description from the catalog.
struct HostSpec {
    std::string id;
    std::string label;
    std::string power_model_id;
};

/// Feasibility limits applied at every placement: the summed CPU share of
/// the tasks on a VM must stay strictly below this threshold.
struct Constraints {
    double cpu_threshold_pct = 80.0;
};

/// Assignment of tasks to VMs, stored as a task id -> VM id map. Totality of
/// the map over the task set is the one-VM-per-task constraint.
struct ScheduleMapping {
    std::map<std::string, std::string> assignment;
};

/// True iff the mapping covers every task exactly once and references only
/// VMs that exist. Never throws; violations simply yield false.
bool validate_mapping(const ScheduleMapping& mapping,
                      std::span<const Task> tasks,
                      std::span<const VmSpec> vms);

/// Componentwise sum of the demands of all tasks the mapping assigns to
/// vm_id; the zero vector when none. Throws std::invalid_argument when
/// vm_id does not name a VM in vms (a configuration bug, not a data case).
UtilizationVector vm_load(const ScheduleMapping& mapping,
                          const std::string& vm_id,
                          std::span<const Task> tasks,
                          std::span<const VmSpec> vms);

} // namespace easched

#endif
