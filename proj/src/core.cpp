#include "easched/core.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace easched {

bool validate_mapping(const ScheduleMapping& mapping,
                      std::span<const Task> tasks,
                      std::span<const VmSpec> vms) {
    if (mapping.assignment.size() != tasks.size()) return false;

    std::unordered_set<std::string> vm_ids;
    vm_ids.reserve(vms.size());
    for (const auto& vm : vms) vm_ids.insert(vm.id);

    for (const auto& task : tasks) {
        auto it = mapping.assignment.find(task.id);
        if (it == mapping.assignment.end()) return false;
        if (!vm_ids.contains(it->second)) return false;
    }
    // Size equality plus one hit per task rules out entries for unknown tasks.
    return true;
}

UtilizationVector vm_load(const ScheduleMapping& mapping,
                          const std::string& vm_id,
                          std::span<const Task> tasks,
                          std::span<const VmSpec> vms) {
    bool known = std::any_of(vms.begin(), vms.end(),
                             [&](const VmSpec& vm) { return vm.id == vm_id; });
    if (!known) {
        throw std::invalid_argument("vm_load: unknown VM id '" + vm_id + "'");
    }

    UtilizationVector sum;
    for (const auto& task : tasks) {
        auto it = mapping.assignment.find(task.id);
        if (it != mapping.assignment.end() && it->second == vm_id) {
            sum += task.demand;
        }
    }
    return sum;
}

} // namespace easched
