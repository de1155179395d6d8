#include "easched/energy.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace easched {

double execution_time(double length_mi, double mips, int n_tasks) {
    if (length_mi < 0.0) throw std::invalid_argument("execution_time: negative task length");
    if (mips <= 0.0) throw std::invalid_argument("execution_time: mips must be positive");
    if (n_tasks < 1) throw std::invalid_argument("execution_time: need at least one task");
    return (length_mi / mips) * static_cast<double>(n_tasks);
}

double task_energy_simple(double power_w, double et_s) {
    if (power_w < 0.0 || et_s < 0.0) {
        throw std::invalid_argument("task_energy_simple: negative power or duration");
    }
    return power_w * et_s;
}

double new_execution_time(const RunningExecution& ongoing, double mips, int n_after) {
    return execution_time(ongoing.remaining_mi, mips, n_after);
}

EnergyBreakdown incremental_energy(const Task& new_task, const VmSpec& vm,
                                   std::span<const RunningExecution> ongoing,
                                   const PowerModel& model, RangePolicy policy,
                                   ClampCounter* clamps) {
    if (vm.mips <= 0.0) throw std::invalid_argument("incremental_energy: mips must be positive");

    // Executions that already ran out of work contribute nothing; drop them so
    // the degree of sharing reflects what is actually still running.
    struct Active {
        double remaining_mi;
        UtilizationVector util;
    };
    std::vector<Active> active;
    active.reserve(ongoing.size());
    for (const auto& o : ongoing) {
        if (o.remaining_mi > 0.0) active.push_back({o.remaining_mi, o.task.demand});
    }

    EnergyBreakdown out;
    const int n_initial = static_cast<int>(active.size()) + 1;
    out.et_prime_s = execution_time(new_task.length_mi, vm.mips, n_initial);
    out.net_prev_s = 0.0;
    if (!active.empty()) {
        double min_remaining = std::numeric_limits<double>::infinity();
        for (const auto& a : active) min_remaining = std::min(min_remaining, a.remaining_mi);
        out.net_prev_s = execution_time(min_remaining, vm.mips, n_initial);
    }

    double new_remaining = new_task.length_mi;
    while (new_remaining > 0.0) {
        std::size_t n_active = active.size();
        double n = static_cast<double>(n_active) + 1.0;
        double rate = vm.mips / n;

        if (n_active == 0) {
            double dt = new_remaining / rate;
            out.solo_phase_j += predict_power(model, new_task.demand, policy, clamps) * dt;
            new_remaining = 0.0;
            break;
        }

        double t_new = new_remaining / rate;
        double t_boundary = std::numeric_limits<double>::infinity();
        for (const auto& a : active) t_boundary = std::min(t_boundary, a.remaining_mi / rate);

        UtilizationVector combined = new_task.demand;
        for (const auto& a : active) combined += a.util;

        // Equal finish times count as the newcomer finishing first, which
        // makes the solo tail collapse to zero instead of a spurious segment.
        if (t_new <= t_boundary) {
            out.parallel_phase_j += predict_power(model, combined, policy, clamps) * t_new;
            new_remaining = 0.0;
            break;
        }

        out.parallel_phase_j += predict_power(model, combined, policy, clamps) * t_boundary;
        new_remaining -= t_boundary * rate;
        double done = t_boundary * rate;
        std::vector<Active> still;
        still.reserve(active.size());
        for (const auto& a : active) {
            if (a.remaining_mi / rate > t_boundary) {
                still.push_back({a.remaining_mi - done, a.util});
            }
        }
        active = std::move(still);
    }

    out.total_j = out.parallel_phase_j + out.solo_phase_j;
    return out;
}

} // namespace easched
