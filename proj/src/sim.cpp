#include "easched/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "easched/energy.hpp"
#include "easched/objective.hpp"
#include "easched/rng.hpp"

namespace easched {

const char* scheduler_kind_name(SchedulerKind kind) {
    switch (kind) {
        case SchedulerKind::Mwfd: return "MWFD";
        case SchedulerKind::GaLcMlr: return "GA_LC_MLR";
        case SchedulerKind::GaLm: return "GA_LM";
        case SchedulerKind::BruteForce: return "BRUTE_FORCE";
    }
    return "UNKNOWN";
}

namespace {

struct RunningTask {
    Task task;
    double start_s = 0.0;
    double remaining_mi = 0.0;
    double energy_j = 0.0;
    double completion_s = -1.0; // scheduled completion; < 0 until first rated
};

struct VmState {
    const VmBinding* binding = nullptr;
    std::vector<RunningTask> running;
    double last_update_s = 0.0;
};

class Engine {
public:
    Engine(std::span<const VmBinding> vms, const SimParams& params) : params_(params) {
        vms_.reserve(vms.size());
        for (const auto& b : vms) {
            if (!b.meter || !b.sched) {
                throw std::invalid_argument("run_simulation: VM without power models");
            }
            vms_.push_back(VmState{&b, {}, 0.0});
        }
        if (vms_.empty()) throw std::invalid_argument("run_simulation: no VMs");
    }

    SimReport run(std::vector<Task> workload) {
        std::sort(workload.begin(), workload.end(), task_order_less);

        std::size_t wi = 0;
        std::uint64_t batch_index = 0;
        while (wi < workload.size() || !completions_.empty()) {
            double next_arrival = wi < workload.size()
                                      ? workload[wi].arrival_s
                                      : std::numeric_limits<double>::infinity();
            if (!completions_.empty() && std::get<0>(*completions_.begin()) <= next_arrival) {
                auto [t, id] = *completions_.begin();
                completions_.erase(completions_.begin());
                complete_task(t, id);
                continue;
            }
            double t = next_arrival;
            std::size_t end = wi;
            while (end < workload.size() && workload[end].arrival_s == t) ++end;
            for (auto& vm : vms_) advance_vm(vm, t);
            schedule_batch(t, std::span<const Task>(workload).subspan(wi, end - wi),
                           batch_index++);
            wi = end;
        }

        finalize();
        return std::move(report_);
    }

private:
    void advance_vm(VmState& vm, double t) {
        double dt = t - vm.last_update_s;
        if (dt < 0.0) throw std::logic_error("simulation time moved backwards");
        if (dt > 0.0 && !vm.running.empty()) {
            double n = static_cast<double>(vm.running.size());
            double rate = vm.binding->spec.mips / n;
            UtilizationVector load;
            for (const auto& r : vm.running) load += r.task.demand;
            double watts =
                predict_power(*vm.binding->meter, load, RangePolicy::ClampToGrid, &clamps_);
            report_.total_energy_j += watts * dt;
            for (auto& r : vm.running) r.remaining_mi -= dt * rate;
        }
        vm.last_update_s = t;
    }

    // Completion times for every task on this VM are a function of the current
    // degree of sharing, so any membership change re-rates them all.
    void reschedule_vm(std::size_t vmi, double now) {
        VmState& vm = vms_[vmi];
        double n = static_cast<double>(vm.running.size());
        for (auto& r : vm.running) {
            if (r.completion_s >= 0.0) completions_.erase({r.completion_s, r.task.id});
            double remaining = std::max(r.remaining_mi, 0.0);
            r.completion_s = now + remaining * n / vm.binding->spec.mips;
            completions_.insert({r.completion_s, r.task.id});
        }
    }

    void complete_task(double t, const std::string& task_id) {
        std::size_t vmi = task_vm_.at(task_id);
        VmState& vm = vms_[vmi];
        advance_vm(vm, t);

        auto it = std::find_if(vm.running.begin(), vm.running.end(),
                               [&](const RunningTask& r) { return r.task.id == task_id; });
        if (it == vm.running.end()) throw std::logic_error("completion for unknown task");

        double denom = std::max(it->task.length_mi, 1.0);
        report_.max_work_residual_rel =
            std::max(report_.max_work_residual_rel, std::abs(it->remaining_mi) / denom);

        report_.records.push_back(TaskRecord{it->task.id, vm.binding->spec.id,
                                             it->task.arrival_s, it->start_s, t, it->energy_j});
        vm.running.erase(it);
        task_vm_.erase(task_id);
        reschedule_vm(vmi, t);
    }

    std::vector<VmView> make_views() const {
        std::vector<VmView> views;
        views.reserve(vms_.size());
        for (const auto& vm : vms_) {
            VmView v;
            v.spec = vm.binding->spec;
            v.power = vm.binding->sched;
            v.ongoing.reserve(vm.running.size());
            for (const auto& r : vm.running) {
                v.ongoing.push_back(RunningExecution{r.task, r.start_s, r.remaining_mi});
            }
            views.push_back(std::move(v));
        }
        return views;
    }

    void reject(const Task& task) { report_.rejected_ids.push_back(task.id); }

    void place(const Task& task, std::size_t vmi, double t) {
        VmState& vm = vms_[vmi];
        UtilizationVector load;
        for (const auto& r : vm.running) load += r.task.demand;
        if (!check_capacity(vm.binding->spec, load, task.demand, params_.constraints)) {
            // A scheduler should never hand us this; count it loudly and
            // refuse the placement rather than corrupting the run.
            ++report_.constraint_violations;
            reject(task);
            return;
        }

        std::vector<RunningExecution> ongoing;
        ongoing.reserve(vm.running.size());
        for (const auto& r : vm.running) {
            ongoing.push_back(RunningExecution{r.task, r.start_s, r.remaining_mi});
        }
        double energy = incremental_energy(task, vm.binding->spec, ongoing, *vm.binding->meter,
                                           RangePolicy::ClampToGrid, &clamps_)
                            .total_j;

        vm.running.push_back(RunningTask{task, t, task.length_mi, energy, -1.0});
        task_vm_[task.id] = vmi;
        reschedule_vm(vmi, t);
    }

    // Sequential fallback when a batch-level search cannot produce a jointly
    // feasible mapping: tasks are placed one at a time at their individually
    // best VM, and only the tasks that truly fit nowhere get rejected.
    void place_greedy(const Task& task, double t) {
        auto views = make_views();
        auto evals = evaluate_candidates(task, views, params_.ga.weights, params_.constraints,
                                         RangePolicy::ClampToGrid, &clamps_);
        const CandidateEvaluation* pick = select_candidate(evals);
        if (!pick) {
            reject(task);
            return;
        }
        for (std::size_t i = 0; i < views.size(); ++i) {
            if (views[i].spec.id == pick->vm_id) {
                place(task, i, t);
                return;
            }
        }
    }

    void apply_mapping(const ScheduleMapping& mapping, std::span<const Task> tasks, double t) {
        std::map<std::string, std::size_t> vm_index;
        for (std::size_t i = 0; i < vms_.size(); ++i) {
            vm_index[vms_[i].binding->spec.id] = i;
        }
        for (const auto& task : tasks) {
            auto it = mapping.assignment.find(task.id);
            if (it == mapping.assignment.end()) {
                reject(task);
                continue;
            }
            place(task, vm_index.at(it->second), t);
        }
    }

    void schedule_batch(double t, std::span<const Task> batch, std::uint64_t batch_index) {
        if (batch.empty()) return;
        auto views = make_views();

        if (params_.scheduler == SchedulerKind::Mwfd) {
            MwfdResult res = mwfd_schedule(batch, views, params_.constraints,
                                           RangePolicy::ClampToGrid, &clamps_);
            // Tasks the pass left unassigned are missing from the mapping and
            // get rejected right here.
            apply_mapping(res.mapping, batch, t);
            return;
        }

        // Tasks that fit no VM even alone can never be part of a feasible
        // mapping; reject them up front so the search only sees placeable work.
        std::vector<Task> feasible;
        feasible.reserve(batch.size());
        for (const auto& task : batch) {
            bool anywhere = false;
            for (const auto& vm : views) {
                if (check_capacity(vm.spec, vm.load(), task.demand, params_.constraints)) {
                    anywhere = true;
                    break;
                }
            }
            if (anywhere) {
                feasible.push_back(task);
            } else {
                reject(task);
            }
        }
        if (feasible.empty()) return;

        std::optional<ScheduleMapping> mapping;
        if (params_.scheduler == SchedulerKind::BruteForce) {
            BruteForceResult bf =
                brute_force_schedule(feasible, views, params_.ga.weights, params_.constraints,
                                     RangePolicy::ClampToGrid, &clamps_);
            mapping = bf.mapping;
        } else {
            GaParams ga = params_.ga;
            ga.seed = mix_seed(params_.seed, batch_index);
            GaResult res = ga_schedule(feasible, views, params_.constraints, ga,
                                       RangePolicy::ClampToGrid, &clamps_);
            mapping = res.mapping;
        }

        if (mapping) {
            apply_mapping(*mapping, feasible, t);
        } else {
            for (const auto& task : feasible) place_greedy(task, t);
        }
    }

    void finalize() {
        std::sort(report_.records.begin(), report_.records.end(),
                  [](const TaskRecord& a, const TaskRecord& b) { return a.task_id < b.task_id; });
        std::sort(report_.rejected_ids.begin(), report_.rejected_ids.end());
        report_.rejected_task_count = static_cast<long long>(report_.rejected_ids.size());
        report_.clamp_events = clamps_.events;
        if (!report_.records.empty()) {
            double sum = 0.0;
            for (const auto& r : report_.records) sum += r.finish_s - r.start_s;
            report_.mean_execution_time_s = sum / static_cast<double>(report_.records.size());
        }
    }

    SimParams params_;
    std::vector<VmState> vms_;
    std::set<std::tuple<double, std::string>> completions_;
    std::map<std::string, std::size_t> task_vm_;
    ClampCounter clamps_;
    SimReport report_;
};

} // namespace

SimReport run_simulation(std::span<const Task> workload, std::span<const VmBinding> vms,
                         const SimParams& params) {
    Engine engine(vms, params);
    return engine.run(std::vector<Task>(workload.begin(), workload.end()));
}

} // namespace easched
