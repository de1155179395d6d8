#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "easched/energy.hpp"

using namespace easched;

namespace {

Task make_task(std::string id, double length_mi, double cpu) {
    Task t;
    t.id = std::move(id);
    t.length_mi = length_mi;
    t.demand = UtilizationVector{cpu, 0.0, 0.0, 0.0};
    return t;
}

VmSpec make_vm(double mips) {
    VmSpec v;
    v.id = "vm-0";
    v.mips = mips;
    v.ram_mb = 4096.0;
    v.host_id = "host-000";
    return v;
}

// 40 W idle + 2 W per CPU point: cpu 40 -> 120 W, cpu 80 -> 200 W.  Keeping
// the power affine in CPU makes every expected energy computable by hand.
PowerModel affine_model() { return make_linear_cpu_mem_model({40.0, 2.0, 0.0, 0.0, 0.0}); }

// Brute-force reference: advance the shared-MIPS timeline in tiny fixed steps
// and integrate the VM power over the newcomer's lifetime.  Slow and dumb on
// purpose -- it should agree with the closed-form segmentation.
double stepped_energy(const Task& new_task, const VmSpec& vm,
                      std::vector<RunningExecution> ongoing, const PowerModel& model,
                      double dt) {
    double remaining_new = new_task.length_mi;
    double energy = 0.0;
    while (remaining_new > 1e-12) {
        int n = 1;
        UtilizationVector load = new_task.demand;
        for (const auto& r : ongoing)
            if (r.remaining_mi > 1e-12) {
                ++n;
                load += r.task.demand;
            }
        double rate = vm.mips / n;
        double step = dt;
        // Never step across a completion; shrink to the nearest boundary.
        step = std::min(step, remaining_new / rate);
        for (const auto& r : ongoing)
            if (r.remaining_mi > 1e-12) step = std::min(step, r.remaining_mi / rate);
        energy += predict_power(model, load) * step;
        remaining_new -= rate * step;
        for (auto& r : ongoing)
            if (r.remaining_mi > 1e-12) r.remaining_mi -= rate * step;
    }
    return energy;
}

} // namespace

TEST_CASE("execution time scales with length and degree of sharing") {
    CHECK(execution_time(10000.0, 2000.0, 1) == doctest::Approx(5.0));
    CHECK(execution_time(2200.0, 2200.0, 2) == doctest::Approx(2.0));
    CHECK(execution_time(0.0, 1500.0, 3) == 0.0);
}

TEST_CASE("execution time rejects nonsense inputs") {
    CHECK_THROWS_AS(execution_time(-1.0, 1000.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(execution_time(100.0, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(execution_time(100.0, -5.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(execution_time(100.0, 1000.0, 0), std::invalid_argument);
}

TEST_CASE("constant power energy is watts times seconds") {
    CHECK(task_energy_simple(100.0, 5.0) == doctest::Approx(500.0));
    CHECK(task_energy_simple(0.0, 5.0) == 0.0);
    CHECK(task_energy_simple(100.0, 0.0) == 0.0);
}

TEST_CASE("remaining time accounts for the post-placement sharing level") {
    RunningExecution r;
    r.task = make_task("task-a", 5000.0, 40.0);
    r.remaining_mi = 2000.0;
    CHECK(new_execution_time(r, 1000.0, 2) == doctest::Approx(4.0));
    CHECK(new_execution_time(r, 1000.0, 1) == doctest::Approx(2.0));
}

TEST_CASE("placement on an idle VM is plain constant-power accounting") {
    Task t = make_task("task-new", 2000.0, 40.0);
    VmSpec vm = make_vm(1000.0);
    PowerModel model = affine_model();

    EnergyBreakdown b = incremental_energy(t, vm, {}, model);
    CHECK(b.et_prime_s == doctest::Approx(2.0));
    CHECK(b.net_prev_s == 0.0);
    CHECK(b.parallel_phase_j == 0.0);
    CHECK(b.solo_phase_j == doctest::Approx(240.0)); // 120 W for 2 s
    CHECK(b.total_j == doctest::Approx(240.0));
}

TEST_CASE("newcomer outliving the incumbent pays a parallel phase then a solo tail") {
    // Incumbent has 2000 MI left; newcomer brings 4000 MI; both demand cpu 40
    // on a 1000 MIPS VM.  Shared two ways the incumbent lasts 4 s (combined
    // power 200 W); the newcomer then finishes its remaining 2000 MI alone in
    // 2 s at 120 W: 800 + 240 = 1040 J.
    Task t = make_task("task-new", 4000.0, 40.0);
    VmSpec vm = make_vm(1000.0);
    PowerModel model = affine_model();
    RunningExecution r;
    r.task = make_task("task-old", 6000.0, 40.0);
    r.remaining_mi = 2000.0;
    std::vector<RunningExecution> ongoing = {r};

    EnergyBreakdown b = incremental_energy(t, vm, ongoing, model);
    CHECK(b.et_prime_s == doctest::Approx(8.0));
    CHECK(b.net_prev_s == doctest::Approx(4.0));
    CHECK(b.parallel_phase_j == doctest::Approx(800.0));
    CHECK(b.solo_phase_j == doctest::Approx(240.0));
    CHECK(b.total_j == doctest::Approx(1040.0));
}

TEST_CASE("newcomer finishing first is charged combined power for its whole run") {
    Task t = make_task("task-new", 2000.0, 40.0);
    VmSpec vm = make_vm(1000.0);
    PowerModel model = affine_model();
    RunningExecution r;
    r.task = make_task("task-old", 9000.0, 40.0);
    r.remaining_mi = 8000.0;
    std::vector<RunningExecution> ongoing = {r};

    EnergyBreakdown b = incremental_energy(t, vm, ongoing, model);
    CHECK(b.et_prime_s == doctest::Approx(4.0));
    CHECK(b.net_prev_s == doctest::Approx(16.0));
    CHECK(b.total_j == doctest::Approx(800.0)); // 200 W for 4 s
    CHECK(b.solo_phase_j == 0.0);
}

TEST_CASE("the dead heat is continuous with both neighbouring cases") {
    // Incumbent and newcomer finish at the same instant: no solo tail, and a
    // hair more or less remaining work moves the energy only infinitesimally.
    VmSpec vm = make_vm(1000.0);
    PowerModel model = affine_model();
    auto run = [&](double new_len) {
        Task t = make_task("task-new", new_len, 40.0);
        RunningExecution r;
        r.task = make_task("task-old", 5000.0, 40.0);
        r.remaining_mi = 3000.0;
        std::vector<RunningExecution> ongoing = {r};
        return incremental_energy(t, vm, ongoing, model);
    };

    EnergyBreakdown tie = run(3000.0);
    CHECK(tie.solo_phase_j == 0.0);
    CHECK(tie.total_j == doctest::Approx(200.0 * 6.0));

    double below = run(3000.0 - 1e-4).total_j;
    double above = run(3000.0 + 1e-4).total_j;
    CHECK(std::abs(tie.total_j - below) < 1e-6 * tie.total_j + 0.1);
    CHECK(std::abs(tie.total_j - above) < 1e-6 * tie.total_j + 0.1);
}

TEST_CASE("multiple incumbents segment the timeline at each completion") {
    // Two incumbents with different remaining work: three sharing levels over
    // the newcomer's lifetime.  Cross-checked against fine-grained stepping.
    Task t = make_task("task-new", 6000.0, 30.0);
    VmSpec vm = make_vm(1500.0);
    PowerModel model = affine_model();
    std::vector<RunningExecution> ongoing;
    RunningExecution a;
    a.task = make_task("task-a", 4000.0, 20.0);
    a.remaining_mi = 1000.0;
    RunningExecution b;
    b.task = make_task("task-b", 9000.0, 10.0);
    b.remaining_mi = 4000.0;
    ongoing = {a, b};

    EnergyBreakdown got = incremental_energy(t, vm, ongoing, model);
    double oracle = stepped_energy(t, vm, {a, b}, model, 1e-4);
    CHECK(got.total_j == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("incumbents with no work left do not dilute the newcomer's rate") {
    Task t = make_task("task-new", 2000.0, 40.0);
    VmSpec vm = make_vm(1000.0);
    PowerModel model = affine_model();
    RunningExecution spent;
    spent.task = make_task("task-done", 1000.0, 50.0);
    spent.remaining_mi = 0.0;
    std::vector<RunningExecution> ongoing = {spent};

    EnergyBreakdown b = incremental_energy(t, vm, ongoing, model);
    CHECK(b.et_prime_s == doctest::Approx(2.0));
    CHECK(b.total_j == doctest::Approx(240.0));
}

TEST_CASE("randomized two-task scenarios agree with the stepping oracle") {
    VmSpec vm = make_vm(1000.0);
    PowerModel model = affine_model();
    std::mt19937_64 gen(1234);
    std::uniform_real_distribution<double> len(500.0, 8000.0);
    std::uniform_real_distribution<double> cpu(5.0, 45.0);

    for (int i = 0; i < 20; ++i) {
        Task t = make_task("task-new", len(gen), cpu(gen));
        RunningExecution r;
        r.task = make_task("task-old", 10000.0, cpu(gen));
        r.remaining_mi = len(gen);
        std::vector<RunningExecution> ongoing = {r};
        double got = incremental_energy(t, vm, ongoing, model).total_j;
        double oracle = stepped_energy(t, vm, {r}, model, 1e-3);
        CHECK(got == doctest::Approx(oracle).epsilon(1e-4));
    }
}
