#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <stdexcept>
#include <vector>

#include "easched/core.hpp"

using namespace easched;

namespace {

Task make_task(std::string id, double cpu, double mem = 0.0, double arrival = 0.0) {
    Task t;
    t.id = std::move(id);
    t.length_mi = 1000.0;
    t.demand = UtilizationVector{cpu, mem, 0.0, 0.0};
    t.arrival_s = arrival;
    return t;
}

VmSpec make_vm(std::string id) {
    VmSpec v;
    v.id = std::move(id);
    v.mips = 1000.0;
    v.ram_mb = 2048.0;
    v.host_id = "host-000";
    return v;
}

} // namespace

TEST_CASE("utilization vector arithmetic is componentwise") {
    UtilizationVector a{10.0, 100.0, 1000.0, 10000.0};
    UtilizationVector b{5.0, 50.0, 500.0, 5000.0};

    UtilizationVector sum = a + b;
    CHECK(sum.cpu_pct == 15.0);
    CHECK(sum.mem_mb == 150.0);
    CHECK(sum.disk_bps == 1500.0);
    CHECK(sum.net_bps == 15000.0);

    sum -= b;
    CHECK(sum == a);

    UtilizationVector diff = a - b;
    CHECK(diff.cpu_pct == 5.0);
    CHECK(diff.mem_mb == 50.0);
}

TEST_CASE("utilization vector validity bounds") {
    CHECK(UtilizationVector{0.0, 0.0, 0.0, 0.0}.is_valid());
    CHECK(UtilizationVector{100.0, 1e6, 1e9, 1e9}.is_valid());
    CHECK_FALSE(UtilizationVector{100.5, 0.0, 0.0, 0.0}.is_valid());
    CHECK_FALSE(UtilizationVector{-1.0, 0.0, 0.0, 0.0}.is_valid());
    CHECK_FALSE(UtilizationVector{10.0, -5.0, 0.0, 0.0}.is_valid());
    CHECK_FALSE(
        UtilizationVector{10.0, std::numeric_limits<double>::infinity(), 0.0, 0.0}.is_valid());
    CHECK_FALSE(
        UtilizationVector{std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, 0.0}.is_valid());
}

TEST_CASE("task ordering is by arrival then id") {
    Task a = make_task("task-b", 10.0, 0.0, 1.0);
    Task b = make_task("task-a", 10.0, 0.0, 2.0);
    Task c = make_task("task-a", 10.0, 0.0, 1.0);

    CHECK(task_order_less(a, b));       // earlier arrival wins
    CHECK_FALSE(task_order_less(b, a));
    CHECK(task_order_less(c, a));       // same arrival, id breaks the tie
    CHECK_FALSE(task_order_less(a, c));
    CHECK_FALSE(task_order_less(a, a));
}

TEST_CASE("validate_mapping accepts a minimal total assignment") {
    std::vector<Task> tasks = {make_task("task-0", 10.0), make_task("task-1", 20.0)};
    std::vector<VmSpec> vms = {make_vm("vm-0"), make_vm("vm-1")};

    ScheduleMapping m;
    m.assignment["task-0"] = "vm-0";
    m.assignment["task-1"] = "vm-1";
    CHECK(validate_mapping(m, tasks, vms));

    // Reordering the task set must not change the verdict.
    std::swap(tasks[0], tasks[1]);
    CHECK(validate_mapping(m, tasks, vms));
}

TEST_CASE("validate_mapping rejects partial or dangling assignments") {
    std::vector<Task> tasks = {make_task("task-0", 10.0), make_task("task-1", 20.0),
                               make_task("task-2", 30.0)};
    std::vector<VmSpec> vms = {make_vm("vm-0")};

    ScheduleMapping partial;
    partial.assignment["task-0"] = "vm-0";
    partial.assignment["task-1"] = "vm-0";
    CHECK_FALSE(validate_mapping(partial, tasks, vms));

    ScheduleMapping dangling;
    dangling.assignment["task-0"] = "vm-0";
    dangling.assignment["task-1"] = "vm-0";
    dangling.assignment["task-2"] = "vm-9";
    CHECK_FALSE(validate_mapping(dangling, tasks, vms));
}

TEST_CASE("vm_load sums the demands landing on one VM") {
    std::vector<Task> tasks = {make_task("task-0", 30.0), make_task("task-1", 25.0),
                               make_task("task-2", 40.0)};
    std::vector<VmSpec> vms = {make_vm("vm-0"), make_vm("vm-1"), make_vm("vm-2")};

    ScheduleMapping m;
    m.assignment["task-0"] = "vm-0";
    m.assignment["task-1"] = "vm-0";
    m.assignment["task-2"] = "vm-1";

    UtilizationVector on0 = vm_load(m, "vm-0", tasks, vms);
    CHECK(on0.cpu_pct == doctest::Approx(55.0));

    UtilizationVector on2 = vm_load(m, "vm-2", tasks, vms);
    CHECK(on2 == UtilizationVector{});

    CHECK_THROWS_AS(vm_load(m, "vm-nope", tasks, vms), std::invalid_argument);
}

TEST_CASE("vm_load preserves a singleton demand unchanged") {
    Task t = make_task("task-0", 10.0, 512.0);
    t.demand.disk_bps = 100.0;
    t.demand.net_bps = 50.0;
    std::vector<Task> tasks = {t};
    std::vector<VmSpec> vms = {make_vm("vm-0")};
    ScheduleMapping m;
    m.assignment["task-0"] = "vm-0";

    CHECK(vm_load(m, "vm-0", tasks, vms) == t.demand);
}

TEST_CASE("total demand is conserved across vm_load of all VMs") {
    std::vector<Task> tasks;
    std::vector<VmSpec> vms = {make_vm("vm-0"), make_vm("vm-1"), make_vm("vm-2")};
    ScheduleMapping m;
    UtilizationVector expected;
    for (int i = 0; i < 12; ++i) {
        Task t = make_task("task-" + std::to_string(i), 1.0 + i, 10.0 * i);
        t.demand.disk_bps = 7.0 * i;
        t.demand.net_bps = 3.0 * i;
        expected += t.demand;
        m.assignment[t.id] = vms[static_cast<std::size_t>(i) % vms.size()].id;
        tasks.push_back(std::move(t));
    }

    UtilizationVector total;
    for (const auto& vm : vms) total += vm_load(m, vm.id, tasks, vms);
    CHECK(total.cpu_pct == doctest::Approx(expected.cpu_pct));
    CHECK(total.mem_mb == doctest::Approx(expected.mem_mb));
    CHECK(total.disk_bps == doctest::Approx(expected.disk_bps));
    CHECK(total.net_bps == doctest::Approx(expected.net_bps));
}
