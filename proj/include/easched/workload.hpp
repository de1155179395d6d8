#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "easched/core.hpp"
#include "easched/power.hpp"

namespace easched {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A per-node CPU utilization time series in the PlanetLab/CoMon text format:
// one integer percentage per line, typically 288 five-minute readings per day.
struct CpuTrace {
    std::vector<int> readings;
};

struct Range {
    double min = 0.0;
    double max = 0.0;
};

// Parameters for synthesizing a task stream.  Tasks arrive on a fixed cadence
// with uniformly drawn lengths and resource demands; CPU demand comes from
// trace files when a trace directory is configured, otherwise it is drawn
// uniformly like the rest.
struct WorkloadSpec {
    int task_count = 0;
    Range length_range_mi{6000.0, 12500.0};
    double arrival_interval_s = 3.0;
    Range mem_range_mb{100.0, 1000.0};
    Range disk_range_bps{0.0, 1e6};
    Range net_range_bps{0.0, 1e6};
    std::optional<std::string> trace_dir;
    std::uint64_t seed = 0;

    void validate() const;
};

CpuTrace parse_planetlab_trace(std::istream& in);
CpuTrace parse_planetlab_trace(const std::string& text);
std::string serialize_trace(const CpuTrace& trace);

// Loads every regular file in the directory, sorted by filename so the result
// does not depend on directory enumeration order.
std::vector<CpuTrace> load_trace_dir(const std::string& dir);

std::vector<Task> generate_workload(const WorkloadSpec& spec, std::span<const CpuTrace> traces);

// A fully expanded data-center description: concrete hosts and VMs plus the
// power models hosts refer to.  meter_models holds each model as declared;
// lm_models holds a deliberately coarse CPU+memory-only sibling fitted from
// the same calibration data, for schedulers that are meant to reason with the
// less informed model.
struct Catalog {
    std::vector<HostSpec> hosts;
    std::vector<VmSpec> vms;
    std::map<std::string, PowerModel> meter_models;
    std::map<std::string, PowerModel> lm_models;
};

// Reads a catalog JSON document.  Host and VM sections declare types with
// either an explicit per-type count or a document-level total distributed
// across types (remainder to the earliest declared).  Instances are emitted
// round-robin across the declared types and VMs are bound to hosts round-robin
// as well.  Relative calibration-file paths resolve against the catalog file's
// directory.
Catalog load_catalog(const std::string& path);

} // namespace easched
