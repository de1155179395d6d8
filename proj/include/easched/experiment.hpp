#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "easched/scheduler.hpp"
#include "easched/sim.hpp"
#include "easched/workload.hpp"

namespace easched {

// A full experiment: one catalog, one workload recipe, and a grid of
// (scheduler, seed) cells.  Every seed gets its own workload (derived from the
// workload seed and the run seed), shared by all schedulers in that seed so
// their results are directly comparable.
struct ExperimentConfig {
    std::string catalog_path;
    WorkloadSpec workload;
    std::vector<SchedulerKind> schedulers;
    GaParams ga;
    Constraints constraints;
    std::vector<std::uint64_t> seeds;
    std::string output_dir;
};

SchedulerKind parse_scheduler_kind(const std::string& name);

// Reads the experiment JSON; relative paths inside resolve against the config
// file's directory.  Unknown keys are rejected so typos fail loudly.
ExperimentConfig load_experiment_config(const std::string& path);

struct CellFailure {
    std::string scheduler;
    std::uint64_t seed = 0;
    std::string error;
};

struct ExperimentResult {
    std::vector<std::string> written_files;
    std::vector<CellFailure> failed_cells;
};

// Runs every (scheduler, seed) cell, writing a per-task CSV and a summary JSON
// per cell plus one cross-scheduler comparison JSON.  A failing cell is
// recorded and skipped; the rest of the grid still runs.  All outputs are a
// pure function of the config, so a rerun reproduces them byte for byte.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Pairwise comparison of already-written summary files covering the same
// workload; returns the comparison document as pretty-printed JSON.
std::string compare_summary_files(const std::vector<std::string>& paths);

} // namespace easched
