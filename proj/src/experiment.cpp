#include "easched/experiment.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>

#include <json.hpp>

#include "easched/rng.hpp"

namespace easched {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Shortest round-trip decimal form; keeps report files stable across reruns.
std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "0";
    return std::string(buf, ptr);
}

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError(std::string("config: unknown key '") + it.key() + "' in " + where);
        }
    }
}

Range parse_range(const json& j, const char* name) {
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError(std::string("config: ") + name + " must be [min, max]");
    }
    return Range{j[0].get<double>(), j[1].get<double>()};
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

// Content fingerprint of a generated workload, so summaries carry proof of
// which task stream they were measured on.
std::string workload_id(std::span<const Task> tasks) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix_double = [&](double v) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        h = fnv1a(&bits, sizeof bits, h);
    };
    std::uint64_t count = tasks.size();
    h = fnv1a(&count, sizeof count, h);
    for (const auto& t : tasks) {
        std::uint64_t len = t.id.size();
        h = fnv1a(&len, sizeof len, h);
        h = fnv1a(t.id.data(), t.id.size(), h);
        mix_double(t.length_mi);
        mix_double(t.demand.cpu_pct);
        mix_double(t.demand.mem_mb);
        mix_double(t.demand.disk_bps);
        mix_double(t.demand.net_bps);
        mix_double(t.arrival_s);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

struct MetricStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

MetricStats stats_of(const std::vector<double>& values) {
    MetricStats s;
    if (values.empty()) return s;
    s.min = s.max = values[0];
    double sum = 0.0;
    for (double v : values) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(values.size());
    return s;
}

json metric_pair(double a, double b, const std::string& a_name, const std::string& b_name) {
    json m;
    m["a_value"] = a;
    m["b_value"] = b;
    m["delta"] = a - b;
    m["pct"] = b != 0.0 ? (a - b) / b * 100.0 : 0.0;
    m["winner"] = a < b ? a_name : (b < a ? b_name : "tie");
    return m;
}

} // namespace

SchedulerKind parse_scheduler_kind(const std::string& name) {
    if (name == "MWFD") return SchedulerKind::Mwfd;
    if (name == "GA_LC_MLR") return SchedulerKind::GaLcMlr;
    if (name == "GA_LM") return SchedulerKind::GaLm;
    if (name == "BRUTE_FORCE") return SchedulerKind::BruteForce;
    throw ConfigError("config: unknown scheduler '" + name + "'");
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }

    try {
        require_keys(doc, {"catalog", "output_dir", "schedulers", "seeds", "ga", "constraints",
                           "workload"},
                     "top level");
        ExperimentConfig cfg;
        fs::path base = fs::path(path).parent_path();
        auto resolve = [&](const std::string& p) {
            fs::path q(p);
            if (q.is_relative()) q = base / q;
            return q.lexically_normal().string();
        };

        cfg.catalog_path = resolve(doc.at("catalog").get<std::string>());
        if (!fs::exists(cfg.catalog_path)) {
            throw ConfigError("config: catalog does not exist: " + cfg.catalog_path);
        }
        cfg.output_dir = resolve(doc.at("output_dir").get<std::string>());

        for (const auto& s : doc.at("schedulers")) {
            cfg.schedulers.push_back(parse_scheduler_kind(s.get<std::string>()));
        }
        if (cfg.schedulers.empty()) throw ConfigError("config: schedulers must be non-empty");

        for (const auto& s : doc.at("seeds")) {
            long long v = s.get<long long>();
            if (v < 0) throw ConfigError("config: seeds must be non-negative");
            cfg.seeds.push_back(static_cast<std::uint64_t>(v));
        }
        if (cfg.seeds.empty()) throw ConfigError("config: seeds must be non-empty");

        if (doc.contains("ga")) {
            const json& g = doc.at("ga");
            require_keys(g, {"population_size", "generations", "crossover_rate", "mutation_rate",
                             "elitism_count", "stagnation_limit", "alpha"},
                         "ga");
            if (g.contains("population_size")) cfg.ga.population_size = g.at("population_size");
            if (g.contains("generations")) cfg.ga.generations = g.at("generations");
            if (g.contains("crossover_rate")) cfg.ga.crossover_rate = g.at("crossover_rate");
            if (g.contains("mutation_rate")) cfg.ga.mutation_rate = g.at("mutation_rate");
            if (g.contains("elitism_count")) cfg.ga.elitism_count = g.at("elitism_count");
            if (g.contains("stagnation_limit")) cfg.ga.stagnation_limit = g.at("stagnation_limit");
            if (g.contains("alpha")) cfg.ga.weights.alpha = g.at("alpha");
        }
        try {
            cfg.ga.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }

        if (doc.contains("constraints")) {
            const json& c = doc.at("constraints");
            require_keys(c, {"cpu_threshold_pct"}, "constraints");
            if (c.contains("cpu_threshold_pct")) {
                cfg.constraints.cpu_threshold_pct = c.at("cpu_threshold_pct");
            }
        }
        if (cfg.constraints.cpu_threshold_pct <= 0.0) {
            throw ConfigError("config: cpu_threshold_pct must be > 0");
        }

        const json& w = doc.at("workload");
        require_keys(w, {"task_count", "length_range_mi", "arrival_interval_s", "mem_range_mb",
                         "disk_range_bps", "net_range_bps", "trace_dir", "seed"},
                     "workload");
        cfg.workload.task_count = w.at("task_count").get<int>();
        if (w.contains("length_range_mi")) {
            cfg.workload.length_range_mi = parse_range(w.at("length_range_mi"), "length_range_mi");
        }
        if (w.contains("arrival_interval_s")) {
            cfg.workload.arrival_interval_s = w.at("arrival_interval_s");
        }
        if (w.contains("mem_range_mb")) {
            cfg.workload.mem_range_mb = parse_range(w.at("mem_range_mb"), "mem_range_mb");
        }
        if (w.contains("disk_range_bps")) {
            cfg.workload.disk_range_bps = parse_range(w.at("disk_range_bps"), "disk_range_bps");
        }
        if (w.contains("net_range_bps")) {
            cfg.workload.net_range_bps = parse_range(w.at("net_range_bps"), "net_range_bps");
        }
        if (w.contains("trace_dir")) {
            std::string dir = resolve(w.at("trace_dir").get<std::string>());
            if (!fs::is_directory(dir)) {
                throw ConfigError("config: trace_dir is not a directory: " + dir);
            }
            cfg.workload.trace_dir = dir;
        }
        if (w.contains("seed")) {
            long long v = w.at("seed").get<long long>();
            if (v < 0) throw ConfigError("config: workload seed must be non-negative");
            cfg.workload.seed = static_cast<std::uint64_t>(v);
        }
        cfg.workload.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    Catalog cat = load_catalog(config.catalog_path);
    std::vector<CpuTrace> traces;
    if (config.workload.trace_dir) traces = load_trace_dir(*config.workload.trace_dir);

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw ConfigError("cannot create output dir: " + config.output_dir);

    std::map<std::string, std::string> host_model;
    for (const auto& h : cat.hosts) host_model[h.id] = h.power_model_id;

    ExperimentResult result;
    std::map<std::uint64_t, std::map<std::string, json>> summaries;
    std::map<std::uint64_t, std::string> seed_wid;

    for (std::uint64_t seed : config.seeds) {
        WorkloadSpec wspec = config.workload;
        wspec.seed = mix_seed(config.workload.seed, seed);
        std::vector<Task> tasks = generate_workload(wspec, traces);
        seed_wid[seed] = workload_id(tasks);

        for (SchedulerKind kind : config.schedulers) {
            const char* name = scheduler_kind_name(kind);
            try {
                std::vector<VmBinding> bindings;
                bindings.reserve(cat.vms.size());
                for (const auto& vm : cat.vms) {
                    const std::string& mid = host_model.at(vm.host_id);
                    VmBinding b;
                    b.spec = vm;
                    b.meter = &cat.meter_models.at(mid);
                    b.sched = kind == SchedulerKind::GaLm ? &cat.lm_models.at(mid) : b.meter;
                    bindings.push_back(std::move(b));
                }

                SimParams params;
                params.scheduler = kind;
                params.ga = config.ga;
                params.constraints = config.constraints;
                params.seed = seed;
                SimReport report = run_simulation(tasks, bindings, params);

                std::string stem = std::string(name) + "_seed" + std::to_string(seed);
                fs::path csv_path = fs::path(config.output_dir) / (stem + "_tasks.csv");
                {
                    std::ofstream csv(csv_path);
                    if (!csv) throw ConfigError("cannot write " + csv_path.string());
                    csv << "task_id,vm_id,arrival_s,start_s,finish_s,energy_j\n";
                    for (const auto& r : report.records) {
                        csv << r.task_id << ',' << r.vm_id << ',' << format_double(r.arrival_s)
                            << ',' << format_double(r.start_s) << ',' << format_double(r.finish_s)
                            << ',' << format_double(r.energy_j) << '\n';
                    }
                }
                result.written_files.push_back(csv_path.string());

                json summary;
                summary["scheduler"] = name;
                summary["seed"] = seed;
                summary["workload_id"] = seed_wid[seed];
                summary["task_count"] = tasks.size();
                summary["completed"] = report.records.size();
                summary["rejected"] = report.rejected_task_count;
                summary["rejected_ids"] = report.rejected_ids;
                summary["total_energy_j"] = report.total_energy_j;
                summary["mean_execution_time_s"] = report.mean_execution_time_s;
                summary["clamp_events"] = report.clamp_events;
                summary["constraint_violations"] = report.constraint_violations;
                summary["max_work_residual_rel"] = report.max_work_residual_rel;

                fs::path sum_path = fs::path(config.output_dir) / (stem + "_summary.json");
                {
                    std::ofstream sf(sum_path);
                    if (!sf) throw ConfigError("cannot write " + sum_path.string());
                    sf << summary.dump(2) << '\n';
                }
                result.written_files.push_back(sum_path.string());
                summaries[seed][name] = std::move(summary);
            } catch (const std::exception& e) {
                result.failed_cells.push_back(CellFailure{name, seed, e.what()});
            }
        }
    }

    json comparison;
    json scheds = json::object();
    for (SchedulerKind kind : config.schedulers) {
        const char* name = scheduler_kind_name(kind);
        std::vector<double> energy;
        std::vector<double> et;
        json per_seed_energy = json::object();
        json per_seed_et = json::object();
        json seed_list = json::array();
        for (std::uint64_t seed : config.seeds) {
            auto si = summaries.find(seed);
            if (si == summaries.end()) continue;
            auto it = si->second.find(name);
            if (it == si->second.end()) continue;
            double e = it->second.at("total_energy_j");
            double t = it->second.at("mean_execution_time_s");
            energy.push_back(e);
            et.push_back(t);
            per_seed_energy[std::to_string(seed)] = e;
            per_seed_et[std::to_string(seed)] = t;
            seed_list.push_back(seed);
        }
        MetricStats es = stats_of(energy);
        MetricStats ts = stats_of(et);
        json entry;
        entry["seeds"] = seed_list;
        entry["total_energy_j"] =
            json{{"mean", es.mean}, {"min", es.min}, {"max", es.max}, {"per_seed", per_seed_energy}};
        entry["mean_execution_time_s"] =
            json{{"mean", ts.mean}, {"min", ts.min}, {"max", ts.max}, {"per_seed", per_seed_et}};
        scheds[name] = std::move(entry);
    }
    comparison["schedulers"] = std::move(scheds);

    json pairs = json::array();
    for (std::size_t i = 0; i < config.schedulers.size(); ++i) {
        for (std::size_t j = i + 1; j < config.schedulers.size(); ++j) {
            std::string a = scheduler_kind_name(config.schedulers[i]);
            std::string b = scheduler_kind_name(config.schedulers[j]);
            std::vector<double> ea, eb, ta, tb;
            long long e_wins_a = 0, e_wins_b = 0, e_ties = 0;
            long long t_wins_a = 0, t_wins_b = 0, t_ties = 0;
            for (std::uint64_t seed : config.seeds) {
                auto si = summaries.find(seed);
                if (si == summaries.end()) continue;
                auto ia = si->second.find(a);
                auto ib = si->second.find(b);
                if (ia == si->second.end() || ib == si->second.end()) continue;
                double e1 = ia->second.at("total_energy_j");
                double e2 = ib->second.at("total_energy_j");
                double t1 = ia->second.at("mean_execution_time_s");
                double t2 = ib->second.at("mean_execution_time_s");
                ea.push_back(e1);
                eb.push_back(e2);
                ta.push_back(t1);
                tb.push_back(t2);
                (e1 < e2 ? e_wins_a : (e2 < e1 ? e_wins_b : e_ties))++;
                (t1 < t2 ? t_wins_a : (t2 < t1 ? t_wins_b : t_ties))++;
            }
            json pair;
            pair["a"] = a;
            pair["b"] = b;
            pair["common_seed_count"] = ea.size();
            json em = metric_pair(stats_of(ea).mean, stats_of(eb).mean, a, b);
            em["wins_a"] = e_wins_a;
            em["wins_b"] = e_wins_b;
            em["ties"] = e_ties;
            pair["total_energy_j"] = std::move(em);
            json tm = metric_pair(stats_of(ta).mean, stats_of(tb).mean, a, b);
            tm["wins_a"] = t_wins_a;
            tm["wins_b"] = t_wins_b;
            tm["ties"] = t_ties;
            pair["mean_execution_time_s"] = std::move(tm);
            pairs.push_back(std::move(pair));
        }
    }
    comparison["pairs"] = std::move(pairs);

    json per_seed = json::object();
    for (std::uint64_t seed : config.seeds) {
        json entry;
        entry["workload_id"] = seed_wid.count(seed) ? json(seed_wid[seed]) : json(nullptr);
        auto si = summaries.find(seed);
        if (si != summaries.end()) {
            for (const auto& [name, summary] : si->second) {
                entry[name] = json{{"total_energy_j", summary.at("total_energy_j")},
                                   {"mean_execution_time_s", summary.at("mean_execution_time_s")},
                                   {"rejected", summary.at("rejected")}};
            }
        }
        per_seed[std::to_string(seed)] = std::move(entry);
    }
    comparison["per_seed"] = std::move(per_seed);

    json failed = json::array();
    for (const auto& f : result.failed_cells) {
        failed.push_back(json{{"scheduler", f.scheduler}, {"seed", f.seed}, {"error", f.error}});
    }
    comparison["failed_cells"] = std::move(failed);

    fs::path cmp_path = fs::path(config.output_dir) / "comparison.json";
    {
        std::ofstream cf(cmp_path);
        if (!cf) throw ConfigError("cannot write " + cmp_path.string());
        cf << comparison.dump(2) << '\n';
    }
    result.written_files.push_back(cmp_path.string());
    return result;
}

std::string compare_summary_files(const std::vector<std::string>& paths) {
    if (paths.size() < 2) throw ConfigError("compare: need at least 2 summary files");

    std::vector<json> summaries;
    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in) throw ConfigError("compare: cannot open " + path);
        try {
            summaries.push_back(json::parse(in));
        } catch (const json::exception& e) {
            throw ConfigError("compare: " + path + ": " + e.what());
        }
    }

    std::string wid;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        if (!summaries[i].contains("workload_id")) {
            throw ConfigError("compare: " + paths[i] + " has no workload_id");
        }
        std::string w = summaries[i].at("workload_id");
        if (i == 0) {
            wid = w;
        } else if (w != wid) {
            throw ConfigError("compare: workload identifiers do not match (" + wid + " vs " + w +
                              "); summaries cover different workloads");
        }
    }

    json out;
    out["workload_id"] = wid;
    json list = json::array();
    for (const auto& s : summaries) {
        list.push_back(json{{"scheduler", s.at("scheduler")},
                            {"seed", s.at("seed")},
                            {"total_energy_j", s.at("total_energy_j")},
                            {"mean_execution_time_s", s.at("mean_execution_time_s")}});
    }
    out["summaries"] = std::move(list);

    json pairs = json::array();
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        for (std::size_t j = i + 1; j < summaries.size(); ++j) {
            std::string a = summaries[i].at("scheduler");
            std::string b = summaries[j].at("scheduler");
            json pair;
            pair["a"] = a;
            pair["b"] = b;
            pair["total_energy_j"] = metric_pair(summaries[i].at("total_energy_j"),
                                                 summaries[j].at("total_energy_j"), a, b);
            pair["mean_execution_time_s"] =
                metric_pair(summaries[i].at("mean_execution_time_s"),
                            summaries[j].at("mean_execution_time_s"), a, b);
            pairs.push_back(std::move(pair));
        }
    }
    out["pairs"] = std::move(pairs);
    return out.dump(2) + "\n";
}

} // namespace easched
