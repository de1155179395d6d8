#include "easched/workload.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "easched/rng.hpp"

namespace easched {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string zero_padded(const char* prefix, std::size_t index, std::size_t width) {
    std::string digits = std::to_string(index);
    std::string out(prefix);
    if (digits.size() < width) out.append(width - digits.size(), '0');
    out += digits;
    return out;
}

std::size_t id_width(std::size_t count, std::size_t minimum) {
    std::size_t width = count > 0 ? std::to_string(count - 1).size() : 1;
    return std::max(width, minimum);
}

} // namespace

void WorkloadSpec::validate() const {
    if (task_count < 0) throw ConfigError("workload: task_count must be >= 0");
    if (arrival_interval_s <= 0.0) throw ConfigError("workload: arrival_interval_s must be > 0");
    auto check_range = [](const Range& r, const char* name) {
        if (r.min > r.max || r.min < 0.0) {
            throw ConfigError(std::string("workload: bad ") + name + " range");
        }
    };
    check_range(length_range_mi, "length_range_mi");
    check_range(mem_range_mb, "mem_range_mb");
    check_range(disk_range_bps, "disk_range_bps");
    check_range(net_range_bps, "net_range_bps");
}

CpuTrace parse_planetlab_trace(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ConfigError("trace is empty");

    CpuTrace trace;
    trace.readings.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& l = lines[i];
        int value = 0;
        auto [ptr, ec] = std::from_chars(l.data(), l.data() + l.size(), value);
        if (ec != std::errc{} || ptr != l.data() + l.size()) {
            throw ConfigError("trace line " + std::to_string(i + 1) + ": not an integer: '" + l +
                              "'");
        }
        if (value < 0 || value > 100) {
            throw ConfigError("trace line " + std::to_string(i + 1) + ": value " +
                              std::to_string(value) + " outside [0,100]");
        }
        trace.readings.push_back(value);
    }
    return trace;
}

CpuTrace parse_planetlab_trace(const std::string& text) {
    std::istringstream in(text);
    return parse_planetlab_trace(in);
}

std::string serialize_trace(const CpuTrace& trace) {
    std::string out;
    for (int v : trace.readings) {
        out += std::to_string(v);
        out += '\n';
    }
    return out;
}

std::vector<CpuTrace> load_trace_dir(const std::string& dir) {
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    if (ec) throw ConfigError("cannot read trace directory: " + dir + ": " + ec.message());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("trace directory is empty: " + dir);

    std::vector<CpuTrace> traces;
    traces.reserve(files.size());
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot open trace file: " + file.string());
        try {
            traces.push_back(parse_planetlab_trace(in));
        } catch (const ConfigError& e) {
            throw ConfigError(file.string() + ": " + e.what());
        }
    }
    return traces;
}

std::vector<Task> generate_workload(const WorkloadSpec& spec, std::span<const CpuTrace> traces) {
    spec.validate();
    if (spec.trace_dir && traces.empty()) {
        throw ConfigError("workload: trace_dir set but no traces supplied");
    }

    std::mt19937_64 rng(spec.seed);
    std::vector<std::size_t> cursor(traces.size(), 0);
    std::size_t width = id_width(static_cast<std::size_t>(spec.task_count), 4);

    std::vector<Task> tasks;
    tasks.reserve(static_cast<std::size_t>(spec.task_count));
    for (int k = 0; k < spec.task_count; ++k) {
        Task t;
        t.id = zero_padded("task-", static_cast<std::size_t>(k), width);
        t.arrival_s = static_cast<double>(k) * spec.arrival_interval_s;
        t.length_mi = uniform_in(rng, spec.length_range_mi.min, spec.length_range_mi.max);
        if (traces.empty()) {
            t.demand.cpu_pct = uniform_in(rng, 0.0, 100.0);
        } else {
            std::size_t ti = static_cast<std::size_t>(k) % traces.size();
            const auto& readings = traces[ti].readings;
            t.demand.cpu_pct = static_cast<double>(readings[cursor[ti] % readings.size()]);
            ++cursor[ti];
        }
        t.demand.mem_mb = uniform_in(rng, spec.mem_range_mb.min, spec.mem_range_mb.max);
        t.demand.disk_bps = uniform_in(rng, spec.disk_range_bps.min, spec.disk_range_bps.max);
        t.demand.net_bps = uniform_in(rng, spec.net_range_bps.min, spec.net_range_bps.max);
        tasks.push_back(std::move(t));
    }
    return tasks;
}

namespace {

// Per-type instance counts: either every row declares its own count, or a
// document-level total is split evenly with the remainder going to the
// earliest declared types.
std::vector<std::size_t> expand_counts(const json& rows, const json& doc, const char* total_key,
                                       const char* section) {
    std::vector<std::size_t> counts(rows.size(), 0);
    bool has_total = doc.contains(total_key);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        bool has_count = rows[i].contains("count");
        if (has_total && has_count) {
            throw ConfigError(std::string("catalog: ") + section + " rows must omit 'count' when '" +
                              total_key + "' is set");
        }
        if (!has_total && !has_count) {
            throw ConfigError(std::string("catalog: ") + section + " row " + std::to_string(i) +
                              " needs 'count' (or set '" + total_key + "')");
        }
        if (has_count) {
            long long c = rows[i].at("count").get<long long>();
            if (c < 0) throw ConfigError(std::string("catalog: negative count in ") + section);
            counts[i] = static_cast<std::size_t>(c);
        }
    }
    if (has_total) {
        long long total = doc.at(total_key).get<long long>();
        if (total < 1) throw ConfigError(std::string("catalog: ") + total_key + " must be >= 1");
        std::size_t base = static_cast<std::size_t>(total) / rows.size();
        std::size_t rem = static_cast<std::size_t>(total) % rows.size();
        for (std::size_t i = 0; i < rows.size(); ++i) counts[i] = base + (i < rem ? 1 : 0);
    }
    std::size_t sum = 0;
    for (std::size_t c : counts) sum += c;
    if (sum == 0) throw ConfigError(std::string("catalog: ") + section + " expands to zero instances");
    return counts;
}

// Emission order interleaves the declared types so any prefix of the expansion
// stays close to evenly distributed.
template <typename Emit>
void emit_round_robin(const std::vector<std::size_t>& counts, Emit emit) {
    std::vector<std::size_t> remaining = counts;
    std::size_t total = 0;
    for (std::size_t c : remaining) total += c;
    std::size_t row = 0;
    std::size_t emitted = 0;
    while (emitted < total) {
        if (remaining[row] > 0) {
            emit(row, emitted);
            --remaining[row];
            ++emitted;
        }
        row = (row + 1) % remaining.size();
    }
}

PowerModel load_power_model(const json& entry, const fs::path& base_dir, const std::string& id,
                            bool coarse_variant) {
    std::string kind = entry.at("kind").get<std::string>();
    if (kind == "LINEAR_CPU_MEM") {
        const json& co = entry.at("coefficients");
        MlrCoefficients c;
        c.intercept_w = co.at("intercept_w").get<double>();
        c.beta_cpu = co.at("beta_cpu").get<double>();
        c.beta_mem = co.at("beta_mem").get<double>();
        return make_linear_cpu_mem_model(c);
    }
    if (kind != "LC_MLR") {
        throw ConfigError("catalog: power model '" + id + "' has unknown kind '" + kind + "'");
    }
    if (!entry.contains("calibration_csv")) {
        throw ConfigError("catalog: LC_MLR power model '" + id + "' needs calibration_csv");
    }
    fs::path csv = entry.at("calibration_csv").get<std::string>();
    if (csv.is_relative()) csv = base_dir / csv;
    std::vector<CalibrationSample> samples;
    try {
        samples = load_calibration_csv(csv.string());
    } catch (const CalibrationError& e) {
        throw ConfigError("catalog: power model '" + id + "': " + e.what());
    }
    if (coarse_variant) {
        return make_linear_cpu_mem_model(fit_linear_cpu_mem(samples));
    }
    if (entry.contains("coefficients")) {
        const json& co = entry.at("coefficients");
        MlrCoefficients c;
        c.intercept_w = co.at("intercept_w").get<double>();
        c.beta_cpu = co.at("beta_cpu").get<double>();
        c.beta_mem = co.at("beta_mem").get<double>();
        c.beta_disk = co.at("beta_disk").get<double>();
        c.beta_net = co.at("beta_net").get<double>();
        return make_lcmlr_model(c, samples);
    }
    return make_lcmlr_model(samples);
}

} // namespace

Catalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open catalog: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("catalog " + path + ": " + e.what());
    }

    Catalog cat;
    fs::path base_dir = fs::path(path).parent_path();
    try {
        const json& models = doc.at("power_models");
        for (auto it = models.begin(); it != models.end(); ++it) {
            cat.meter_models[it.key()] = load_power_model(it.value(), base_dir, it.key(), false);
            cat.lm_models[it.key()] = load_power_model(it.value(), base_dir, it.key(), true);
        }

        const json& host_rows = doc.at("hosts");
        if (!host_rows.is_array() || host_rows.empty()) {
            throw ConfigError("catalog: hosts must be a non-empty array");
        }
        auto host_counts = expand_counts(host_rows, doc, "host_total", "hosts");
        std::size_t host_sum = 0;
        for (std::size_t c : host_counts) host_sum += c;
        std::size_t host_width = id_width(host_sum, 3);
        emit_round_robin(host_counts, [&](std::size_t row, std::size_t index) {
            HostSpec h;
            h.id = zero_padded("host-", index, host_width);
            h.label = host_rows[row].at("type_label").get<std::string>();
            h.power_model_id = host_rows[row].at("power_model_id").get<std::string>();
            if (!cat.meter_models.count(h.power_model_id)) {
                throw ConfigError("catalog: host type '" + h.label +
                                  "' references unknown power_model_id '" + h.power_model_id +
                                  "'");
            }
            cat.hosts.push_back(std::move(h));
        });

        const json& vm_rows = doc.at("vms");
        if (!vm_rows.is_array() || vm_rows.empty()) {
            throw ConfigError("catalog: vms must be a non-empty array");
        }
        for (const auto& row : vm_rows) {
            if (row.contains("host_binding_policy") &&
                row.at("host_binding_policy").get<std::string>() != "round_robin") {
                throw ConfigError("catalog: unsupported host_binding_policy (only round_robin)");
            }
        }
        auto vm_counts = expand_counts(vm_rows, doc, "vm_total", "vms");
        std::size_t vm_sum = 0;
        for (std::size_t c : vm_counts) vm_sum += c;
        std::size_t vm_width = id_width(vm_sum, 3);
        emit_round_robin(vm_counts, [&](std::size_t row, std::size_t index) {
            VmSpec v;
            v.id = zero_padded("vm-", index, vm_width);
            v.mips = vm_rows[row].at("mips").get<double>();
            v.ram_mb = vm_rows[row].at("ram_mb").get<double>();
            if (v.mips <= 0.0 || v.ram_mb <= 0.0) {
                throw ConfigError("catalog: vm type '" +
                                  vm_rows[row].at("type_label").get<std::string>() +
                                  "' needs positive mips and ram_mb");
            }
            v.host_id = cat.hosts[index % cat.hosts.size()].id;
            cat.vms.push_back(std::move(v));
        });
    } catch (const json::exception& e) {
        throw ConfigError("catalog " + path + ": " + e.what());
    }
    return cat;
}

} // namespace easched
