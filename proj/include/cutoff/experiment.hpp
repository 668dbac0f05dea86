#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cutoff/analytics.hpp"
#include "cutoff/dynamics.hpp"
#include "cutoff/model.hpp"
#include "cutoff/support.hpp"

namespace cutoff {

// Flat key = value configuration with [section] headers; the same content is
// accepted as a JSON object of sections. Keys are stored section-qualified
// ("model.beta").
class ExperimentSpec {
  public:
    std::map<std::string, std::string> kv;

    static ExperimentSpec parse(const std::string& text);
    static ExperimentSpec load(const std::string& path);

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback = "") const;
    std::string require(const std::string& key) const;
    double get_num(const std::string& key, double fallback) const;
    double require_num(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    uint64_t require_seed() const;

    void set(const std::string& key, const std::string& value);
    std::string canonical_text() const;  // sorted key = value lines
    uint64_t hash() const;               // FNV-1a of the canonical text

    GraphPtr build_graph_spec(int q) const;
    SpinModel build_model() const;
    std::vector<double> time_grid() const;
};

struct RunResult {
    int failures = 0;                 // verify task: failed checks
    std::string summary_json;         // machine-readable result
    std::vector<std::string> outputs;  // files written (relative to out dir)
};

// Task dispatch; artifacts land in out_dir (created if missing).
RunResult run_experiment(const ExperimentSpec& spec, const std::string& task,
                         const std::string& out_dir);

std::string tool_version();

}  // namespace cutoff
