#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "somlab/som_engine.hpp"

namespace somlab {

// Plain-text key=value configuration with [section] headers and # comments.
// Every key must be consumed by the experiment that runs the file; leftovers
// are rejected, so typos cannot silently change a run.
class ConfigFile {
  public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_real(const std::string& section, const std::string& key) const;
    double get_real(const std::string& section, const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key) const;
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;
    std::vector<double> get_real_list(const std::string& section, const std::string& key) const;
    std::vector<std::int64_t> get_int_list(const std::string& section,
                                           const std::string& key) const;

    // Throws ConfigError naming every key no experiment consumed.
    void require_all_consumed() const;

    // Canonical text for the report echo: sorted sections and keys.
    std::string echo() const;

  private:
    std::string raw(const std::string& section, const std::string& key) const;
    std::map<std::string, std::map<std::string, std::string>> data_;
    mutable std::set<std::string> consumed_;
};

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    std::string out_dir = "out";
    bool dry_run = false;
    int workers = 0;  // 0: SOMLAB_WORKERS env or hardware count
};

extern const std::vector<std::string> kExperimentKinds;

// Dispatch one named experiment: validates the whole config, runs, writes
// the CSV reports, config echo and human-readable summary under out_dir.
void run_experiment(const std::string& kind, ConfigFile& config, const RunOptions& options);

// Config-driven builders shared by the experiments (also used by tests).
LatticeSpec parse_lattice(const ConfigFile& cfg);
NeighborhoodFunction parse_neighborhood(const ConfigFile& cfg);
StimuliDistribution parse_stimuli(const ConfigFile& cfg);
GainSchedule parse_schedule(const ConfigFile& cfg);

// Named density families available from config files.
StimuliDistribution make_named_density(const std::string& name);

}  // namespace somlab
