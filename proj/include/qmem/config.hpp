#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qmem/array.hpp"
#include "qmem/sequence.hpp"

namespace qmem {

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Path;
    double nbar = 1.10;
    double spin_storage_us = 8.0;
    std::vector<std::pair<int, int>> pairs; // path / dual groups
    std::vector<int> cells;                 // time-bin groups
    std::vector<StateName> states;          // prepared states (path / time-bin)
    int phase_points = 13;                  // dual phase grid, -pi .. 2*pi inclusive
    int repeats_per_cycle = 51;             // settings interleaved per cycle
};

struct SamplingConfig {
    std::uint64_t cycles = 13000;
    std::uint64_t seed = 20260816;
    double bin_width_ns = 10.0;
};

struct AnalysisConfig {
    std::vector<double> windows_ns = {200, 270, 340, 420, 560, 700, 865, 1000, 1250};
    double default_window_ns = 270.0;
    std::size_t n_mc = 1000;
    std::uint64_t mc_seed = 7;
    bool subtract_noise_baseline = false;
};

struct RunConfig {
    ArrayConfig array;
    ExperimentConfig experiment;
    SamplingConfig sampling;
    AnalysisConfig analysis;

    void validate() const; // throws ConfigError
};

// Defaults matching the reference ten-cell device and the run plans used in
// the measurements: path pairs at nbar 1.10 with 51 repeats per cycle,
// time-bin cells and dual readout at nbar 0.94 with 41 repeats.
RunConfig default_run_config(ExperimentKind kind);

// Parse a config file in the INI/TOML subset described in the README:
// [section] headers, key = value lines, strings, numbers, booleans and flat
// arrays, # comments. Unknown keys are rejected by name. experiment.kind is
// mandatory; everything else falls back to the kind's defaults.
RunConfig parse_config(const std::string& text, const std::string& origin);
RunConfig load_config(const std::string& path);

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

} // namespace qmem
