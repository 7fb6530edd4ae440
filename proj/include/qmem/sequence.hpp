#pragma once

#include <vector>

#include "qmem/array.hpp"
#include "qmem/states.hpp"

namespace qmem {

enum class ExperimentKind { Path, TimeBin, DualTimeBin };

// A projective analysis setting. Path qubits and the early/late poles of
// time-bin qubits are analyzed against a state; the superposition bases of a
// time-bin qubit are analyzed interferometrically by the relative phase
// between the two readout half-pulses.
struct MeasSetting {
    bool is_phase = false;
    QubitState state{};       // used when !is_phase
    double phase_rad = 0.0;   // used when is_phase

    static MeasSetting projector(const QubitState& s) {
        MeasSetting m;
        m.state = s;
        return m;
    }
    static MeasSetting phase(double rad) {
        MeasSetting m;
        m.is_phase = true;
        m.phase_rad = rad;
        return m;
    }
};

// Interferometric phase equivalent to projecting a time-bin qubit onto one
// of the four equatorial cardinal states (X -> 0, -X -> pi, Y -> pi/2,
// -Y -> -pi/2). Poles are not phase settings: UsageError.
double equatorial_phase(StateName name);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Path;
    int cell_a = 5;           // pair partner / single time-bin cell
    int cell_b = 6;           // second cell of the pair (unused for TimeBin)
    QubitState prepared{};    // prepared qubit (ignored for DualTimeBin)
    MeasSetting measurement{};
    double nbar = 1.10;       // mean photon number of the weak coherent input
    double spin_storage_us = 8.0; // hold between write and read control pulses
};

enum class PeakLabel { Single, Early, Central, Late };

struct TimelinePeak {
    double center_ns = 0.0;
    double mean_photons = 0.0; // detected mean per trial integrated over the peak
    PeakLabel label = PeakLabel::Single;
};

// Expected detection-time density for one trial of a sequence: a set of
// echo peaks sharing one pulse shape, over a flat noise floor.
struct ExpectedTimeline {
    std::vector<TimelinePeak> peaks;
    PulseProfile profile;           // evaluated with center_ns moved per peak
    double noise_rate_per_ns = 0.0;
    double span_start_ns = 0.0;
    double span_end_ns = 0.0;
    double analysis_center_ns = 0.0; // default analysis window position
    double total_storage_us = 0.0;   // echo delay + spin hold

    // Mean detected counts per trial inside a window of width t_window_ns
    // centered at center_ns (signal from all peaks plus noise).
    double expected_in_window(double t_window_ns, double center_ns) const;
    double total_signal() const; // sum of peak means
    const TimelinePeak& peak(PeakLabel label) const; // throws UsageError if absent
};

// Path-encoded qubit across a cell pair: write and read control pulses in
// both cells, demultiplexer projects onto the analysis state at readout.
ExpectedTimeline run_path_sequence(const ExperimentSpec& spec, const ArrayConfig& array);

// Time-bin qubit in one cell. Projector settings on the poles use a full
// readout pulse (early and late echoes both present); phase settings use two
// half-pulses giving early/central/late peaks with the interference in the
// central one.
ExpectedTimeline run_timebin_sequence(const ExperimentSpec& spec, const ArrayConfig& array);

// Two single-mode qubits written to the two cells of a pair (the second
// write pulse carries phase dphi) and read collectively; the merged outputs
// interfere in the central peak.
ExpectedTimeline run_dual_sequence(const ExperimentSpec& spec, const ArrayConfig& array,
                                   double dphi);

} // namespace qmem
