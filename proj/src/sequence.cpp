#include "qmem/sequence.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "qmem/errors.hpp"

namespace qmem {

using cd = std::complex<double>;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Detected efficiency of one cell's stored component: AFC echo, both control
// pulses, demultiplexing, and the common detection path. Efficiencies are
// taken at the operating storage time; the spin lifetime only limits how
// long a hold the schedule may request.
double cell_efficiency(const CellParams& c, const ArrayConfig& a) {
    return spin_wave_efficiency(c) * c.eta_demux * a.eta_detection;
}

void check_storage(const ExperimentSpec& spec, const ArrayConfig& array) {
    if (spec.nbar <= 0.0)
        throw UsageError("mean photon number must be positive");
    if (spec.spin_storage_us < array.min_spin_hold_us)
        throw UsageError("spin hold " + std::to_string(spec.spin_storage_us) +
                         " us below the minimum " +
                         std::to_string(array.min_spin_hold_us) + " us");
    if (spec.spin_storage_us > array.spin_lifetime_us)
        throw UsageError("spin hold " + std::to_string(spec.spin_storage_us) +
                         " us exceeds the spin lifetime " +
                         std::to_string(array.spin_lifetime_us) + " us");
}

ExpectedTimeline make_timeline(const ArrayConfig& array, const ExperimentSpec& spec,
                               int n_slots, double noise_rate) {
    ExpectedTimeline t;
    double h = array.acquisition_halfspan_ns;
    double slot = 1e3 * array.timebin_separation_us;
    t.profile = array.output_profile();
    t.noise_rate_per_ns = noise_rate;
    t.span_start_ns = 0.0;
    t.span_end_ns = 2.0 * h + static_cast<double>(n_slots - 1) * slot;
    t.total_storage_us = array.afc_delay_us + spec.spin_storage_us;
    return t;
}

double slot_center(const ArrayConfig& array, int slot_index) {
    return array.acquisition_halfspan_ns +
           static_cast<double>(slot_index) * 1e3 * array.timebin_separation_us;
}

} // namespace

double equatorial_phase(StateName name) {
    switch (name) {
    case StateName::PlusX:  return 0.0;
    case StateName::MinusX: return kPi;
    case StateName::PlusY:  return 0.5 * kPi;
    case StateName::MinusY: return -0.5 * kPi;
    default:
        throw UsageError(std::string("state ") + to_string(name) +
                         " is not an equatorial setting");
    }
}

double ExpectedTimeline::expected_in_window(double t_window_ns, double center_ns) const {
    if (t_window_ns < 0.0)
        throw UsageError("window width must be non-negative");
    double lo = center_ns - 0.5 * t_window_ns;
    double hi = center_ns + 0.5 * t_window_ns;
    double mean = noise_rate_per_ns * t_window_ns;
    for (const auto& p : peaks) {
        PulseProfile shifted = profile;
        shifted.center_ns = p.center_ns;
        mean += p.mean_photons * (profile_cdf(shifted, hi) - profile_cdf(shifted, lo));
    }
    return mean;
}

double ExpectedTimeline::total_signal() const {
    double s = 0.0;
    for (const auto& p : peaks) s += p.mean_photons;
    return s;
}

const TimelinePeak& ExpectedTimeline::peak(PeakLabel label) const {
    for (const auto& p : peaks)
        if (p.label == label) return p;
    throw UsageError("timeline has no peak with the requested label");
}

ExpectedTimeline run_path_sequence(const ExperimentSpec& spec, const ArrayConfig& array) {
    if (spec.kind != ExperimentKind::Path)
        throw UsageError("run_path_sequence requires a path experiment");
    check_storage(spec, array);
    if (spec.measurement.is_phase)
        throw UsageError("path readout uses projector settings, not phases");
    if (spec.prepared.basis != BasisLabel::Path ||
        spec.measurement.state.basis != BasisLabel::Path)
        throw UsageError("path experiment requires path-basis states");

    const CellParams& ca = array.cell(spec.cell_a);
    const CellParams& cb = array.cell(spec.cell_b);
    QubitState psi = normalized(spec.prepared);
    QubitState m = normalized(spec.measurement.state);

    // The demultiplexer recombines the two cell outputs with the analysis
    // amplitudes; per-cell losses act on the field before the merge.
    cd amp = std::conj(m.a0) * std::sqrt(cell_efficiency(ca, array)) * psi.a0 +
             std::conj(m.a1) * std::sqrt(cell_efficiency(cb, array)) * psi.a1;
    double mean = spec.nbar * std::norm(amp);

    double noise = 0.5 * (ca.noise_rate_per_ns + cb.noise_rate_per_ns);
    ExpectedTimeline t = make_timeline(array, spec, 1, noise);
    t.peaks.push_back({slot_center(array, 0), mean, PeakLabel::Single});
    t.analysis_center_ns = slot_center(array, 0);
    return t;
}

ExpectedTimeline run_timebin_sequence(const ExperimentSpec& spec, const ArrayConfig& array) {
    if (spec.kind != ExperimentKind::TimeBin)
        throw UsageError("run_timebin_sequence requires a time-bin experiment");
    check_storage(spec, array);
    if (spec.prepared.basis != BasisLabel::TimeBin)
        throw UsageError("time-bin experiment requires time-bin-basis states");

    const CellParams& c = array.cell(spec.cell_a);
    QubitState psi = normalized(spec.prepared);
    double eta = cell_efficiency(c, array);

    ExpectedTimeline t = make_timeline(array, spec, spec.measurement.is_phase ? 3 : 2,
                                       c.noise_rate_per_ns);

    if (!spec.measurement.is_phase) {
        // Full readout pulse: both bins echo in their own slots.
        if (spec.measurement.state.basis != BasisLabel::TimeBin)
            throw UsageError("time-bin experiment requires time-bin-basis states");
        QubitState m = normalized(spec.measurement.state);
        bool early;
        if (std::norm(m.a1) < 1e-12) early = true;
        else if (std::norm(m.a0) < 1e-12) early = false;
        else
            throw UsageError("time-bin projector settings must target the early or "
                             "late pole; use a phase setting for superpositions");
        t.peaks.push_back({slot_center(array, 0), spec.nbar * eta * std::norm(psi.a0),
                           PeakLabel::Early});
        t.peaks.push_back({slot_center(array, 1), spec.nbar * eta * std::norm(psi.a1),
                           PeakLabel::Late});
        t.analysis_center_ns = slot_center(array, early ? 0 : 1);
        return t;
    }

    // Two half-pulses separated by one bin: each bin splits into a direct and
    // a delayed echo (amplitude 1/2 per route). The overlap of the early
    // bin's delayed route with the late bin's direct route carries the
    // interference; the analysis phase dphi sits between the half-pulses.
    double dphi = spec.measurement.phase_rad;
    double early = 0.25 * std::norm(psi.a0);
    double late = 0.25 * std::norm(psi.a1);
    double central = 0.25 * std::norm(psi.a0 * cd(std::cos(dphi), std::sin(dphi)) + psi.a1);
    t.peaks.push_back({slot_center(array, 0), spec.nbar * eta * early, PeakLabel::Early});
    t.peaks.push_back({slot_center(array, 1), spec.nbar * eta * central, PeakLabel::Central});
    t.peaks.push_back({slot_center(array, 2), spec.nbar * eta * late, PeakLabel::Late});
    t.analysis_center_ns = slot_center(array, 1);
    return t;
}

ExpectedTimeline run_dual_sequence(const ExperimentSpec& spec, const ArrayConfig& array,
                                   double dphi) {
    if (spec.kind != ExperimentKind::DualTimeBin)
        throw UsageError("run_dual_sequence requires a dual readout experiment");
    check_storage(spec, array);

    const CellParams& ca = array.cell(spec.cell_a);
    const CellParams& cb = array.cell(spec.cell_b);
    double ea = cell_efficiency(ca, array);
    double eb = cell_efficiency(cb, array);

    // Collective readout: the deflector merges both cell outputs (1/sqrt(2)
    // per arm) with readout pulses staggered by one bin, so cell a's delayed
    // route overlaps cell b's direct route in the central slot. The phase of
    // the second write pulse shifts the interference.
    cd overlap = std::sqrt(ea) + std::sqrt(eb) * cd(std::cos(dphi), std::sin(dphi));
    double noise = 0.5 * (ca.noise_rate_per_ns + cb.noise_rate_per_ns);

    ExpectedTimeline t = make_timeline(array, spec, 3, noise);
    t.peaks.push_back({slot_center(array, 0), 0.25 * spec.nbar * eb, PeakLabel::Early});
    t.peaks.push_back({slot_center(array, 1), 0.25 * spec.nbar * std::norm(overlap),
                       PeakLabel::Central});
    t.peaks.push_back({slot_center(array, 2), 0.25 * spec.nbar * ea, PeakLabel::Late});
    t.analysis_center_ns = slot_center(array, 1);
    return t;
}

} // namespace qmem
