#include "qmem/array.hpp"

#include <cmath>
#include <string>

#include "qmem/errors.hpp"

namespace qmem {

const CellParams& ArrayConfig::cell(int cell_id) const {
    if (cell_id < 1 || cell_id > n_cells())
        throw UsageError("cell index " + std::to_string(cell_id) +
                         " outside 1.." + std::to_string(n_cells()));
    return cells[static_cast<std::size_t>(cell_id - 1)];
}

PulseProfile ArrayConfig::output_profile(double center_ns) const {
    PulseProfile p;
    p.shape = output_shape;
    p.fwhm_ns = output_broadening_ns;
    p.center_ns = center_ns;
    p.support_halfspan_ns = acquisition_halfspan_ns;
    return p;
}

void ArrayConfig::validate() const {
    if (cells.size() < 2)
        throw ConfigError("array needs at least two cells");
    for (const auto& c : cells) {
        auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
        if (!in_unit(c.eta_afc) || !in_unit(c.eta_cp) || !in_unit(c.eta_demux))
            throw ConfigError("cell " + std::to_string(c.cell_id) +
                              ": efficiencies must lie in (0, 1]");
        if (c.noise_rate_per_ns < 0.0)
            throw ConfigError("cell " + std::to_string(c.cell_id) +
                              ": noise rate must be non-negative");
        double sw = spin_wave_efficiency(c);
        if (sw < spin_wave_band_lo || sw > spin_wave_band_hi)
            throw ConfigError("cell " + std::to_string(c.cell_id) +
                              ": spin-wave efficiency " + std::to_string(sw) +
                              " outside plausible band [" +
                              std::to_string(spin_wave_band_lo) + ", " +
                              std::to_string(spin_wave_band_hi) + "]");
    }
    if (!(eta_detection > 0.0 && eta_detection <= 1.0))
        throw ConfigError("eta_detection must lie in (0, 1]");
    if (output_broadening_ns < pulse_fwhm_in_ns)
        throw ConfigError("detected-pulse FWHM cannot be narrower than the input pulse");
    if (acquisition_halfspan_ns <= 0.0)
        throw ConfigError("acquisition halfspan must be positive");
    if (afc_delay_us <= 0.0 || cp_duration_us <= 0.0 || timebin_separation_us <= 0.0)
        throw ConfigError("timing parameters must be positive");
    if (min_spin_hold_us < 0.0 || spin_lifetime_us <= min_spin_hold_us)
        throw ConfigError("spin lifetime must exceed the minimum hold");
    if (1e3 * timebin_separation_us < 2.0 * acquisition_halfspan_ns)
        throw ConfigError("time-bin separation must clear the acquisition gate");
}

std::pair<int, int> pair_cells(int pair_index, int n_cells) {
    int n_pairs = n_cells / 2;
    if (pair_index < 1 || pair_index > n_pairs)
        throw UsageError("pair index " + std::to_string(pair_index) +
                         " outside 1.." + std::to_string(n_pairs));
    return {2 * pair_index - 1, 2 * pair_index};
}

namespace {

// Relative detected efficiency per cell, mirror symmetric, normalized to the
// center pair. Pair means are {0.2174, 0.65, 1.0, 0.65, 0.2174}: a 4.6x
// center-to-edge ratio. Off-center pairs are split 1.15:1 in favor of the
// inner cell.
constexpr double kRelEff[10] = {
    0.20223256, 0.23256744, 0.60465116, 0.69534884, 1.0,
    1.0,        0.69534884, 0.60465116, 0.23256744, 0.20223256,
};

// Exponent splitting the relative efficiency between the spin-wave part
// (dominant: comb quality degrades off-center) and demux coupling, anchored
// so edge cells land at 1.7% spin-wave efficiency when the center is 6.7%.
constexpr double kSpinWaveShare = 0.8580672;

} // namespace

ArrayConfig default_array(ArrayProfile profile) {
    ArrayConfig cfg;
    cfg.cells.resize(10);
    for (int i = 0; i < 10; ++i) {
        CellParams& c = cfg.cells[static_cast<std::size_t>(i)];
        c.cell_id = i + 1;
        c.eta_cp = 0.8;
        c.noise_rate_per_ns = 6.46e-8;
        if (profile == ArrayProfile::Flat) {
            c.eta_afc = 0.0625; // spin-wave efficiency 0.04
            c.eta_demux = 0.4;
        } else {
            double rel = kRelEff[i];
            // eta_afc * eta_cp^2 spans 0.017 (edge) .. 0.067 (center)
            c.eta_afc = 0.067 / 0.64 * std::pow(rel, kSpinWaveShare);
            c.eta_demux = 0.4 * std::pow(rel, 1.0 - kSpinWaveShare);
        }
    }
    cfg.output_broadening_ns = calibrate_broadening(
        {{270.0, 0.42}, {865.0, 0.87}}, cfg.output_shape, cfg.acquisition_halfspan_ns);
    cfg.validate();
    return cfg;
}

} // namespace qmem
