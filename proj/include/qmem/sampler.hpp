#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qmem/sequence.hpp"

namespace qmem {

// Histogram of detection times accumulated over many trials.
struct TrialHistogram {
    double bin_width_ns = 10.0;
    double span_start_ns = 0.0;
    std::uint64_t n_trials = 0;
    std::vector<std::uint64_t> counts;
    // Free-form provenance written/read as "# key=value" lines; order is
    // preserved so files round-trip byte-identically.
    std::vector<std::pair<std::string, std::string>> metadata;

    double bin_start(std::size_t i) const {
        return span_start_ns + static_cast<double>(i) * bin_width_ns;
    }
    double bin_center(std::size_t i) const { return bin_start(i) + 0.5 * bin_width_ns; }
    double span_end_ns() const {
        return span_start_ns + static_cast<double>(counts.size()) * bin_width_ns;
    }
    std::uint64_t total() const;
    void set_meta(const std::string& key, const std::string& value);
    const std::string* find_meta(const std::string& key) const;
};

// Accumulate n_trials of the expected timeline into a histogram. Counts in
// each bin are Poisson with mean n_trials * (per-trial mean in that bin),
// which is exact for independent trials of a Poissonian source. The stream
// id decorrelates histograms drawn from the same master seed.
TrialHistogram sample_trials(const ExpectedTimeline& timeline, std::uint64_t n_trials,
                             std::uint64_t master_seed, std::uint64_t stream_id,
                             double bin_width_ns = 10.0);

// Detection timestamps of a single trial (signal clicks drawn per peak,
// noise clicks uniform over the span); mainly for event-level inspection.
std::vector<double> sample_clicks(const ExpectedTimeline& timeline,
                                  std::uint64_t master_seed, std::uint64_t trial_id);

struct WindowCounts {
    std::uint64_t counts = 0;
    double c_s = 0.0; // counts per trial
};

// Total counts in a window of width t_window_ns centered at center_ns. Bins
// are attributed by their centers, so an aligned window (edges on bin
// boundaries) sums exactly the bins it covers. The window must lie within
// the histogram span.
WindowCounts windowed_counts(const TrialHistogram& h, double t_window_ns,
                             double center_ns);

// Sum two histograms of identical binning; trials add. Metadata is taken
// from the first operand except n_trials.
TrialHistogram merge_histograms(const TrialHistogram& a, const TrialHistogram& b);

void write_histogram_csv(const TrialHistogram& h, const std::string& path);
TrialHistogram read_histogram_csv(const std::string& path);

} // namespace qmem
