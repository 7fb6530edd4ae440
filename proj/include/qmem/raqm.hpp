#pragma once

#include <string>
#include <vector>

#include "qmem/sequence.hpp"

namespace qmem {

// One random-access command against the multiplexed array.
struct RaqmCommand {
    enum class Op { Write, Read, CollectiveRead };
    Op op = Op::Write;
    int cell = 0;
    int cell_b = 0;                       // collective_read partner
    StateName state = StateName::PlusX;   // write payload
    StateName basis = StateName::PlusX;   // read analysis setting
    double phase_rad = 0.0;               // collective_read write-phase offset
};

// Parse "write <cell> <state>", "read <cell> <basis>" or
// "collective_read <cell> <cell> [phase_rad]".
RaqmCommand parse_raqm_command(const std::string& text);

// A readout the schedule compiled into an executable sequence.
struct ScheduledReadout {
    ExperimentSpec spec;
    double dphi = 0.0;       // collective readout phase
    double t_write_us = 0.0; // later write for collective reads
    double t_read_us = 0.0;
};

struct RaqmPlan {
    std::vector<ScheduledReadout> readouts;
    double makespan_us = 0.0;
    std::string plan_json; // absolute-time op list, times in us
};

// Compile a command list into per-readout sequence specs on a shared clock.
// Writes park a qubit in the cell's spin state; reads retrieve it no earlier
// than the minimum hold and must beat the spin lifetime. Reading an empty
// cell or double-writing a cell is a ScheduleError.
RaqmPlan raqm_schedule(const std::vector<RaqmCommand>& commands, const ArrayConfig& array,
                       double nbar = 0.94);

} // namespace qmem
