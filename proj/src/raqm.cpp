#include "qmem/raqm.hpp"

#include <charconv>
#include <json.hpp>
#include <map>
#include <sstream>

#include "qmem/errors.hpp"

namespace qmem {

namespace {

int parse_cell(const std::string& tok) {
    int v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw UsageError("malformed cell index '" + tok + "'");
    return v;
}

bool is_pole(StateName s) {
    return s == StateName::Zero || s == StateName::One;
}

} // namespace

RaqmCommand parse_raqm_command(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> tok;
    std::string t;
    while (in >> t) tok.push_back(t);
    if (tok.empty())
        throw UsageError("empty command");

    RaqmCommand cmd;
    if (tok[0] == "write" || tok[0] == "read") {
        if (tok.size() != 3)
            throw UsageError("'" + tok[0] + "' takes a cell and a state: " + text);
        cmd.op = tok[0] == "write" ? RaqmCommand::Op::Write : RaqmCommand::Op::Read;
        cmd.cell = parse_cell(tok[1]);
        if (cmd.op == RaqmCommand::Op::Write)
            cmd.state = state_name_from_string(tok[2]);
        else
            cmd.basis = state_name_from_string(tok[2]);
        return cmd;
    }
    if (tok[0] == "collective_read") {
        if (tok.size() != 3 && tok.size() != 4)
            throw UsageError("'collective_read' takes two cells and an optional "
                             "phase: " + text);
        cmd.op = RaqmCommand::Op::CollectiveRead;
        cmd.cell = parse_cell(tok[1]);
        cmd.cell_b = parse_cell(tok[2]);
        if (tok.size() == 4) {
            double ph = 0.0;
            auto res = std::from_chars(tok[3].data(), tok[3].data() + tok[3].size(), ph);
            if (res.ec != std::errc() || res.ptr != tok[3].data() + tok[3].size())
                throw UsageError("malformed phase '" + tok[3] + "'");
            cmd.phase_rad = ph;
        }
        return cmd;
    }
    throw UsageError("unknown command '" + tok[0] +
                     "' (expected write, read or collective_read)");
}

RaqmPlan raqm_schedule(const std::vector<RaqmCommand>& commands, const ArrayConfig& array,
                       double nbar) {
    if (commands.empty())
        throw UsageError("schedule needs at least one command");

    struct Stored {
        double t_write_us = 0.0;
        StateName state = StateName::PlusX;
    };
    std::map<int, Stored> held;

    // Every operation occupies one slot of the shared input/control channel:
    // the qubit bins plus one control pulse.
    const double slot_us = array.timebin_separation_us + array.cp_duration_us;
    double clock = 0.0;

    RaqmPlan plan;
    nlohmann::json ops = nlohmann::json::array();

    auto check_cell = [&](int cell) {
        if (cell < 1 || cell > array.n_cells())
            throw ScheduleError("cell " + std::to_string(cell) + " outside 1.." +
                                std::to_string(array.n_cells()));
    };
    auto check_lifetime = [&](double hold) {
        if (hold > array.spin_lifetime_us)
            throw ScheduleError("spin hold of " + std::to_string(hold) +
                                " us exceeds the lifetime " +
                                std::to_string(array.spin_lifetime_us) + " us");
    };

    for (const auto& cmd : commands) {
        switch (cmd.op) {
        case RaqmCommand::Op::Write: {
            check_cell(cmd.cell);
            if (held.count(cmd.cell))
                throw ScheduleError("cell " + std::to_string(cmd.cell) +
                                    " already holds a stored qubit");
            held[cmd.cell] = {clock, cmd.state};
            ops.push_back({{"op", "write"},
                           {"cell", cmd.cell},
                           {"state", to_string(cmd.state)},
                           {"t_us", clock}});
            clock += slot_us;
            break;
        }
        case RaqmCommand::Op::Read: {
            check_cell(cmd.cell);
            auto it = held.find(cmd.cell);
            if (it == held.end())
                throw ScheduleError("read of cell " + std::to_string(cmd.cell) +
                                    " which holds no qubit");
            double t_read = std::max(clock, it->second.t_write_us + array.min_spin_hold_us);
            double hold = t_read - it->second.t_write_us;
            check_lifetime(hold);

            ScheduledReadout r;
            r.spec.kind = ExperimentKind::TimeBin;
            r.spec.cell_a = cmd.cell;
            r.spec.cell_b = cmd.cell;
            r.spec.nbar = nbar;
            r.spec.spin_storage_us = hold;
            r.spec.prepared = canonical_state(it->second.state, BasisLabel::TimeBin);
            if (is_pole(cmd.basis))
                r.spec.measurement = MeasSetting::projector(
                    canonical_state(cmd.basis, BasisLabel::TimeBin));
            else
                r.spec.measurement = MeasSetting::phase(equatorial_phase(cmd.basis));
            r.t_write_us = it->second.t_write_us;
            r.t_read_us = t_read;
            plan.readouts.push_back(r);

            ops.push_back({{"op", "read"},
                           {"cell", cmd.cell},
                           {"basis", to_string(cmd.basis)},
                           {"t_us", t_read},
                           {"hold_us", hold},
                           {"total_storage_us", array.afc_delay_us + hold}});
            held.erase(it);
            clock = t_read + slot_us;
            break;
        }
        case RaqmCommand::Op::CollectiveRead: {
            check_cell(cmd.cell);
            check_cell(cmd.cell_b);
            if (cmd.cell == cmd.cell_b)
                throw ScheduleError("collective read needs two distinct cells");
            auto ia = held.find(cmd.cell);
            auto ib = held.find(cmd.cell_b);
            if (ia == held.end() || ib == held.end())
                throw ScheduleError("collective read of cells " +
                                    std::to_string(cmd.cell) + "," +
                                    std::to_string(cmd.cell_b) +
                                    " requires both to hold qubits");
            double later = std::max(ia->second.t_write_us, ib->second.t_write_us);
            double t_read = std::max(clock, later + array.min_spin_hold_us);
            check_lifetime(t_read - ia->second.t_write_us);
            check_lifetime(t_read - ib->second.t_write_us);

            ScheduledReadout r;
            r.spec.kind = ExperimentKind::DualTimeBin;
            r.spec.cell_a = cmd.cell;
            r.spec.cell_b = cmd.cell_b;
            r.spec.nbar = nbar;
            r.spec.spin_storage_us = t_read - later;
            r.dphi = cmd.phase_rad;
            r.t_write_us = later;
            r.t_read_us = t_read;
            plan.readouts.push_back(r);

            ops.push_back({{"op", "collective_read"},
                           {"cell", cmd.cell},
                           {"cell_b", cmd.cell_b},
                           {"phase_rad", cmd.phase_rad},
                           {"t_us", t_read},
                           {"total_storage_us",
                            array.afc_delay_us + (t_read - later)}});
            held.erase(ia);
            held.erase(cmd.cell_b);
            clock = t_read + slot_us;
            break;
        }
        }
    }

    plan.makespan_us = clock;
    nlohmann::json j;
    j["schema"] = "qmem-plan-1";
    j["ops"] = ops;
    j["makespan_us"] = plan.makespan_us;
    plan.plan_json = j.dump(2);
    return plan;
}

} // namespace qmem
