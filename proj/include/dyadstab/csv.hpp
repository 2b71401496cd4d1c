// CSV emission/parsing for the column contracts used across the tool, plus
// atomic file writes (temp file + rename) so partially written outputs are
// never observed.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadstab/dde.hpp"
#include "dyadstab/experiment.hpp"
#include "dyadstab/frequency.hpp"
#include "dyadstab/sysident.hpp"

namespace dyadstab {

/// Fixed shortest-roundtrip-ish formatting so repeated runs emit identical
/// bytes.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

/// omega, re, im, mag_db, phase_deg
inline std::string frequency_sweep_csv(const std::vector<FrequencyResponse>& sweep) {
    std::ostringstream out;
    out << "omega,re,im,mag_db,phase_deg\n";
    for (const auto& p : sweep) {
        out << format_double(p.omega) << ',' << format_double(p.value.real()) << ','
            << format_double(p.value.imag()) << ',' << format_double(p.magnitude_db) << ','
            << format_double(p.phase_deg) << '\n';
    }
    return out.str();
}

/// t, x1_<axis>..., x2_<axis>... in axis order.
inline std::string step_response_csv(const StepResponse& response) {
    std::ostringstream out;
    out << "t";
    for (const auto& [axis, series] : response.axes) {
        (void)series;
        out << ",x1_" << axis;
    }
    for (const auto& [axis, series] : response.axes) {
        (void)series;
        out << ",x2_" << axis;
    }
    out << '\n';
    for (std::size_t i = 0; i < response.times.size(); ++i) {
        out << format_double(response.times[i]);
        for (const auto& [axis, series] : response.axes) {
            (void)axis;
            out << ',' << format_double(series.x1[i]);
        }
        for (const auto& [axis, series] : response.axes) {
            (void)axis;
            out << ',' << format_double(series.x2[i]);
        }
        out << '\n';
    }
    return out.str();
}

/// t, x, v, a, f
inline std::string trajectory_record_csv(const TrajectoryRecord& record) {
    std::ostringstream out;
    out << "t,x,v,a,f\n";
    for (std::size_t i = 0; i < record.times.size(); ++i) {
        out << format_double(record.times[i]) << ',' << format_double(record.position[i]) << ','
            << format_double(record.velocity[i]) << ','
            << format_double(record.acceleration[i]) << ','
            << format_double(record.force.empty() ? 0.0 : record.force[i]) << '\n';
    }
    return out.str();
}

/// Parse the t,x,v,a,f contract. Errors carry the 1-based line number.
inline TrajectoryRecord parse_trajectory_csv(std::istream& in) {
    TrajectoryRecord record;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        if (line_number == 1) {
            if (line.rfind("t,", 0) != 0)
                throw std::runtime_error("line 1: expected header 't,x,v,a,f'");
            continue;
        }
        std::istringstream fields(line);
        double values[5];
        char comma = ',';
        for (int f = 0; f < 5; ++f) {
            if (!(fields >> values[f]))
                throw std::runtime_error("line " + std::to_string(line_number) +
                                         ": expected 5 numeric fields 't,x,v,a,f'");
            if (f < 4 && !(fields >> comma && comma == ','))
                throw std::runtime_error("line " + std::to_string(line_number) +
                                         ": expected comma-separated fields");
        }
        record.times.push_back(values[0]);
        record.position.push_back(values[1]);
        record.velocity.push_back(values[2]);
        record.acceleration.push_back(values[3]);
        record.force.push_back(values[4]);
    }
    record.validate();
    return record;
}

inline TrajectoryRecord load_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    return parse_trajectory_csv(in);
}

/// condition, stiffness_Nm, delay_ms, trial, te1_mm, te2_mm
inline std::string protocol_csv(const ProtocolResult& result) {
    std::ostringstream out;
    out << "condition,stiffness_Nm,delay_ms,trial,te1_mm,te2_mm\n";
    for (const auto& outcome : result.outcomes) {
        const bool connected = outcome.condition.mode == ExperimentMode::Connected;
        for (std::size_t t = 0; t < outcome.te1.size(); ++t) {
            out << outcome.condition.label << ','
                << format_double(connected ? outcome.condition.stiffness : 0.0) << ','
                << format_double(connected ? outcome.condition.delay * 1e3 : 0.0) << ','
                << t << ',' << format_double(outcome.te1[t] * 1e3) << ','
                << format_double(outcome.te2[t] * 1e3) << '\n';
        }
    }
    return out.str();
}

}  // namespace dyadstab
