// SPDX-License-Identifier: Apache-2.0

#include "hypersindy/trajectory_io.hpp"

#include "hypersindy/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace hypersindy {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const int n = traj.dim;
    os << 't';
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    if (traj.has_derivatives()) {
        for (int i = 1; i <= n; ++i) os << ",dx" << i;
    }
    os << '\n';
    const std::size_t rows = traj.rows();
    for (std::size_t r = 0; r < rows; ++r) {
        os << format_double(static_cast<double>(r) * traj.dt);
        for (int i = 0; i < n; ++i) {
            os << ',' << format_double(traj.states[r * static_cast<std::size_t>(n) + i]);
        }
        if (traj.has_derivatives()) {
            for (int i = 0; i < n; ++i) {
                os << ',' << format_double(traj.derivatives[r * static_cast<std::size_t>(n) + i]);
            }
        }
        os << '\n';
    }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_trajectory_csv(os, traj);
    if (!os) throw IoError("write failed: " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) fields.push_back(field);
    return fields;
}

} // namespace

Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("trajectory csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "t") {
        throw IoError("trajectory csv: header must start with 't'");
    }
    int n = 0;
    while (1 + n < static_cast<int>(header.size()) &&
           header[static_cast<std::size_t>(1 + n)] == "x" + std::to_string(n + 1)) {
        ++n;
    }
    if (n == 0) throw IoError("trajectory csv: no state columns found");
    bool has_deriv = false;
    if (static_cast<int>(header.size()) == 1 + 2 * n) {
        has_deriv = true;
        for (int i = 0; i < n; ++i) {
            if (header[static_cast<std::size_t>(1 + n + i)] != "dx" + std::to_string(i + 1)) {
                throw IoError("trajectory csv: malformed derivative columns");
            }
        }
    } else if (static_cast<int>(header.size()) != 1 + n) {
        throw IoError("trajectory csv: unexpected column count");
    }

    Trajectory traj;
    traj.dim = n;
    std::vector<double> times;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != 1 + (has_deriv ? 2 * n : n)) {
            throw IoError("trajectory csv: row has wrong number of fields");
        }
        std::size_t pos = 0;
        times.push_back(std::stod(fields[0], &pos));
        for (int i = 0; i < n; ++i) {
            traj.states.push_back(std::stod(fields[static_cast<std::size_t>(1 + i)]));
        }
        if (has_deriv) {
            for (int i = 0; i < n; ++i) {
                traj.derivatives.push_back(std::stod(fields[static_cast<std::size_t>(1 + n + i)]));
            }
        }
    }
    if (times.size() < 2) throw IoError("trajectory csv: need at least 2 rows");
    traj.dt = times[1] - times[0];
    if (traj.dt <= 0.0) throw IoError("trajectory csv: non-increasing time column");
    return traj;
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    return read_trajectory_csv(is);
}

} // namespace hypersindy
