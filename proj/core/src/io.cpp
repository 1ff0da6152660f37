#include "trunckern/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "trunckern/errors.hpp"

namespace trunckern {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_snapshots(const SpaceTimeField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("write_snapshots: cannot open '" + path + "'");
    const GridSpec& g = field.grid;
    out << "# trunckern snapshots\n";
    out << "# d = " << g.d << "\n";
    out << "# L = " << format_g17(g.L) << "\n";
    out << "# n = " << g.n << "\n";
    switch (g.extension.kind) {
        case Extension::Kind::Constant:
            out << "# extension = constant " << format_g17(g.extension.value) << "\n";
            break;
        case Extension::Kind::Periodic:
            out << "# extension = periodic\n";
            break;
        case Extension::Kind::Given:
            // exterior data is stored by its far constant; the full field is
            // not serialized
            out << "# extension = constant " << format_g17(g.extension.value) << "\n";
            break;
    }
    out << "# dt = " << format_g17(field.dt) << "\n";
    out << "# snapshots = " << field.times.size() << "\n";

    std::vector<double> p(static_cast<std::size_t>(g.d));
    for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
        const std::string t_str = format_g17(field.times[ti]);
        for (std::size_t f = 0; f < field.snapshots[ti].size(); ++f) {
            g.node_point(f, p);
            out << t_str;
            for (int k = 0; k < g.d; ++k) out << ", " << format_g17(p[static_cast<std::size_t>(k)]);
            out << ", " << format_g17(field.snapshots[ti][f]) << "\n";
        }
    }
    if (!out) throw config_error("write_snapshots: write failed for '" + path + "'");
}

SpaceTimeField read_snapshots(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("read_snapshots: cannot open '" + path + "'");

    SpaceTimeField field;
    GridSpec g;
    std::size_t snapshots = 0;
    std::string line;
    bool header_done = false;

    auto parse_header = [&](const std::string& l) {
        std::istringstream ss(l);
        std::string hash, key, eq;
        ss >> hash >> key >> eq;
        if (key == "d") ss >> g.d;
        else if (key == "L") ss >> g.L;
        else if (key == "n") ss >> g.n;
        else if (key == "dt") ss >> field.dt;
        else if (key == "snapshots") ss >> snapshots;
        else if (key == "extension") {
            std::string kind;
            ss >> kind;
            if (kind == "periodic") {
                g.extension = Extension::periodic();
            } else {
                double v = 0.0;
                ss >> v;
                g.extension = Extension::constant(v);
            }
        }
    };

    std::vector<double> values;
    std::vector<double> times;
    double current_t = 0.0;
    bool have_t = false;
    std::vector<std::vector<double>> snaps;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (!header_done) parse_header(line);
            continue;
        }
        header_done = true;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        if (row.size() != static_cast<std::size_t>(g.d) + 2)
            throw numerical_error("read_snapshots: malformed row in '" + path + "'");
        const double t = row.front();
        if (!have_t || t != current_t) {
            if (have_t) {
                snaps.push_back(std::move(values));
                values.clear();
            }
            times.push_back(t);
            current_t = t;
            have_t = true;
        }
        values.push_back(row.back());
    }
    if (have_t) snaps.push_back(std::move(values));
    if (snaps.size() != snapshots)
        throw numerical_error("read_snapshots: snapshot count mismatch in '" + path + "'");

    field.grid = g;
    field.times = std::move(times);
    field.snapshots = std::move(snaps);
    for (const auto& s : field.snapshots) {
        if (s.size() != g.node_count())
            throw numerical_error("read_snapshots: node count mismatch in '" + path + "'");
    }
    return field;
}

}  // namespace trunckern
