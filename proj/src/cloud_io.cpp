#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "surfpde/errors.hpp"
#include "surfpde/io.hpp"

namespace surfpde {
namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::parse, "cannot open '" + path + "' for writing");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::parse, "cannot open '" + path + "'");
    return in;
}

[[noreturn]] void parse_error(const std::string& source, int line, const std::string& what) {
    fail(ErrorKind::parse, source + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& text, const std::string& source, int line) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    while (first < last && *first == ' ') ++first;
    if (first < last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) parse_error(source, line, "malformed number '" + text + "'");
    return v;
}

long parse_index(const std::string& text, const std::string& source, int line) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        parse_error(source, line, "malformed integer '" + text + "'");
    }
    return v;
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void write_point_cloud(std::ostream& out, const PointCloud& cloud) {
    static const char* const axes[] = {"x", "y", "z"};
    const int d = cloud.dim();
    for (int k = 0; k < d; ++k) out << (k ? "," : "") << axes[k];
    if (cloud.has_normals()) {
        for (int k = 0; k < d; ++k) out << ",n" << axes[k];
    }
    out << '\n';
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        for (int k = 0; k < d; ++k) out << (k ? "," : "") << format_double(cloud.nodes()(i, k));
        if (cloud.has_normals()) {
            for (int k = 0; k < d; ++k) out << ',' << format_double(cloud.normals()(i, k));
        }
        out << '\n';
    }
}

void write_point_cloud(const std::string& path, const PointCloud& cloud) {
    auto out = open_out(path);
    write_point_cloud(out, cloud);
}

PointCloud read_point_cloud(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) parse_error(source, 1, "empty point-cloud file");
    line = strip(line);
    int d = 0;
    bool normals = false;
    if (line == "x,y") {
        d = 2;
    } else if (line == "x,y,z") {
        d = 3;
    } else if (line == "x,y,nx,ny") {
        d = 2;
        normals = true;
    } else if (line == "x,y,z,nx,ny,nz") {
        d = 3;
        normals = true;
    } else {
        parse_error(source, 1, "unexpected header '" + line + "'");
    }
    const int width = normals ? 2 * d : d;
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(line);
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != width) {
            parse_error(source, lineno, "expected " + std::to_string(width) + " fields, got " +
                                            std::to_string(fields.size()));
        }
        std::vector<double> row;
        for (const auto& f : fields) row.push_back(parse_double(f, source, lineno));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) parse_error(source, lineno, "point-cloud file has no nodes");
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix nodes(n, d), nrm(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) {
            nodes(i, k) = rows[static_cast<size_t>(i)][static_cast<size_t>(k)];
            if (normals) nrm(i, k) = rows[static_cast<size_t>(i)][static_cast<size_t>(d + k)];
        }
    }
    PointCloud cloud(std::move(nodes));
    return normals ? cloud.with_normals(nrm) : cloud;
}

PointCloud read_point_cloud(const std::string& path) {
    auto in = open_in(path);
    return read_point_cloud(in, path);
}

void write_snapshots(std::ostream& out, const Snapshots& snaps) {
    out << "t,node_index,u,f\n";
    for (Eigen::Index j = 0; j < snaps.times.size(); ++j) {
        for (Eigen::Index i = 0; i < snaps.values.cols(); ++i) {
            out << format_double(snaps.times[j]) << ',' << i << ',' << format_double(snaps.values(j, i)) << ','
                << format_double(snaps.forcing(j, i)) << '\n';
        }
    }
}

void write_snapshots(const std::string& path, const Snapshots& snaps) {
    auto out = open_out(path);
    write_snapshots(out, snaps);
}

Snapshots read_snapshots(std::istream& in, Eigen::Index n_nodes, const std::string& source) {
    std::string line;
    if (!std::getline(in, line) || strip(line) != "t,node_index,u,f") {
        parse_error(source, 1, "expected header 't,node_index,u,f'");
    }
    std::vector<double> times;
    std::map<double, size_t> level_of;
    std::vector<std::vector<std::pair<double, double>>> levels;
    std::vector<std::vector<bool>> seen;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(line);
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 4) parse_error(source, lineno, "expected 4 fields, got " + std::to_string(f.size()));
        const double t = parse_double(f[0], source, lineno);
        const long idx = parse_index(f[1], source, lineno);
        if (idx < 0 || idx >= n_nodes) parse_error(source, lineno, "node index out of range");
        auto it = level_of.find(t);
        if (it == level_of.end()) {
            it = level_of.emplace(t, times.size()).first;
            times.push_back(t);
            levels.emplace_back(static_cast<size_t>(n_nodes));
            seen.emplace_back(static_cast<size_t>(n_nodes), false);
        }
        auto mark = seen[it->second][static_cast<size_t>(idx)];
        if (mark) parse_error(source, lineno, "duplicate row for node " + std::to_string(idx));
        mark = true;
        levels[it->second][static_cast<size_t>(idx)] = {parse_double(f[2], source, lineno),
                                                        parse_double(f[3], source, lineno)};
    }
    if (times.empty()) parse_error(source, lineno, "dataset has no rows");
    for (size_t j = 0; j < times.size(); ++j) {
        for (bool s : seen[j]) {
            if (!s) parse_error(source, lineno, "time level " + format_double(times[j]) + " is missing nodes");
        }
        if (j > 0 && !(times[j] > times[j - 1])) parse_error(source, lineno, "time levels must increase");
    }
    Snapshots s;
    const auto m = static_cast<Eigen::Index>(times.size());
    s.times.resize(m);
    s.values.resize(m, n_nodes);
    s.forcing.resize(m, n_nodes);
    for (Eigen::Index j = 0; j < m; ++j) {
        s.times[j] = times[static_cast<size_t>(j)];
        for (Eigen::Index i = 0; i < n_nodes; ++i) {
            const auto& [u, f] = levels[static_cast<size_t>(j)][static_cast<size_t>(i)];
            s.values(j, i) = u;
            s.forcing(j, i) = f;
        }
    }
    s.dt = m >= 2 ? s.times[1] - s.times[0] : 0.0;
    return s;
}

Snapshots read_snapshots(const std::string& path, Eigen::Index n_nodes) {
    auto in = open_in(path);
    return read_snapshots(in, n_nodes, path);
}

void write_trajectory(const std::string& path, const PointCloud& cloud, const Vector& times, const Matrix& trajectory) {
    require(trajectory.rows() == times.size() && trajectory.cols() == cloud.size(), "trajectory shape mismatch");
    auto out = open_out(path);
    out << (cloud.dim() == 3 ? "t,node_index,x,y,z,u\n" : "t,node_index,x,y,u\n");
    for (Eigen::Index j = 0; j < times.size(); ++j) {
        for (Eigen::Index i = 0; i < cloud.size(); ++i) {
            out << format_double(times[j]) << ',' << i;
            for (int k = 0; k < cloud.dim(); ++k) out << ',' << format_double(cloud.nodes()(i, k));
            out << ',' << format_double(trajectory(j, i)) << '\n';
        }
    }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    auto out = open_out(path);
    for (size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    for (const auto& row : rows) {
        for (size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
        out << '\n';
    }
}

}  // namespace surfpde
