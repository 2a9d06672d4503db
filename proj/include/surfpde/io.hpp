#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "surfpde/discovery.hpp"

namespace surfpde {

/// Decimal text with 17 significant digits.
std::string format_double(double v);

// --- point clouds: header x,y[,z][,nx,ny[,nz]] -----------------------------

void write_point_cloud(std::ostream& out, const PointCloud& cloud);
void write_point_cloud(const std::string& path, const PointCloud& cloud);
PointCloud read_point_cloud(std::istream& in, const std::string& source = "<stream>");
PointCloud read_point_cloud(const std::string& path);

// --- datasets: header t,node_index,u,f --------------------------------------
// A stationary dataset is a single time level.

void write_snapshots(std::ostream& out, const Snapshots& snaps);
void write_snapshots(const std::string& path, const Snapshots& snaps);
Snapshots read_snapshots(std::istream& in, Eigen::Index n_nodes, const std::string& source = "<stream>");
Snapshots read_snapshots(const std::string& path, Eigen::Index n_nodes);

// --- trajectories: header t,node_index,x,y[,z],u ---------------------------

void write_trajectory(const std::string& path, const PointCloud& cloud, const Vector& times, const Matrix& trajectory);

// --- learned models ----------------------------------------------------------

void write_model(std::ostream& out, const SparseModel& model);
void write_model(const std::string& path, const SparseModel& model);
SparseModel read_model(std::istream& in, const std::string& source = "<stream>");
SparseModel read_model(const std::string& path);

/// CSV: label,coefficient,selected.
void write_coefficient_table(const std::string& path, const SparseModel& model);

/// Generic CSV with a header row; values as 17-digit decimals.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Splits a line on commas (no quoting; fields are numeric or plain labels).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace surfpde
