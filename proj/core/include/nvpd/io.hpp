#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nvpd/fits.hpp"
#include "nvpd/sim.hpp"

// File formats. All CSV output is written with deterministic formatting so
// that a fixed seed reproduces files byte for byte.
//
//   trace:     bin_ms,counts[,true_state]
//   shots:     pre_counts,post_counts[,true_pre,true_post]
//   histogram: counts,frequency
//   flip:      duration_ms,initial_state,flip_probability[,weight]
//   xy tables: <x name>,<y name>[,weight]
//
// Charge states are serialized as "NV-" / "NV0".

namespace nvpd {

// Shortest round-trippable decimal representation.
std::string format_double(double value);

// FNV-1a 64-bit, used for provenance hashes in manifests and fit reports.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(const std::string& bytes);
std::string hash_file_hex(const std::filesystem::path& path);

void write_trace_csv(const std::filesystem::path& path,
                     const PhotonTrace& trace, bool include_truth);
PhotonTrace read_trace_csv(const std::filesystem::path& path);

void write_shots_csv(const std::filesystem::path& path,
                     const std::vector<ShotRecord>& records,
                     bool include_truth);
std::vector<ShotRecord> read_shots_csv(const std::filesystem::path& path,
                                       bool* has_truth = nullptr);

void write_histogram_csv(const std::filesystem::path& path,
                         const std::vector<std::uint64_t>& hist);
std::vector<std::uint64_t> read_histogram_csv(
    const std::filesystem::path& path);

void write_flip_csv(const std::filesystem::path& path,
                    const std::vector<FlipObservation>& observations);
std::vector<FlipObservation> read_flip_csv(const std::filesystem::path& path);

// Small numeric table with named columns; optional trailing weight column.
struct XyTable {
  std::string x_name;
  std::string y_name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> weight;  // empty when the file has no weight column
};

void write_xy_csv(const std::filesystem::path& path, const XyTable& table);
// Accepts any x/y header names; reports them back through the table.
XyTable read_xy_csv(const std::filesystem::path& path);

// JSON fit report: model name, named parameters, covariance (row-major),
// residual, convergence flag, iteration count, plus free-form derived values
// and provenance strings.
struct FitReport {
  std::string model;
  std::vector<std::string> parameter_names;
  std::vector<double> parameters;
  std::vector<double> covariance_row_major;
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<std::pair<std::string, double>> derived;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> provenance;
};

std::string to_json(const FitReport& report);
void write_fit_report(const std::filesystem::path& path,
                      const FitReport& report);

}  // namespace nvpd
