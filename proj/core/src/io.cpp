#include "nvpd/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nvpd {

namespace {

using ordered_json = nlohmann::ordered_json;

std::runtime_error io_error(const std::filesystem::path& path,
                            const std::string& what) {
  return std::runtime_error(path.string() + ": " + what);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path, "cannot open for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path, "cannot open for reading");
  return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw io_error(path, "cannot parse number '" + s + "'");
  }
}

std::uint32_t parse_count(const std::string& s,
                          const std::filesystem::path& path) {
  const double v = parse_double(s, path);
  if (v < 0.0 || v != std::floor(v))
    throw io_error(path, "expected a non-negative integer, got '" + s + "'");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string format_double(double value) {
  // Shortest representation that parses back exactly.
  for (int precision = 1; precision <= 17; ++precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    double parsed = 0.0;
    std::sscanf(buf, "%lf", &parsed);
    if (parsed == value) return buf;
  }
  return "0";
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hash_hex(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string hash_file_hex(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return hash_hex(ss.str());
}

void write_trace_csv(const std::filesystem::path& path,
                     const PhotonTrace& trace, bool include_truth) {
  if (include_truth && !trace.has_truth())
    throw std::invalid_argument("trace has no truth path to write");
  std::ofstream out = open_out(path);
  out << (include_truth ? "bin_ms,counts,true_state\n" : "bin_ms,counts\n");
  for (std::size_t i = 0; i < trace.counts.size(); ++i) {
    out << format_double(static_cast<double>(i) * trace.bin_ms) << ','
        << trace.counts[i];
    if (include_truth) out << ',' << to_token(trace.true_path[i]);
    out << '\n';
  }
}

PhotonTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw io_error(path, "empty file");
  const bool has_truth = line == "bin_ms,counts,true_state";
  if (!has_truth && line != "bin_ms,counts")
    throw io_error(path, "unexpected trace header '" + line + "'");

  PhotonTrace trace;
  std::vector<double> bin_starts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != (has_truth ? 3u : 2u))
      throw io_error(path, "wrong field count in '" + line + "'");
    bin_starts.push_back(parse_double(fields[0], path));
    trace.counts.push_back(parse_count(fields[1], path));
    if (has_truth)
      trace.true_path.push_back(charge_state_from_token(fields[2]));
  }
  if (trace.counts.empty()) throw io_error(path, "no data rows");
  trace.bin_ms = bin_starts.size() >= 2 ? bin_starts[1] - bin_starts[0] : 1.0;
  if (!(trace.bin_ms > 0.0)) throw io_error(path, "non-positive bin width");
  return trace;
}

void write_shots_csv(const std::filesystem::path& path,
                     const std::vector<ShotRecord>& records,
                     bool include_truth) {
  std::ofstream out = open_out(path);
  out << (include_truth ? "pre_counts,post_counts,true_pre,true_post\n"
                        : "pre_counts,post_counts\n");
  for (const auto& r : records) {
    out << r.pre_counts << ',' << r.post_counts;
    if (include_truth)
      out << ',' << to_token(r.true_pre) << ',' << to_token(r.true_post);
    out << '\n';
  }
}

std::vector<ShotRecord> read_shots_csv(const std::filesystem::path& path,
                                       bool* has_truth_out) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw io_error(path, "empty file");
  const bool has_truth = line == "pre_counts,post_counts,true_pre,true_post";
  if (!has_truth && line != "pre_counts,post_counts")
    throw io_error(path, "unexpected shots header '" + line + "'");
  if (has_truth_out) *has_truth_out = has_truth;

  std::vector<ShotRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != (has_truth ? 4u : 2u))
      throw io_error(path, "wrong field count in '" + line + "'");
    ShotRecord r;
    r.pre_counts = parse_count(fields[0], path);
    r.post_counts = parse_count(fields[1], path);
    if (has_truth) {
      r.true_pre = charge_state_from_token(fields[2]);
      r.true_post = charge_state_from_token(fields[3]);
    }
    records.push_back(r);
  }
  return records;
}

void write_histogram_csv(const std::filesystem::path& path,
                         const std::vector<std::uint64_t>& hist) {
  std::ofstream out = open_out(path);
  out << "counts,frequency\n";
  for (std::size_t k = 0; k < hist.size(); ++k)
    out << k << ',' << hist[k] << '\n';
}

std::vector<std::uint64_t> read_histogram_csv(
    const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw io_error(path, "empty file");
  if (line != "counts,frequency")
    throw io_error(path, "unexpected histogram header '" + line + "'");
  std::vector<std::uint64_t> hist;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2)
      throw io_error(path, "wrong field count in '" + line + "'");
    const auto k = parse_count(fields[0], path);
    if (k >= hist.size()) hist.resize(k + 1, 0);
    hist[k] += static_cast<std::uint64_t>(parse_double(fields[1], path));
  }
  return hist;
}

void write_flip_csv(const std::filesystem::path& path,
                    const std::vector<FlipObservation>& observations) {
  std::ofstream out = open_out(path);
  out << "duration_ms,initial_state,flip_probability,weight\n";
  for (const auto& o : observations)
    out << format_double(o.duration_ms) << ',' << to_token(o.initial) << ','
        << format_double(o.p_flip) << ',' << format_double(o.weight) << '\n';
}

std::vector<FlipObservation> read_flip_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw io_error(path, "empty file");
  const bool has_weight =
      line == "duration_ms,initial_state,flip_probability,weight";
  if (!has_weight && line != "duration_ms,initial_state,flip_probability")
    throw io_error(path, "unexpected flip header '" + line + "'");
  std::vector<FlipObservation> out_rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != (has_weight ? 4u : 3u))
      throw io_error(path, "wrong field count in '" + line + "'");
    FlipObservation o;
    o.duration_ms = parse_double(fields[0], path);
    o.initial = charge_state_from_token(fields[1]);
    o.p_flip = parse_double(fields[2], path);
    o.weight = has_weight ? parse_double(fields[3], path) : 1.0;
    out_rows.push_back(o);
  }
  return out_rows;
}

void write_xy_csv(const std::filesystem::path& path, const XyTable& table) {
  std::ofstream out = open_out(path);
  out << table.x_name << ',' << table.y_name;
  if (!table.weight.empty()) out << ",weight";
  out << '\n';
  for (std::size_t i = 0; i < table.x.size(); ++i) {
    out << format_double(table.x[i]) << ',' << format_double(table.y[i]);
    if (!table.weight.empty()) out << ',' << format_double(table.weight[i]);
    out << '\n';
  }
}

XyTable read_xy_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw io_error(path, "empty file");
  const auto header = split_csv_line(line);
  if (header.size() != 2 && !(header.size() == 3 && header[2] == "weight"))
    throw io_error(path, "expected '<x>,<y>[,weight]' header");
  XyTable table;
  table.x_name = header[0];
  table.y_name = header[1];
  const bool has_weight = header.size() == 3;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw io_error(path, "wrong field count in '" + line + "'");
    table.x.push_back(parse_double(fields[0], path));
    table.y.push_back(parse_double(fields[1], path));
    if (has_weight) table.weight.push_back(parse_double(fields[2], path));
  }
  return table;
}

std::string to_json(const FitReport& report) {
  ordered_json j;
  j["model"] = report.model;
  ordered_json params = ordered_json::object();
  for (std::size_t i = 0; i < report.parameter_names.size(); ++i)
    params[report.parameter_names[i]] = report.parameters[i];
  j["parameters"] = params;
  j["parameter_order"] = report.parameter_names;
  j["covariance_row_major"] = report.covariance_row_major;
  j["residual"] = report.residual;
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  ordered_json derived = ordered_json::object();
  for (const auto& [k, v] : report.derived) derived[k] = v;
  j["derived"] = derived;
  j["warnings"] = report.warnings;
  ordered_json prov = ordered_json::object();
  for (const auto& [k, v] : report.provenance) prov[k] = v;
  j["provenance"] = prov;
  return j.dump(2) + "\n";
}

void write_fit_report(const std::filesystem::path& path,
                      const FitReport& report) {
  std::ofstream out = open_out(path);
  out << to_json(report);
}

}  // namespace nvpd
