#include "popovdae/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "popovdae/errors.hpp"

namespace popovdae::io {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw InvalidInput("failed writing '" + path + "'");
}

json parse_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvalidInput("malformed JSON");
  return j;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw InvalidInput(what + " must be a non-empty array of rows");
  if (!j[0].is_array() || j[0].empty())
    throw InvalidInput(what + " rows must be non-empty arrays");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InvalidInput(what + " is ragged (row " + std::to_string(r) + ")");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw InvalidInput(what + " has a non-numeric entry");
      M(r, c) = v.get<double>();
    }
  }
  if (!M.allFinite()) throw InvalidInput(what + " has non-finite entries");
  return M;
}

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

bool looks_like_block_list(const json& j) {
  return j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() &&
         j[0][0].is_array();
}

std::vector<Matrix> weight_blocks(const json& j, const std::string& what, int steps) {
  std::vector<Matrix> blocks;
  if (looks_like_block_list(j)) {
    if (static_cast<int>(j.size()) != steps)
      throw DimensionMismatch(what + " lists " + std::to_string(j.size()) +
                              " blocks but the grid has " + std::to_string(steps) +
                              " steps");
    blocks.reserve(j.size());
    for (std::size_t k = 0; k < j.size(); ++k)
      blocks.push_back(matrix_from_json(j[k], what + "[" + std::to_string(k) + "]"));
  } else {
    blocks.assign(static_cast<std::size_t>(steps), matrix_from_json(j, what));
  }
  return blocks;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DescriptorSystem parse_system_json(const std::string& text) {
  const json j = parse_json_text(text);
  if (!j.is_object()) throw InvalidInput("system file must be a JSON object");
  for (const char* key : {"E", "A", "B", "C"})
    if (!j.contains(key))
      throw InvalidInput(std::string("system file is missing \"") + key + "\"");
  DescriptorSystem sys;
  sys.E = matrix_from_json(j["E"], "E");
  sys.A = matrix_from_json(j["A"], "A");
  sys.B = matrix_from_json(j["B"], "B");
  sys.C = matrix_from_json(j["C"], "C");
  if (j.contains("labels")) {
    if (!j["labels"].is_array()) throw InvalidInput("labels must be an array of strings");
    for (const json& l : j["labels"]) {
      if (!l.is_string()) throw InvalidInput("labels must be an array of strings");
      sys.labels.push_back(l.get<std::string>());
    }
  }
  sys.validate();
  return sys;
}

DescriptorSystem read_system_json(const std::string& path) {
  try {
    return parse_system_json(read_file(path));
  } catch (const Error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

std::string system_to_json(const DescriptorSystem& sys) {
  sys.validate();
  json j;
  j["E"] = matrix_to_json(sys.E);
  j["A"] = matrix_to_json(sys.A);
  j["B"] = matrix_to_json(sys.B);
  j["C"] = matrix_to_json(sys.C);
  if (!sys.labels.empty()) j["labels"] = sys.labels;
  return j.dump(2) + "\n";
}

void write_system_json(const std::string& path, const DescriptorSystem& sys) {
  write_file(path, system_to_json(sys));
}

WeightSchedule parse_weights_json(const std::string& text) {
  const json j = parse_json_text(text);
  if (!j.is_object()) throw InvalidInput("weights file must be a JSON object");
  for (const char* key : {"Q", "R", "t_f", "steps"})
    if (!j.contains(key))
      throw InvalidInput(std::string("weights file is missing \"") + key + "\"");
  if (!j["t_f"].is_number()) throw InvalidInput("t_f must be a number");
  if (!j["steps"].is_number_integer()) throw InvalidInput("steps must be an integer");
  const double t_f = j["t_f"].get<double>();
  const int steps = j["steps"].get<int>();
  if (!(t_f > 0.0) || !std::isfinite(t_f)) throw InvalidInput("t_f must be positive");
  if (steps < 1) throw InvalidInput("steps must be >= 1");
  const TimeGrid grid(t_f, steps);

  std::vector<Matrix> Q = weight_blocks(j["Q"], "Q", steps);
  std::vector<Matrix> R = weight_blocks(j["R"], "R", steps);
  std::vector<Matrix> N;
  if (j.contains("N")) {
    N = weight_blocks(j["N"], "N", steps);
  } else {
    N.assign(static_cast<std::size_t>(steps), Matrix::Zero(R[0].rows(), Q[0].rows()));
  }
  return WeightSchedule::per_step(grid, std::move(Q), std::move(N), std::move(R));
}

WeightSchedule read_weights_json(const std::string& path) {
  try {
    return parse_weights_json(read_file(path));
  } catch (const Error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<std::string>& labels) {
  const Eigen::Index n = traj.states.rows();
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(n))
    throw DimensionMismatch("trajectory labels must have one entry per state");
  std::ostringstream out;
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) {
    out << ',';
    if (labels.empty())
      out << "x_" << (i + 1);
    else
      out << labels[static_cast<std::size_t>(i)];
  }
  out << '\n';
  for (int k = 0; k <= traj.grid.m; ++k) {
    out << format_double(traj.grid.node(k));
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(traj.states(i, k));
    out << '\n';
  }
  write_file(path, out.str());
}

void write_signal_csv(const std::string& path, const Signal& s, const std::string& base) {
  std::ostringstream out;
  out << "t";
  for (int i = 1; i <= s.dim(); ++i) out << ',' << base << "_" << i;
  out << '\n';
  for (int k = 0; k < s.grid.m; ++k) {
    out << format_double(s.grid.midpoint(k));
    for (Eigen::Index i = 0; i < s.values.rows(); ++i)
      out << ',' << format_double(s.values(i, k));
    out << '\n';
  }
  write_file(path, out.str());
}

Signal read_signal_csv(const std::string& path, const TimeGrid& grid) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path + ": missing CSV header");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() &&
               (cell[used] == ' ' || cell[used] == '\r' || cell[used] == '\t'))
          ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw InvalidInput(path + ": non-numeric CSV cell '" + cell + "'");
      }
    }
    if (row.size() < 2)
      throw InvalidInput(path + ": CSV rows need a time column and at least one value");
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidInput(path + ": ragged CSV row");
    rows.push_back(std::move(row));
  }
  if (static_cast<int>(rows.size()) != grid.m)
    throw GridMismatch(path + ": expected " + std::to_string(grid.m) + " data rows, found " +
                       std::to_string(rows.size()));

  const Eigen::Index dim = static_cast<Eigen::Index>(rows.front().size()) - 1;
  Signal s;
  s.grid = grid;
  s.values.resize(dim, grid.m);
  for (int k = 0; k < grid.m; ++k)
    for (Eigen::Index i = 0; i < dim; ++i)
      s.values(i, k) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(i) + 1];
  if (!s.values.allFinite()) throw InvalidInput(path + ": non-finite signal value");
  return s;
}

}  // namespace popovdae::io
