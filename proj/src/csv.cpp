#include "cmekit/csv.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "cmekit/error.hpp"

namespace cmekit {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double to_double(const std::string& cell, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || cell.empty()) {
    throw InvalidArgument("data row " + std::to_string(line) + ": '" + cell + "' is not a number");
  }
  return v;
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InvalidArgument("CSV has no column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto cells = split(s);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw InvalidArgument("CSV line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw InvalidArgument("CSV is empty");
  return t;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw InvalidArgument("CSV row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    out_ += cells[i];
  }
  out_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  row(cells);
}

Dataset read_dataset(std::string_view text, const ReactionNetwork& network) {
  const CsvTable t = parse_csv(text);
  std::size_t first = 0;
  if (!t.header.empty() && t.header[0] == "trajectory") first = 1;
  if (t.header.size() < first + 2 || t.header[first] != "time") {
    throw InvalidArgument("data CSV header must be time,<species...>");
  }
  Dataset d;
  for (std::size_t c = first + 1; c < t.header.size(); ++c) {
    const auto idx = network.species_index(t.header[c]);
    if (!idx) throw InvalidArgument("data column '" + t.header[c] + "' is not a species of the model");
    d.species.push_back(*idx);
  }
  if (t.rows.empty()) throw InvalidArgument("data CSV has no rows");
  const bool ss = t.rows.front()[first] == "ss";
  d.steady_state = ss;
  std::map<double, std::vector<SystemState>> groups;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const bool row_ss = row[first] == "ss";
    if (row_ss != ss) throw InvalidArgument("data mixes steady-state and timed rows");
    SystemState counts;
    for (std::size_t c = first + 1; c < row.size(); ++c) {
      const double v = to_double(row[c], r + 2);
      if (!(v >= 0.0) || v != std::floor(v) || v > 9e15) {
        throw InvalidArgument("data row " + std::to_string(r + 2) + ": counts must be nonnegative integers");
      }
      counts.push_back(static_cast<Count>(v));
    }
    const double time = ss ? 0.0 : to_double(row[first], r + 2);
    if (!ss && !(time >= 0.0 && std::isfinite(time))) {
      throw InvalidArgument("data row " + std::to_string(r + 2) + ": time must be finite and nonnegative");
    }
    groups[time].push_back(std::move(counts));
  }
  for (auto& [time, obs] : groups) {
    if (!ss) d.times.push_back(time);
    d.observations.push_back(std::move(obs));
  }
  return d;
}

std::vector<double> read_column(std::string_view text, std::string_view name) {
  const CsvTable t = parse_csv(text);
  const std::size_t c = t.column(name);
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) out.push_back(to_double(t.rows[r][c], r + 2));
  return out;
}

}  // namespace cmekit
