#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cmekit/infer.hpp"
#include "cmekit/model.hpp"

namespace cmekit {

/// Header plus rows of raw cells. Blank lines and lines starting with '#'
/// are skipped; cells are trimmed. No quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name, or throws InvalidArgument.
  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

/// Builds a CSV document; every row must match the header width.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);
  const std::string& text() const { return out_; }

 private:
  std::size_t width_;
  std::string out_;
};

/// Count data in the `time,<species...>` layout, one row per cell. A leading
/// `trajectory` column is ignored. Time "ss" marks steady-state data, in which
/// case every row must say "ss". Timed rows are grouped by time, ascending.
Dataset read_dataset(std::string_view text, const ReactionNetwork& network);

/// All values of one named column as reals (for burst fitting).
std::vector<double> read_column(std::string_view text, std::string_view name);

}  // namespace cmekit
