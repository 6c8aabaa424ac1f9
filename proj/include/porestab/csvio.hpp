#pragma once

#include "porestab/common.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace porestab {

/// CSV writer with the versioned "# porestab-csv v1" first line and a fixed
/// numeric format, so identical data produces byte-identical bodies.
class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);

  void begin_row();
  void field(double v);
  void field(long v);
  void field(const std::string& v);
  void end_row();

  static std::string format(double v);

private:
  std::ofstream out_;
  bool first_in_row_ = true;
  size_t n_cols_ = 0;
  size_t written_ = 0;
};

} // namespace porestab
