#include "porestab/csvio.hpp"

#include <cstdio>

namespace porestab {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), n_cols_(columns.size()) {
  if (!out_) throw ValidationError("cannot open output file '" + path + "'");
  out_ << "# porestab-csv v1\n";
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i) out_ << ",";
    out_ << columns[i];
  }
  out_ << "\n";
}

std::string CsvWriter::format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15e", v);
  return buf;
}

void CsvWriter::begin_row() {
  first_in_row_ = true;
  written_ = 0;
}

void CsvWriter::field(double v) { field(format(v)); }

void CsvWriter::field(long v) { field(std::to_string(v)); }

void CsvWriter::field(const std::string& v) {
  if (!first_in_row_) out_ << ",";
  out_ << v;
  first_in_row_ = false;
  ++written_;
}

void CsvWriter::end_row() {
  if (written_ != n_cols_) {
    throw ValidationError("csv row width " + std::to_string(written_) + " != header width " +
                          std::to_string(n_cols_));
  }
  out_ << "\n";
}

} // namespace porestab
