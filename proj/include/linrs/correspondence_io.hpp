#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "linrs/types.hpp"

namespace linrs {

/// Text format, one correspondence per line:
///
///   # comment
///   rows_per_frame=720 r0=0
///   X Y Z r c
///
/// The optional header line must precede the first data line. Blank lines and
/// anything after '#' are ignored.
struct CorrespondenceFile {
  Correspondences correspondences;
  std::optional<int> rows_per_frame;
  std::optional<double> reference_row;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

CorrespondenceFile read_correspondences(std::istream& is);
CorrespondenceFile read_correspondences_file(const std::string& path);

void write_correspondences(std::ostream& os, const CorrespondenceFile& file);

}  // namespace linrs
