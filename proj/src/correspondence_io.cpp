#include "linrs/correspondence_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "linrs/format.hpp"

namespace linrs {

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_value(std::string_view token, T& out) {
  const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

bool parse_real(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  return parse_value(token, out) && std::isfinite(out);
}

}  // namespace

CorrespondenceFile read_correspondences(std::istream& is) {
  CorrespondenceFile file;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tokens = split_ws(view);
    if (tokens.empty()) continue;

    if (tokens.front().find('=') != std::string_view::npos) {
      if (!file.correspondences.empty()) throw ParseError(number, "header after data lines");
      for (const auto tok : tokens) {
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos) throw ParseError(number, "expected key=value");
        const auto key = tok.substr(0, eq);
        const auto value = tok.substr(eq + 1);
        if (key == "rows_per_frame") {
          int v = 0;
          if (!parse_value(value, v) || v <= 0) throw ParseError(number, "bad rows_per_frame");
          file.rows_per_frame = v;
        } else if (key == "r0") {
          double v = 0;
          if (!parse_real(value, v)) throw ParseError(number, "bad r0");
          file.reference_row = v;
        } else {
          throw ParseError(number, "unknown header key '" + std::string(key) + "'");
        }
      }
      continue;
    }

    if (tokens.size() != 5) {
      throw ParseError(number, "expected 5 values 'X Y Z r c', got " + std::to_string(tokens.size()));
    }
    double v[5];
    for (int k = 0; k < 5; ++k) {
      if (!parse_real(tokens[k], v[k])) {
        throw ParseError(number, "not a finite number: '" + std::string(tokens[k]) + "'");
      }
    }
    file.correspondences.push_back({Vec3(v[0], v[1], v[2]), Vec2(v[3], v[4])});
  }
  return file;
}

CorrespondenceFile read_correspondences_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  return read_correspondences(in);
}

void write_correspondences(std::ostream& os, const CorrespondenceFile& file) {
  if (file.rows_per_frame || file.reference_row) {
    bool first = true;
    if (file.rows_per_frame) {
      os << "rows_per_frame=" << *file.rows_per_frame;
      first = false;
    }
    if (file.reference_row) os << (first ? "" : " ") << "r0=" << format_number(*file.reference_row);
    os << '\n';
  }
  for (const auto& c : file.correspondences) {
    os << format_number(c.world_point.x()) << ' ' << format_number(c.world_point.y()) << ' '
       << format_number(c.world_point.z()) << ' ' << format_number(c.image_point.x()) << ' '
       << format_number(c.image_point.y()) << '\n';
  }
}

}  // namespace linrs
