#include "stagewise/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace stagewise::io {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + file.string());
}

namespace {

void state_header(std::ostringstream& os, Index p) {
  for (Index j = 1; j <= p; ++j) os << ",x" << j;
}

void state_cells(std::ostringstream& os, const Vector* x, Index p) {
  for (Index j = 0; j < p; ++j) {
    os << ',';
    if (x) os << fmt((*x)(j));
  }
}

}  // namespace

void write_path_csv(const Path& path, const std::filesystem::path& file, bool with_states) {
  std::ostringstream os;
  Index p = 0;
  if (with_states) {
    p = path.final_state.size();
    for (const auto& r : path.records) {
      if (p == 0 && r.state) p = r.state->size();
    }
  }
  os << "step,t_static,g_dynamic,loss,wall_ns";
  if (path.regularizing) os << ",lambda";
  state_header(os, p);
  os << '\n';
  for (const auto& r : path.records) {
    os << r.step << ',' << fmt(r.t) << ',' << fmt(r.g) << ',' << fmt(r.f) << ',' << r.wall_ns;
    if (path.regularizing) os << ',' << fmt(r.lambda);
    state_cells(os, r.state ? &*r.state : nullptr, p);
    os << '\n';
  }
  write_text(file, os.str());
}

void write_certified_csv(const std::vector<CertifiedSolution>& sols,
                         const std::filesystem::path& file, bool with_states) {
  std::ostringstream os;
  const Index p = with_states && !sols.empty() ? sols.front().x.size() : 0;
  os << "t,gap,iterations,loss";
  state_header(os, p);
  os << '\n';
  for (const auto& s : sols) {
    os << fmt(s.t) << ',' << fmt(s.gap) << ',' << s.iterations << ',' << fmt(s.f);
    state_cells(os, &s.x, p);
    os << '\n';
  }
  write_text(file, os.str());
}

void write_oracle_csv(const OracleGrid& grid, const std::filesystem::path& file, bool with_states) {
  write_certified_csv(grid.solutions, file, with_states);
}

namespace {

// next whitespace-delimited token, skipping '#' comments
bool next_token(std::istream& in, std::string& tok) {
  tok.clear();
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      if (!tok.empty()) return true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return true;
      continue;
    }
    tok.push_back(c);
  }
  return !tok.empty();
}

long parse_int(const std::string& tok, const std::filesystem::path& file) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError(file.string() + ": malformed PGM token '" + tok + "'");
  }
}

}  // namespace

Image read_pgm(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::string tok;
  if (!next_token(in, tok) || tok != "P2") throw IoError(file.string() + ": not a plain (P2) PGM file");
  long vals[3];
  for (long& v : vals) {
    if (!next_token(in, tok)) throw IoError(file.string() + ": truncated PGM header");
    v = parse_int(tok, file);
  }
  const long w = vals[0], h = vals[1], maxval = vals[2];
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw IoError(file.string() + ": invalid PGM header");
  Image img;
  img.width = w;
  img.height = h;
  img.pixels.resize(w * h);
  for (Index i = 0; i < w * h; ++i) {
    if (!next_token(in, tok)) throw IoError(file.string() + ": truncated PGM data");
    const long v = parse_int(tok, file);
    if (v < 0 || v > maxval) throw IoError(file.string() + ": pixel value out of range");
    img.pixels(i) = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return img;
}

void write_pgm(const Image& img, const std::filesystem::path& file, int maxval) {
  if (img.pixels.size() != img.width * img.height) throw InputError("write_pgm: size mismatch");
  if (maxval < 1 || maxval > 65535) throw InputError("write_pgm: invalid maxval");
  std::ostringstream os;
  os << "P2\n" << img.width << ' ' << img.height << '\n' << maxval << '\n';
  for (Index r = 0; r < img.height; ++r) {
    for (Index c = 0; c < img.width; ++c) {
      double v = img.pixels(r * img.width + c);
      if (!std::isfinite(v)) v = 0.0;
      v = std::min(1.0, std::max(0.0, v));
      os << (c ? " " : "") << std::lround(v * maxval);
    }
    os << '\n';
  }
  write_text(file, os.str());
}

Vector read_signal_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<double> vals;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string cell = line.substr(0, line.find(','));
    try {
      std::size_t pos = 0;
      const double v = std::stod(cell, &pos);
      if (pos != cell.size()) throw std::invalid_argument(cell);
      vals.push_back(v);
    } catch (const std::exception&) {
      if (!first) throw IoError(file.string() + ": malformed value '" + cell + "'");
    }
    first = false;
  }
  if (vals.empty()) throw IoError(file.string() + ": no values");
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

void write_signal_csv(const Vector& v, const std::filesystem::path& file) {
  std::ostringstream os;
  os << "value\n";
  for (Index i = 0; i < v.size(); ++i) os << fmt(v(i)) << '\n';
  write_text(file, os.str());
}

}  // namespace stagewise::io
