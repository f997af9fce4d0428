#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stagewise/engine.hpp"
#include "stagewise/frankwolfe.hpp"
#include "stagewise/oracle.hpp"

namespace stagewise::io {

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string fmt(double v);

/// step,t_static,g_dynamic,loss,wall_ns[,lambda][,x1..xp]
/// The lambda column appears for dual (regularizing) paths. State columns are
/// left empty on rows without a snapshot.
void write_path_csv(const Path& path, const std::filesystem::path& file, bool with_states);

/// t,gap,iterations,loss[,x1..xp]
void write_certified_csv(const std::vector<CertifiedSolution>& sols,
                         const std::filesystem::path& file, bool with_states);
void write_oracle_csv(const OracleGrid& grid, const std::filesystem::path& file, bool with_states);

struct Image {
  Index height = 0;
  Index width = 0;
  Vector pixels;  // row-major, values in [0, 1]
};

Image read_pgm(const std::filesystem::path& file);
/// Values are clamped to [0, 1] and scaled to 0..maxval.
void write_pgm(const Image& img, const std::filesystem::path& file, int maxval = 255);

/// One value per line; a non-numeric first line is treated as a header.
Vector read_signal_csv(const std::filesystem::path& file);
void write_signal_csv(const Vector& v, const std::filesystem::path& file);

/// Writes the whole string, throwing IoError with the path on failure.
void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace stagewise::io
