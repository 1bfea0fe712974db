#pragma once

// CSV input/output and number formatting shared by the command-line tools.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "glasd/corr_manifold.hpp"
#include "glasd/robust_losses.hpp"

namespace glasd {

/// 17 significant digits; round-trips every double.
std::string format_machine(double v);
/// 4 significant digits for console summaries.
std::string format_console(double v);

/// Comma-separated numeric table. A first row containing any non-numeric
/// cell is taken as the header. Ragged rows, non-numeric cells and NaN/inf
/// entries raise ParseError.
DataMatrix parse_data_csv(std::string_view text);
DataMatrix read_data_csv(const std::filesystem::path& path);

struct NamedMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> names;
};

/// Square matrix with a header row of names.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& names);
NamedMatrix read_matrix_csv(const std::filesystem::path& path);

/// One row, canonical angle order, header a1..an.
void write_angles_csv(const std::filesystem::path& path, const AngleVector& a);
AngleVector read_angles_csv(const std::filesystem::path& path);

/// Long format: row,col,value for all p*p entries.
void write_heatmap_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                       const std::vector<std::string>& names);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace glasd
