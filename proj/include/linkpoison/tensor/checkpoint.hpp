#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "linkpoison/tensor/matrix.hpp"

namespace linkpoison::tensor {

/// Named parameter matrices plus the metadata needed to resume or audit a run.
/// On disk: one JSON header line, a newline, then every matrix as row-major
/// little-endian 64-bit floats in header order.
struct Checkpoint {
  std::string kind;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  std::vector<std::pair<std::string, Matrix>> tensors;

  const Matrix& get(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws ParseError on a malformed or truncated file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Writes a raw little-endian float64 dump of `m`.
void write_matrix_binary(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix_binary(const std::filesystem::path& path, std::size_t rows, std::size_t cols);

}  // namespace linkpoison::tensor
