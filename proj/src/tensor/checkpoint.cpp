#include "linkpoison/tensor/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "linkpoison/errors.hpp"

namespace linkpoison::tensor {

namespace {

void put_doubles(std::ostream& out, std::span<const double> values) {
  for (double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
}

void get_doubles(std::istream& in, std::span<double> values, const std::string& where) {
  for (double& v : values) {
    char buf[8];
    if (!in.read(buf, 8)) throw ParseError(where + ": truncated binary payload");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
  }
}

}  // namespace

const Matrix& Checkpoint::get(const std::string& name) const {
  for (const auto& [key, m] : tensors)
    if (key == name) return m;
  throw DomainError("checkpoint has no tensor '" + name + "'");
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  nlohmann::ordered_json header;
  header["kind"] = ckpt.kind;
  header["seed"] = ckpt.seed;
  header["epoch"] = ckpt.epoch;
  header["tensors"] = nlohmann::json::array();
  for (const auto& [name, m] : ckpt.tensors)
    header["tensors"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << header.dump() << '\n';
  for (const auto& entry : ckpt.tensors) put_doubles(out, entry.second.data());
  if (!out) throw Error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  Checkpoint ckpt;
  try {
    auto header = nlohmann::json::parse(line);
    ckpt.kind = header.at("kind").get<std::string>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.epoch = header.at("epoch").get<std::size_t>();
    for (const auto& t : header.at("tensors"))
      ckpt.tensors.emplace_back(t.at("name").get<std::string>(),
                                Matrix(t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": bad checkpoint header: " + e.what(), 1);
  }
  for (auto& entry : ckpt.tensors) get_doubles(in, entry.second.data(), path.string());
  if (in.peek() != std::char_traits<char>::eof())
    throw ParseError(path.string() + ": trailing bytes after payload");
  return ckpt;
}

void write_matrix_binary(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  put_doubles(out, m.data());
}

Matrix read_matrix_binary(const std::filesystem::path& path, std::size_t rows, std::size_t cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  Matrix m(rows, cols);
  get_doubles(in, m.data(), path.string());
  if (in.peek() != std::char_traits<char>::eof())
    throw ParseError(path.string() + ": size does not match " + m.shape_string());
  return m;
}

}  // namespace linkpoison::tensor
