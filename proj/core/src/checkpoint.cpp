#include "segnmt/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace segnmt {

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'E', 'G', 'N', 'M', 'T', 'C', 'K'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4))
    throw std::runtime_error("checkpoint truncated");
  return static_cast<std::uint32_t>(bytes[0]) |
         (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

std::uint32_t narrow(std::size_t v) {
  if (v > 0xffffffffu) throw std::runtime_error("checkpoint dimension too large");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void write_checkpoint(std::ostream& out, const GruEncDecParams& params) {
  params.validate();
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kCheckpointVersion);
  put_u32(out, narrow(params.dims.embedding));
  put_u32(out, narrow(params.dims.hidden));
  put_u32(out, narrow(params.dims.source_vocab));
  put_u32(out, narrow(params.dims.target_vocab));
  std::uint32_t count = 0;
  params.for_each([&](const std::string&, const Matrix&) { ++count; });
  put_u32(out, count);
  params.for_each([&](const std::string& name, const Matrix& m) {
    put_u32(out, narrow(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, narrow(static_cast<std::size_t>(m.rows())));
    put_u32(out, narrow(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m(r, c))));
  });
  if (!out) throw std::runtime_error("checkpoint write failed");
}

GruEncDecParams read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw std::runtime_error("not a segnmt checkpoint");
  std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  ModelDims dims;
  dims.embedding = get_u32(in);
  dims.hidden = get_u32(in);
  dims.source_vocab = get_u32(in);
  dims.target_vocab = get_u32(in);
  GruEncDecParams params = GruEncDecParams::zeros(dims);

  std::uint32_t count = get_u32(in);
  std::uint32_t expected = 0;
  params.for_each([&](const std::string&, const Matrix&) { ++expected; });
  if (count != expected)
    throw std::runtime_error("checkpoint has " + std::to_string(count) +
                             " tensors, expected " + std::to_string(expected));
  params.for_each([&](const std::string& name, Matrix& m) {
    std::uint32_t len = get_u32(in);
    if (len > 256) throw std::runtime_error("checkpoint tensor name too long");
    std::string stored(len, '\0');
    if (!in.read(stored.data(), len)) throw std::runtime_error("checkpoint truncated");
    if (stored != name)
      throw std::runtime_error("checkpoint tensor '" + stored + "' where '" +
                               name + "' was expected");
    std::uint32_t rows = get_u32(in), cols = get_u32(in);
    if (rows != m.rows() || cols != m.cols())
      throw std::runtime_error("checkpoint tensor " + name + " has wrong shape");
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        m(r, c) = static_cast<double>(std::bit_cast<float>(get_u32(in)));
  });
  params.validate();
  return params;
}

void save_checkpoint(const std::filesystem::path& path,
                     const GruEncDecParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  write_checkpoint(out, params);
}

GruEncDecParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

void round_to_checkpoint_precision(GruEncDecParams& params) {
  params.for_each([](const std::string&, Matrix& m) {
    m = m.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
  });
}

}  // namespace segnmt
