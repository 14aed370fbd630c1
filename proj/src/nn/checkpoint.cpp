#include "grasp/nn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numbers>

#include "grasp/nn/optim.hpp"

namespace grasp::nn {

namespace {

constexpr char kMagic[8] = {'G', 'R', 'S', 'P', 'C', 'K', 'P', 'T'};

template <class U>
void put(std::ostream& os, U v) {
  unsigned char bytes[sizeof(U)];
  std::memcpy(bytes, &v, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(U));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <class U>
U get(std::istream& is) {
  unsigned char bytes[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw Error(ErrorKind::IoError, "truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(U));
  U v;
  std::memcpy(&v, bytes, sizeof(U));
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParameterSet<float>& params, std::uint64_t spec_hash) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint64_t>(os, spec_hash);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(params.entries().size()));
  for (const auto& e : params.entries()) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(e.value.shape.size()));
    for (int d : e.value.shape) put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    for (float v : e.value.data) put<float>(os, v);
  }
  if (!os) throw Error(ErrorKind::IoError, "failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorKind::IoError, "'" + path.string() + "' is not a checkpoint");
  if (get<std::uint32_t>(is) != kCheckpointVersion) throw Error(ErrorKind::IoError, "unsupported checkpoint version");
  Checkpoint ck;
  ck.spec_hash = get<std::uint64_t>(is);
  const auto count = get<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(is);
    if (len > 4096) throw Error(ErrorKind::IoError, "corrupt parameter name length");
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw Error(ErrorKind::IoError, "truncated checkpoint");
    const auto rank = get<std::uint32_t>(is);
    if (rank > 8) throw Error(ErrorKind::IoError, "corrupt tensor rank");
    std::vector<int> shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(static_cast<int>(get<std::uint32_t>(is)));
    auto& t = ck.params.add(name, shape);
    for (auto& v : t.data) v = get<float>(is);
  }
  return ck;
}

double gaussian_log_density(const std::vector<double>& action, const std::vector<double>& mean,
                            const std::vector<double>& log_std) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double acc = 0.0;
  for (std::size_t j = 0; j < action.size(); ++j) {
    const double z = (action[j] - mean[j]) / std::exp(log_std[j]);
    acc += -0.5 * z * z - log_std[j] - half_log_2pi;
  }
  return acc;
}

}  // namespace grasp::nn
