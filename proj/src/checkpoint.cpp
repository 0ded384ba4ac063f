#include "odcsa/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace odcsa {

namespace {

constexpr char kMagic[] = "ODCSA1\n";
constexpr std::size_t kMagicLen = 7;

void put_u16(std::ostream& os, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                              static_cast<unsigned char>((v >> 8) & 0xFF)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(os, bits);
}

std::uint16_t get_u16(std::istream& is, const std::string& path) {
  unsigned char b[2];
  if (!is.read(reinterpret_cast<char*>(b), 2)) {
    throw std::runtime_error(path + ": truncated checkpoint");
  }
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error(path + ": truncated checkpoint");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

float get_f32(std::istream& is, const std::string& path) {
  std::uint32_t bits = get_u32(is, path);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

struct StoredTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

std::vector<StoredTensor> read_all(const std::string& path, bool with_payload) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw std::runtime_error(path + ": cannot open checkpoint");
  }
  char magic[kMagicLen];
  if (!is.read(magic, kMagicLen) || std::memcmp(magic, kMagic, kMagicLen) != 0) {
    throw std::runtime_error(path + ": bad checkpoint magic");
  }
  const std::uint32_t count = get_u32(is, path);
  std::vector<StoredTensor> out;
  out.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    StoredTensor t;
    const std::uint16_t name_len = get_u16(is, path);
    t.name.resize(name_len);
    if (!is.read(t.name.data(), name_len)) {
      throw std::runtime_error(path + ": truncated checkpoint");
    }
    unsigned char rank;
    if (!is.read(reinterpret_cast<char*>(&rank), 1)) {
      throw std::runtime_error(path + ": truncated checkpoint");
    }
    std::size_t numel = 1;
    for (unsigned r = 0; r < rank; ++r) {
      t.dims.push_back(get_u32(is, path));
      numel *= t.dims.back();
    }
    if (with_payload) {
      t.values.resize(numel);
      for (auto& v : t.values) v = get_f32(is, path);
    } else {
      is.seekg(static_cast<std::streamoff>(numel) * 4, std::ios::cur);
      if (!is) throw std::runtime_error(path + ": truncated checkpoint");
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

void save_checkpoint(OdcSaNet& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error(path + ": cannot write checkpoint");
  }
  auto params = net.params();
  os.write(kMagic, kMagicLen);
  put_u32(os, static_cast<std::uint32_t>(params.size()));
  for (auto& p : params) {
    put_u16(os, static_cast<std::uint16_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    const unsigned char rank = 4;
    os.write(reinterpret_cast<const char*>(&rank), 1);
    const Shape4& s = p.tensor->shape();
    put_u32(os, static_cast<std::uint32_t>(s.n));
    put_u32(os, static_cast<std::uint32_t>(s.c));
    put_u32(os, static_cast<std::uint32_t>(s.h));
    put_u32(os, static_cast<std::uint32_t>(s.w));
    for (double v : p.tensor->vec()) put_f32(os, static_cast<float>(v));
  }
  if (!os) {
    throw std::runtime_error(path + ": write failed");
  }
}

void load_checkpoint(OdcSaNet& net, const std::string& path) {
  auto stored = read_all(path, true);
  auto params = net.params();
  if (stored.size() != params.size()) {
    throw std::runtime_error(path + ": checkpoint has " + std::to_string(stored.size()) +
                             " tensors, model expects " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const StoredTensor& t = stored[i];
    ParamRef& p = params[i];
    if (t.name != p.name) {
      throw std::runtime_error(path + ": tensor name mismatch: stored '" + t.name +
                               "', model expects '" + p.name + "'");
    }
    const Shape4& s = p.tensor->shape();
    const std::vector<std::uint32_t> want = {
        static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c),
        static_cast<std::uint32_t>(s.h), static_cast<std::uint32_t>(s.w)};
    if (t.dims != want) {
      throw std::runtime_error(path + ": shape mismatch for '" + t.name + "'");
    }
    auto& dst = p.tensor->vec();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = static_cast<double>(t.values[j]);
  }
}

std::vector<std::string> checkpoint_tensor_names(const std::string& path) {
  std::vector<std::string> names;
  for (auto& t : read_all(path, false)) names.push_back(t.name);
  return names;
}

AblationFlags flags_from_checkpoint(const std::string& path) {
  AblationFlags flags;
  flags.use_odc = flags.use_msfa = flags.use_era = flags.use_sra = false;
  for (const auto& name : checkpoint_tensor_names(path)) {
    if (name.starts_with("odc.")) flags.use_odc = true;
    if (name.starts_with("msfa.")) flags.use_msfa = true;
    if (name.starts_with("era.")) flags.use_era = true;
    if (name.starts_with("sra.")) flags.use_sra = true;
  }
  return flags;
}

}  // namespace odcsa
