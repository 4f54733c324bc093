#include "charembed/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "charembed/charset.hpp"
#include "charembed/errors.hpp"

namespace charembed {
namespace {

// Guards against absurd lengths from a corrupt header.
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 40;

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated checkpoint");
  }

  template <typename T>
  T le() {
    unsigned char raw[sizeof(T)];
    bytes(reinterpret_cast<char*>(raw), sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(raw[i]) << (8 * i);
    return value;
  }

  std::string str() {
    const std::uint32_t n = le<std::uint32_t>();
    std::string s(n, '\0');
    if (n) bytes(s.data(), n);
    return s;
  }

  [[noreturn]] void fail(const std::string& what) const { throw IoError(source_ + ": " + what); }

 private:
  std::istream& in_;
  std::string source_;
};

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  out.write(Checkpoint::kMagic, 4);
  put_le<std::uint32_t>(out, Checkpoint::kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ck.alphabet.size()));
  for (const std::string& s : ck.alphabet) put_string(out, s);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ck.config.size()));
  for (const auto& [k, v] : ck.config) {
    put_string(out, k);
    put_string(out, v);
  }
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ck.tensors.size()));
  for (const auto& [name, t] : ck.tensors) {
    put_string(out, name);
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(Checkpoint::DType::kFloat64));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_le<std::uint64_t>(out, d);
    for (Real v : t.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  Reader r(in, source);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, Checkpoint::kMagic, 4) != 0) r.fail("not a checkpoint (bad magic)");
  const std::uint32_t version = r.le<std::uint32_t>();
  if (version != Checkpoint::kVersion) r.fail("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ck;
  const std::uint32_t n_symbols = r.le<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_symbols; ++i) ck.alphabet.push_back(r.str());
  if (ck.alphabet != Alphabet::standard().symbols()) r.fail("checkpoint alphabet differs from this build's");

  const std::uint32_t n_config = r.le<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_config; ++i) {
    std::string key = r.str();
    ck.config[key] = r.str();
  }

  const std::uint32_t n_tensors = r.le<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.str();
    const auto dtype = static_cast<Checkpoint::DType>(r.le<std::uint8_t>());
    if (dtype != Checkpoint::DType::kFloat32 && dtype != Checkpoint::DType::kFloat64) {
      r.fail("tensor '" + name + "' has unknown dtype");
    }
    const std::uint32_t rank = r.le<std::uint32_t>();
    if (rank == 0 || rank > 8) r.fail("tensor '" + name + "' has invalid rank");
    Shape shape;
    std::uint64_t count = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const std::uint64_t dim = r.le<std::uint64_t>();
      if (dim == 0 || dim > kMaxLength) r.fail("tensor '" + name + "' has invalid dimension");
      count *= dim;
      if (count > kMaxLength) r.fail("tensor '" + name + "' is too large");
      shape.push_back(static_cast<std::size_t>(dim));
    }
    std::vector<Real> values(static_cast<std::size_t>(count));
    for (Real& v : values) {
      if (dtype == Checkpoint::DType::kFloat64) {
        v = std::bit_cast<double>(r.le<std::uint64_t>());
      } else {
        v = static_cast<double>(std::bit_cast<float>(r.le<std::uint32_t>()));
      }
    }
    ck.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint '" + path + "'");
    write_checkpoint(out, checkpoint);
    out.flush();
    if (!out) throw IoError("failed writing checkpoint '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at '" + path + "': " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint '" + path + "'");
  return read_checkpoint(in, path);
}

}  // namespace charembed
