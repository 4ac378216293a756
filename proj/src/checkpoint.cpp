#include "phi4/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "phi4/error.hpp"

namespace phi4 {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'P', 'H', 'I', '4'};

template <class T>
void put(std::string& buf, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw FormatError("checkpoint truncated");
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint make_checkpoint(const SimConfig& config, const Field& state, std::uint64_t step) {
  Checkpoint cp;
  cp.dim = state.grid.dim();
  cp.side = state.grid.side();
  cp.eps_inv = state.grid.eps_inv();
  cp.beta = config.params.beta;
  cp.eta = config.params.eta;
  cp.K = config.params.K;
  cp.scheme = config.scheme;
  cp.seed = config.seed;
  cp.step = step;
  cp.values = state.values;
  return cp;
}

void write_checkpoint(const std::string& path, const Checkpoint& cp) {
  std::string buf(kMagic, 4);
  put<std::uint32_t>(buf, kCheckpointVersion);
  put<std::uint8_t>(buf, static_cast<std::uint8_t>(cp.dim));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(cp.side));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(cp.eps_inv));
  put<double>(buf, cp.beta);
  put<double>(buf, cp.eta);
  put<double>(buf, cp.K);
  put<std::uint8_t>(buf, static_cast<std::uint8_t>(cp.scheme));
  put<std::uint64_t>(buf, cp.seed);
  put<std::uint64_t>(buf, cp.step);
  for (double v : cp.values) put<double>(buf, v);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open checkpoint for writing: " + tmp);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw FormatError("failed writing checkpoint: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint: " + path);
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(data);
  char magic[4];
  for (char& c : magic) c = r.get<char>();
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad checkpoint magic in " + path);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));

  Checkpoint cp;
  cp.dim = r.get<std::uint8_t>();
  cp.side = static_cast<int>(r.get<std::uint32_t>());
  cp.eps_inv = static_cast<int>(r.get<std::uint32_t>());
  cp.beta = r.get<double>();
  cp.eta = r.get<double>();
  cp.K = r.get<double>();
  const auto scheme = r.get<std::uint8_t>();
  if (scheme > 1) throw FormatError("unknown scheme tag in checkpoint");
  cp.scheme = static_cast<Scheme>(scheme);
  cp.seed = r.get<std::uint64_t>();
  cp.step = r.get<std::uint64_t>();
  if ((cp.dim != 2 && cp.dim != 3) || cp.side < 1 || cp.eps_inv < 1) throw FormatError("invalid grid in checkpoint");

  std::size_t n = 1;
  for (int a = 0; a < cp.dim; ++a) n *= static_cast<std::size_t>(cp.side) * cp.eps_inv;
  if (r.remaining() != n * sizeof(double))
    throw FormatError(r.remaining() < n * sizeof(double) ? "checkpoint truncated" : "trailing bytes in checkpoint");
  cp.values.resize(n);
  for (auto& v : cp.values) v = r.get<double>();
  return cp;
}

Checkpoint read_checkpoint(const std::string& path, const TorusGrid& expected) {
  Checkpoint cp = read_checkpoint(path);
  if (!(cp.grid() == expected)) throw FormatError("checkpoint grid does not match the configured grid");
  return cp;
}

}  // namespace phi4
