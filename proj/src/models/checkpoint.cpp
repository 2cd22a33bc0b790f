#include <bit>
#include <cstring>
#include <fstream>

#include "renewcast/error.hpp"
#include "renewcast/models.hpp"
#include "renewcast/serialize.hpp"

namespace renewcast::models {

namespace {

constexpr char kMagic[4] = {'R', 'C', 'K', 'P'};

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error(ErrorCode::kParseError, "truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  Json header;
  header["spec"] = to_json(checkpoint.spec);
  header["lookback"] = checkpoint.window.lookback;
  header["features"] = checkpoint.window.features;
  header["seed"] = checkpoint.seed;
  const std::string text = header.dump();
  const auto params = checkpoint.network.flat_parameters();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_le<std::uint64_t>(out, params.size());
  for (double v : params) write_le<double>(out, v);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorCode::kParseError, "not a checkpoint");
  const auto version = read_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kParseError, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = read_le<std::uint64_t>(in);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw Error(ErrorCode::kParseError, "truncated header");
  Json header;
  try {
    header = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  Checkpoint cp;
  cp.spec = model_spec_from_json(header.at("spec"));
  cp.window.lookback = header.at("lookback").get<std::size_t>();
  cp.window.features = header.at("features").get<std::size_t>();
  cp.seed = header.at("seed").get<std::uint64_t>();
  cp.network = build_model(cp.spec, cp.window, cp.seed);
  const auto count = read_le<std::uint64_t>(in);
  if (count != cp.network.parameter_count()) throw Error(ErrorCode::kShapeMismatch, "parameter count mismatch");
  std::vector<double> params(count);
  for (auto& v : params) v = read_le<double>(in);
  cp.network.set_flat_parameters(params);
  return cp;
}

}  // namespace renewcast::models
