#include "dsgrl/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "dsgrl/error.hpp"

namespace dsgrl {

namespace {

using json = nlohmann::json;

constexpr char kMagic[4] = {'D', 'S', 'G', 'C'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 4);
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

void write_f64(std::ofstream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  write_u64(out, bits);
}

std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4))
    throw FormatError(path + ": truncated checkpoint");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8))
    throw FormatError(path + ": truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

double read_f64(std::ifstream& in, const std::string& path) {
  std::uint64_t bits = read_u64(in, path);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

json breakdown_to_json(const LossBreakdown& b) {
  return json{{"inv", b.inv},   {"var1", b.var1},           {"var2", b.var2},
              {"cov1", b.cov1}, {"cov2", b.cov2},           {"model_reg", b.model_reg},
              {"total", b.total}};
}

LossBreakdown breakdown_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw FormatError(path + ": final_loss must be an object");
  LossBreakdown b;
  auto grab = [&](const char* key, double& slot) {
    if (j.contains(key)) {
      if (!j[key].is_number())
        throw FormatError(path + ": final_loss." + key + " must be a number");
      slot = j[key].get<double>();
    }
  };
  grab("inv", b.inv);
  grab("var1", b.var1);
  grab("var2", b.var2);
  grab("cov1", b.cov1);
  grab("cov2", b.cov2);
  grab("model_reg", b.model_reg);
  grab("total", b.total);
  return b;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);

  json header;
  header["config"] = json::parse(train_config_to_json(ckpt.config));
  header["epoch"] = ckpt.epoch;
  header["final_loss"] = breakdown_to_json(ckpt.final_loss);
  std::string header_text = header.dump();

  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u64(out, header_text.size());
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  write_u64(out, ckpt.tensors.size());
  for (const auto& [name, m] : ckpt.tensors) {
    write_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u64(out, static_cast<std::uint64_t>(m.rows()));
    write_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (index_t i = 0; i < m.size(); ++i) write_f64(out, m.data()[i]);
  }
  if (!out) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError(path + ": bad magic bytes");
  std::uint32_t version = read_u32(in, path);
  if (version != kVersion)
    throw FormatError(path + ": unsupported checkpoint version " +
                      std::to_string(version));

  std::uint64_t header_len = read_u64(in, path);
  std::string header_text(header_len, '\0');
  if (!in.read(header_text.data(), static_cast<std::streamsize>(header_len)))
    throw FormatError(path + ": truncated header");

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    throw FormatError(path + ": header is not valid JSON: " + e.what());
  }
  if (!header.is_object() || !header.contains("config"))
    throw FormatError(path + ": header lacks config");

  Checkpoint ckpt;
  ckpt.config = train_config_from_json(header["config"].dump());
  if (header.contains("epoch")) {
    if (!header["epoch"].is_number_integer())
      throw FormatError(path + ": epoch must be an integer");
    ckpt.epoch = header["epoch"].get<index_t>();
  }
  if (header.contains("final_loss"))
    ckpt.final_loss = breakdown_from_json(header["final_loss"], path);

  std::uint64_t count = read_u64(in, path);
  ckpt.tensors.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    std::uint64_t name_len = read_u64(in, path);
    if (name_len > 4096) throw FormatError(path + ": implausible tensor name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(name_len)))
      throw FormatError(path + ": truncated tensor name");
    std::uint64_t rows = read_u64(in, path);
    std::uint64_t cols = read_u64(in, path);
    if (rows == 0 || cols == 0)
      throw FormatError(path + ": tensor '" + name + "' has empty shape");
    Matrix m(static_cast<index_t>(rows), static_cast<index_t>(cols));
    for (index_t i = 0; i < m.size(); ++i) m.data()[i] = read_f64(in, path);
    ckpt.tensors.emplace_back(std::move(name), std::move(m));
  }
  return ckpt;
}

}  // namespace dsgrl
