#include "msa/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

#include "msa/errors.hpp"

namespace msa {

namespace {

void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64le(std::string& out, double d) { put_u64le(out, std::bit_cast<std::uint64_t>(d)); }

struct Reader {
  const std::string& buf;
  const std::string& path;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) const {
    if (pos + n > buf.size()) {
      throw IoError("checkpoint '" + path + "': truncated " + what + " at byte offset " +
                    std::to_string(buf.size()) + " (need " + std::to_string(pos + n) + ")");
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
      v = (v << 8) | static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)]);
    }
    pos += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
      v = (v << 8) | static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)]);
    }
    pos += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  ck.params.validate();
  std::string out = "MSAC";
  put_u32le(out, ck.version);
  put_u32le(out, static_cast<std::uint32_t>(ck.params.layer_count()));
  put_u32le(out, static_cast<std::uint32_t>(ck.params.channel_count()));
  put_u32le(out, ck.iteration);
  put_u64le(out, ck.config_digest);
  for (const Tensor& w : ck.params.weights) {
    put_u32le(out, static_cast<std::uint32_t>(w.rank()));
    for (int ax = 0; ax < w.rank(); ++ax) put_u32le(out, static_cast<std::uint32_t>(w.extent(ax)));
    for (std::int64_t i = 0; i < w.size(); ++i) put_f64le(out, w[i]);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write on '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  const std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (buf.size() < 4 || buf.compare(0, 4, "MSAC") != 0) {
    throw IoError("checkpoint '" + path + "': bad magic at byte offset 0");
  }
  Reader rd{buf, path, 4};
  Checkpoint ck;
  ck.version = rd.u32("version");
  if (ck.version != 1) {
    throw IoError("checkpoint '" + path + "': unsupported version " + std::to_string(ck.version) +
                  " at byte offset 4");
  }
  ck.layers = rd.u32("layer count");
  ck.channels = rd.u32("channel count");
  ck.iteration = rd.u32("iteration");
  ck.config_digest = rd.u64("config digest");
  if (ck.layers < 2 || ck.layers > 1024 || ck.channels < 1 || ck.channels > 4096) {
    throw IoError("checkpoint '" + path + "': implausible (l,d) = (" + std::to_string(ck.layers) +
                  "," + std::to_string(ck.channels) + ") at byte offset 8");
  }
  for (std::uint32_t layer = 0; layer < ck.layers; ++layer) {
    const std::uint32_t rank = rd.u32("tensor rank");
    if (rank != 4) {
      throw IoError("checkpoint '" + path + "': weight tensor rank must be 4, got " +
                    std::to_string(rank) + " at byte offset " + std::to_string(rd.pos - 4));
    }
    std::vector<int> shape;
    std::int64_t numel = 1;
    for (std::uint32_t ax = 0; ax < rank; ++ax) {
      const std::uint32_t e = rd.u32("extent");
      if (e == 0 || e > (1u << 20)) {
        throw IoError("checkpoint '" + path + "': implausible extent at byte offset " +
                      std::to_string(rd.pos - 4));
      }
      shape.push_back(static_cast<int>(e));
      numel *= e;
    }
    std::vector<double> data(static_cast<std::size_t>(numel));
    for (std::int64_t i = 0; i < numel; ++i) data[static_cast<std::size_t>(i)] = rd.f64("payload");
    ck.params.weights.emplace_back(std::move(shape), std::move(data));
  }
  if (rd.pos != buf.size()) {
    throw IoError("checkpoint '" + path + "': trailing bytes at byte offset " +
                  std::to_string(rd.pos));
  }
  ck.params.validate();
  if (static_cast<std::uint32_t>(ck.params.channel_count()) != ck.channels) {
    throw IoError("checkpoint '" + path + "': header channel count " +
                  std::to_string(ck.channels) + " does not match weight shapes");
  }
  return ck;
}

}  // namespace msa
