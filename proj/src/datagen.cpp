#include "msa/datagen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "msa/rng.hpp"

namespace msa {

Phantom make_phantom(int height, int width, int n_shapes, std::uint64_t seed) {
  if (height < 8 || width < 8) {
    throw ShapeError("make_phantom: extents must be >= 8, got " + std::to_string(height) + "x" +
                     std::to_string(width));
  }
  if (n_shapes < 0) throw ConfigError("make_phantom: n_shapes must be >= 0");
  Phantom ph;
  ph.image = Tensor({1, height, width});
  ph.n_shapes = n_shapes;
  ph.seed = seed;
  Rng rng(seed);
  double* img = ph.image.data();
  // Per shape, six uniforms in fixed order: type, cy, cx, hy, hx, intensity.
  for (int s = 0; s < n_shapes; ++s) {
    const bool rect = rng.next_uniform() < 0.5;
    const double cy = rng.next_uniform() * (height - 1);
    const double cx = rng.next_uniform() * (width - 1);
    const double hy = std::max(1.0, (0.05 + 0.25 * rng.next_uniform()) * height);
    const double hx = std::max(1.0, (0.05 + 0.25 * rng.next_uniform()) * width);
    const double val = 0.2 + 0.8 * rng.next_uniform();
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dy = (y - cy) / hy;
        const double dx = (x - cx) / hx;
        const bool inside = rect ? (std::fabs(y - cy) <= hy && std::fabs(x - cx) <= hx)
                                 : (dy * dy + dx * dx <= 1.0);
        if (inside) img[y * width + x] += val;
      }
    }
  }
  for (std::int64_t i = 0; i < ph.image.size(); ++i) img[i] = std::min(1.0, img[i]);
  return ph;
}

ProblemInstance simulate_measurement(const Phantom& phantom, const MeasurementOp& op,
                                     double sigma, std::uint64_t noise_seed, double lambda,
                                     double rho) {
  if (sigma < 0.0) throw ConfigError("simulate_measurement: sigma must be >= 0");
  ProblemInstance prob;
  prob.op = op;
  prob.x_gt = phantom.image;
  prob.b = op.apply(phantom.image);
  prob.lambda = lambda;
  prob.rho = rho;
  if (sigma > 0.0) {
    Rng rng(noise_seed);
    for (std::int64_t i = 0; i < prob.b.size(); ++i) prob.b[i] += sigma * rng.next_normal();
  }
  return prob;
}

Tensor make_blur_kernel(int size, double sigma_blur) {
  if (size < 1 || size % 2 == 0) throw ConfigError("blur kernel size must be odd and >= 1");
  if (!(sigma_blur > 0.0)) throw ConfigError("blur sigma must be > 0");
  Tensor kernel({1, 1, size, size});
  const int r = size / 2;
  double sum = 0.0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dy = y - r, dx = x - r;
      const double v = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma_blur * sigma_blur));
      kernel[y * size + x] = v;
      sum += v;
    }
  }
  for (std::int64_t i = 0; i < kernel.size(); ++i) kernel[i] /= sum;
  return kernel;
}

Tensor make_keep_mask(int height, int width, double keep_fraction, std::uint64_t seed) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw ConfigError("mask keep fraction must be in (0,1]");
  }
  Tensor mask({1, height, width});
  Rng rng(seed);
  for (std::int64_t i = 0; i < mask.size(); ++i) {
    mask[i] = rng.next_uniform() < keep_fraction ? 1.0 : 0.0;
  }
  return mask;
}

Dataset make_dataset(const DatasetSpec& spec, const MeasurementOp& op) {
  Dataset ds;
  Rng master(spec.seed);
  auto build = [&](int count, std::vector<ProblemInstance>& out) {
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const std::uint64_t phantom_seed = master.next_u64();
      const std::uint64_t noise_seed = master.next_u64();
      Phantom ph = make_phantom(spec.height, spec.width, spec.n_shapes, phantom_seed);
      out.push_back(
          simulate_measurement(ph, op, spec.sigma, noise_seed, spec.lambda, spec.rho));
    }
  };
  build(spec.train_count, ds.train);
  build(spec.test_count, ds.test);
  return ds;
}

namespace {

void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_f64le(std::string& out, double d) {
  const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32le(const std::string& buf, std::size_t off) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(buf[off])) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[off + 1])) << 8) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[off + 2])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[off + 3])) << 24);
}

double get_f64le(const std::string& buf, std::size_t off) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(buf[off + static_cast<std::size_t>(i)]);
  }
  return std::bit_cast<double>(v);
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return buf;
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write on '" + path + "'");
}

void require_image_shape(const Tensor& t, const char* op) {
  if (t.rank() != 3 || t.extent(0) != 1) {
    throw ShapeError(std::string(op) + ": image must be [1,H,W]");
  }
}

constexpr std::size_t kMsafHeader = 16;

}  // namespace

Tensor read_msaf(const std::string& path) {
  const std::string buf = read_file_bytes(path);
  if (buf.size() < kMsafHeader) {
    throw IoError("msaf '" + path + "': truncated header at byte offset " +
                  std::to_string(buf.size()) + " (need 16)");
  }
  if (buf.compare(0, 4, "MSAF") != 0) {
    throw IoError("msaf '" + path + "': bad magic at byte offset 0");
  }
  const std::uint32_t h = get_u32le(buf, 4);
  const std::uint32_t w = get_u32le(buf, 8);
  if (h == 0 || w == 0 || static_cast<std::uint64_t>(h) * w > (1u << 26)) {
    throw IoError("msaf '" + path + "': implausible extents " + std::to_string(h) + "x" +
                  std::to_string(w) + " at byte offset 4");
  }
  const std::size_t need = kMsafHeader + static_cast<std::size_t>(h) * w * 8;
  if (buf.size() < need) {
    throw IoError("msaf '" + path + "': truncated payload at byte offset " +
                  std::to_string(buf.size()) + " (need " + std::to_string(need) + ")");
  }
  Tensor img({1, static_cast<int>(h), static_cast<int>(w)});
  for (std::int64_t i = 0; i < img.size(); ++i) {
    img[i] = get_f64le(buf, kMsafHeader + static_cast<std::size_t>(i) * 8);
  }
  return img;
}

void write_msaf(const std::string& path, const Tensor& image) {
  require_image_shape(image, "write_msaf");
  std::string out;
  out.reserve(kMsafHeader + static_cast<std::size_t>(image.size()) * 8);
  out += "MSAF";
  put_u32le(out, static_cast<std::uint32_t>(image.extent(1)));
  put_u32le(out, static_cast<std::uint32_t>(image.extent(2)));
  put_u32le(out, 0);  // reserved
  for (std::int64_t i = 0; i < image.size(); ++i) put_f64le(out, image[i]);
  write_file_bytes(path, out);
}

namespace {

// Whitespace/comment-aware ASCII integer scanner for the P5 header; reports
// the byte offset of any failure.
std::uint64_t p5_next_int(const std::string& buf, std::size_t& pos, const std::string& path) {
  while (pos < buf.size()) {
    const char c = buf[pos];
    if (c == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= buf.size() || buf[pos] < '0' || buf[pos] > '9') {
    throw IoError("p5 '" + path + "': expected integer at byte offset " + std::to_string(pos));
  }
  std::uint64_t v = 0;
  while (pos < buf.size() && buf[pos] >= '0' && buf[pos] <= '9') {
    v = v * 10 + static_cast<std::uint64_t>(buf[pos] - '0');
    if (v > (1u << 26)) {
      throw IoError("p5 '" + path + "': integer too large at byte offset " + std::to_string(pos));
    }
    ++pos;
  }
  return v;
}

}  // namespace

Tensor read_p5(const std::string& path) {
  const std::string buf = read_file_bytes(path);
  if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5') {
    throw IoError("p5 '" + path + "': bad magic at byte offset 0");
  }
  std::size_t pos = 2;
  const std::uint64_t w = p5_next_int(buf, pos, path);
  const std::uint64_t h = p5_next_int(buf, pos, path);
  const std::size_t maxval_pos = pos;
  const std::uint64_t maxval = p5_next_int(buf, pos, path);
  if (maxval != 255) {
    throw IoError("p5 '" + path + "': maxval must be 255, got " + std::to_string(maxval) +
                  " at byte offset " + std::to_string(maxval_pos));
  }
  if (pos >= buf.size()) {
    throw IoError("p5 '" + path + "': missing payload at byte offset " + std::to_string(pos));
  }
  ++pos;  // single whitespace byte after maxval
  const std::size_t need = pos + static_cast<std::size_t>(w) * h;
  if (buf.size() < need) {
    throw IoError("p5 '" + path + "': truncated payload at byte offset " +
                  std::to_string(buf.size()) + " (need " + std::to_string(need) + ")");
  }
  Tensor img({1, static_cast<int>(h), static_cast<int>(w)});
  for (std::int64_t i = 0; i < img.size(); ++i) {
    img[i] = static_cast<double>(static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)])) / 255.0;
  }
  return img;
}

void write_p5(const std::string& path, const Tensor& image) {
  require_image_shape(image, "write_p5");
  std::string out = "P5\n" + std::to_string(image.extent(2)) + " " +
                    std::to_string(image.extent(1)) + "\n255\n";
  for (std::int64_t i = 0; i < image.size(); ++i) {
    const double v = std::clamp(image[i], 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  write_file_bytes(path, out);
}

Tensor read_image(const std::string& path) {
  const std::string buf = read_file_bytes(path);
  if (buf.size() >= 4 && buf.compare(0, 4, "MSAF") == 0) return read_msaf(path);
  if (buf.size() >= 2 && buf[0] == 'P' && buf[1] == '5') return read_p5(path);
  throw IoError("image '" + path + "': unrecognized magic at byte offset 0");
}

void write_image(const std::string& path, const Tensor& image) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0) {
    write_p5(path, image);
  } else {
    write_msaf(path, image);
  }
}

}  // namespace msa
