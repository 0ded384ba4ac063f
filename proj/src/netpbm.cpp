#include "odcsa/netpbm.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace odcsa {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t offset, const std::string& what) {
  throw std::runtime_error(path + ": " + what + " (byte offset " + std::to_string(offset) + ")");
}

struct Cursor {
  const std::vector<char>& buf;
  std::size_t pos = 0;
  const std::string& path;

  bool eof() const { return pos >= buf.size(); }
  char peek() const { return buf[pos]; }
  char take() { return buf[pos++]; }

  // Skips whitespace and '#' comments between header tokens.
  void skip_separators() {
    while (!eof()) {
      const char ch = peek();
      if (ch == '#') {
        while (!eof() && take() != '\n') {
        }
      } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  }

  int read_int(const char* what) {
    skip_separators();
    if (eof() || peek() < '0' || peek() > '9') {
      fail(path, pos, std::string("expected ") + what);
    }
    long v = 0;
    while (!eof() && peek() >= '0' && peek() <= '9') {
      v = v * 10 + (take() - '0');
      if (v > 1 << 28) fail(path, pos, std::string(what) + " out of range");
    }
    return static_cast<int>(v);
  }
};

std::vector<char> slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw std::runtime_error(path + ": cannot open file");
  }
  std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return buf;
}

std::uint8_t quantize(double v, const std::string& path) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(path + ": pixel value " + std::to_string(v) +
                                " outside [0,1]");
  }
  return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

}  // namespace

NetpbmImage read_netpbm(const std::string& path) {
  const std::vector<char> buf = slurp(path);
  Cursor cur{buf, 0, path};

  if (buf.size() < 2 || buf[0] != 'P') fail(path, 0, "bad netpbm magic");
  const char kind_ch = buf[1];
  if (kind_ch != '2' && kind_ch != '5' && kind_ch != '6') {
    fail(path, 1, "unsupported netpbm magic (want P2, P5 or P6)");
  }
  cur.pos = 2;

  NetpbmImage img;
  img.kind = kind_ch - '0';
  img.width = cur.read_int("width");
  img.height = cur.read_int("height");
  img.maxval = cur.read_int("maxval");
  if (img.width < 1 || img.height < 1) fail(path, cur.pos, "degenerate image dimensions");
  if (img.maxval < 1 || img.maxval > 255) fail(path, cur.pos, "maxval must be in [1,255]");

  const std::size_t pixels = static_cast<std::size_t>(img.width) * img.height;
  const std::size_t payload = img.is_rgb() ? pixels * 3 : pixels;
  img.bytes.resize(payload);

  if (img.kind == 2) {
    for (std::size_t i = 0; i < payload; ++i) {
      const int v = cur.read_int("pixel value");
      if (v > img.maxval) fail(path, cur.pos, "pixel value exceeds maxval");
      img.bytes[i] = static_cast<std::uint8_t>(v);
    }
  } else {
    // exactly one whitespace byte between maxval and the raster
    if (cur.eof()) fail(path, cur.pos, "missing raster separator");
    const char sep = cur.take();
    if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n') {
      fail(path, cur.pos - 1, "expected single whitespace before raster");
    }
    if (buf.size() - cur.pos < payload) {
      fail(path, buf.size(), "truncated raster payload");
    }
    for (std::size_t i = 0; i < payload; ++i) {
      img.bytes[i] = static_cast<std::uint8_t>(buf[cur.pos + i]);
    }
  }
  return img;
}

Tensor4 image_from_netpbm(const NetpbmImage& img) {
  if (!img.is_rgb()) {
    throw std::invalid_argument("image_from_netpbm: expected a P6 color image");
  }
  Tensor4 out(Shape4{1, 3, img.height, img.width});
  const double maxval = static_cast<double>(img.maxval);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * img.width + x) * 3;
      for (int ch = 0; ch < 3; ++ch) {
        out.at(0, ch, y, x) = img.bytes[base + ch] / maxval;
      }
    }
  }
  return out;
}

Tensor4 mask_from_netpbm(const NetpbmImage& img) {
  if (img.is_rgb()) {
    throw std::invalid_argument("mask_from_netpbm: expected a P5/P2 gray mask");
  }
  Tensor4 out(Shape4{1, 1, img.height, img.width});
  const int threshold = (img.maxval + 1) / 2;
  for (std::size_t i = 0; i < img.bytes.size(); ++i) {
    out.data()[i] = img.bytes[i] >= threshold ? 1.0 : 0.0;
  }
  return out;
}

void write_pgm(const Tensor4& prob, const std::string& path) {
  if (prob.n() != 1 || prob.c() != 1) {
    throw std::invalid_argument("write_pgm: expected a (1,1,H,W) map, got " +
                                prob.shape().str());
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(path + ": cannot write file");
  os << "P5\n" << prob.w() << " " << prob.h() << "\n255\n";
  for (double v : prob.vec()) {
    const std::uint8_t b = quantize(v, path);
    os.write(reinterpret_cast<const char*>(&b), 1);
  }
  if (!os) throw std::runtime_error(path + ": write failed");
}

void write_ppm(const Tensor4& rgb, const std::string& path) {
  if (rgb.n() != 1 || rgb.c() != 3) {
    throw std::invalid_argument("write_ppm: expected a (1,3,H,W) image, got " +
                                rgb.shape().str());
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(path + ": cannot write file");
  os << "P6\n" << rgb.w() << " " << rgb.h() << "\n255\n";
  for (int y = 0; y < rgb.h(); ++y) {
    for (int x = 0; x < rgb.w(); ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        const std::uint8_t b = quantize(rgb.at(0, ch, y, x), path);
        os.write(reinterpret_cast<const char*>(&b), 1);
      }
    }
  }
  if (!os) throw std::runtime_error(path + ": write failed");
}

}  // namespace odcsa
