#include "fringekit/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <zlib.h>

namespace fringekit {

namespace {

constexpr std::uint32_t tag(const char (&s)[5]) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(s[0])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[3])) << 24;
}

constexpr std::uint32_t kTagCasp = tag("CASP");
constexpr std::uint32_t kTagLut5 = tag("LUT5");
constexpr std::uint32_t kTagLut1 = tag("LUT1");
constexpr std::uint32_t kTagNorm = tag("NORM");
constexpr std::uint32_t kTagLoss = tag("LOSS");
constexpr std::size_t kHeaderSize = 8 + 2 + 4 + 4;

class Writer {
 public:
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void f64s(std::span<const double> v) {
    for (double x : v) f64(x);
  }
  void bytes(std::span<const std::uint8_t> b) { buf.insert(buf.end(), b.begin(), b.end()); }

  std::vector<std::uint8_t> buf;

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  double f64() { return std::bit_cast<double>(get(8)); }
  void f64s(std::span<double> out) {
    for (double& x : out) x = f64();
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }
  void expect_done(const char* what) const {
    if (!done()) throw Error(ErrorCode::Format, std::string("model file: trailing bytes in ") + what + " section");
  }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw Error(ErrorCode::Format, "model file is truncated");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

void section(Writer& out, std::uint32_t t, const Writer& body) {
  out.u32(t);
  out.u32(static_cast<std::uint32_t>(body.buf.size()));
  out.bytes(body.buf);
}

std::uint32_t crc32_of(std::span<const std::uint8_t> b) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, b.data(), static_cast<uInt>(b.size())));
}

void expect(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::Format, std::string("model file: ") + what);
}

}  // namespace

std::vector<std::uint8_t> encode_model(const Model& model) {
  model.validate();
  Writer payload;
  {
    Writer s;
    s.u32(kFeatureCount);
    s.u32(kHiddenUnits);
    s.u32(kMatrixElems);
    s.f64s(model.predictor.center);
    s.f64s(model.predictor.scale);
    s.f64s(model.predictor.params);
    s.f64s(model.predictor.base.m);
    section(payload, kTagCasp, s);
  }
  {
    Writer s;
    s.u32(kLut5DDims);
    for (int d = 0; d < kLut5DDims; ++d) s.u32(kLut5DRes);
    for (int d = 0; d < kLut5DDims; ++d) {
      s.f64(0.0);
      s.f64(1.0);
    }
    s.f64s(model.lut5.entries);
    section(payload, kTagLut5, s);
  }
  {
    Writer s;
    s.u32(kLut1DSize);
    s.f64(model.lut1.lo);
    s.f64(model.lut1.hi);
    s.f64s(model.lut1.entries);
    section(payload, kTagLut1, s);
  }
  {
    Writer s;
    s.f64(model.norm.lum_lo);
    s.f64(model.norm.lum_hi);
    s.f64(model.norm.g_max);
    section(payload, kTagNorm, s);
  }
  {
    Writer s;
    const LossWeights& w = model.weights;
    for (double v : {w.l1, w.perceptual, w.chroma, w.smooth, w.align}) s.f64(v);
    section(payload, kTagLoss, s);
  }

  Writer file;
  file.bytes(std::span(reinterpret_cast<const std::uint8_t*>(kModelMagic), 8));
  file.u16(kModelVersion);
  file.u32(static_cast<std::uint32_t>(payload.buf.size()));
  file.u32(crc32_of(payload.buf));
  file.bytes(payload.buf);
  return std::move(file.buf);
}

Model decode_model(std::span<const std::uint8_t> bytes) {
  expect(bytes.size() >= kHeaderSize, "shorter than its header");
  expect(std::memcmp(bytes.data(), kModelMagic, 8) == 0, "bad magic");
  Reader head(bytes.subspan(8, kHeaderSize - 8));
  const std::uint16_t version = head.u16();
  if (version > kModelVersion) {
    throw Error(ErrorCode::Format, "model file version " + std::to_string(version) + " is newer than supported version " +
                                       std::to_string(kModelVersion));
  }
  expect(version >= 1, "invalid version 0");
  const std::uint32_t length = head.u32();
  const std::uint32_t crc = head.u32();
  expect(bytes.size() - kHeaderSize == length, "payload length mismatch");
  const auto payload = bytes.subspan(kHeaderSize);
  expect(crc32_of(payload) == crc, "checksum mismatch");

  Model m;
  m.predictor = CasPredictor::zero();
  bool seen_casp = false, seen_lut5 = false, seen_lut1 = false;
  Reader r(payload);
  while (!r.done()) {
    const std::uint32_t t = r.u32();
    const std::uint32_t len = r.u32();
    Reader s(r.take(len));
    if (t == kTagCasp) {
      expect(s.u32() == kFeatureCount && s.u32() == kHiddenUnits && s.u32() == kMatrixElems,
             "predictor shape differs from this build");
      s.f64s(m.predictor.center);
      s.f64s(m.predictor.scale);
      s.f64s(m.predictor.params);
      s.f64s(m.predictor.base.m);
      s.expect_done("CASP");
      seen_casp = true;
    } else if (t == kTagLut5) {
      expect(s.u32() == kLut5DDims, "5D table must have 5 axes");
      for (int d = 0; d < kLut5DDims; ++d) expect(s.u32() == kLut5DRes, "5D table resolution must be 9");
      for (int d = 0; d < kLut5DDims; ++d) expect(s.f64() == 0.0 && s.f64() == 1.0, "5D table axes must span [0,1]");
      m.lut5.entries.resize(kLut5DSize);
      s.f64s(m.lut5.entries);
      s.expect_done("LUT5");
      seen_lut5 = true;
    } else if (t == kTagLut1) {
      expect(s.u32() == kLut1DSize, "1D table must have 1024 entries");
      m.lut1.lo = s.f64();
      m.lut1.hi = s.f64();
      m.lut1.entries.resize(kLut1DSize);
      s.f64s(m.lut1.entries);
      s.expect_done("LUT1");
      seen_lut1 = true;
    } else if (t == kTagNorm) {
      m.norm.lum_lo = s.f64();
      m.norm.lum_hi = s.f64();
      m.norm.g_max = s.f64();
      s.expect_done("NORM");
    } else if (t == kTagLoss) {
      LossWeights& w = m.weights;
      for (double* v : {&w.l1, &w.perceptual, &w.chroma, &w.smooth, &w.align}) *v = s.f64();
      s.expect_done("LOSS");
    }
  }
  expect(seen_casp && seen_lut5 && seen_lut1, "missing a required section");
  m.validate();
  return m;
}

void save_model(const std::filesystem::path& path, const Model& model) {
  const auto bytes = encode_model(model);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace fringekit
