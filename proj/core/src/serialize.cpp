#include "smnae/serialize.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "smnae/errors.hpp"

namespace smnae {

namespace {

constexpr char kMagic[6] = {'S', 'M', 'N', 'A', 'E', '1'};
constexpr char kSvmTag[4] = {'S', 'V', 'M', '0'};

std::uint32_t crc32(const std::vector<char>& bytes) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (char ch : bytes) {
    crc = table[(crc ^ static_cast<unsigned char>(ch)) & 0xFFu] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* data, std::size_t n) { buf_.insert(buf_.end(), data, data + n); }

  void matrix(const Matrix& m) {
    u64(m.rows());
    u64(m.cols());
    for (std::size_t i = 0; i < m.size(); ++i) f64(m.data()[i]);
  }

  const std::vector<char>& bytes() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> bytes) : buf_(std::move(bytes)) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() {
    const char* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const char* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  const char* take(std::size_t n) {
    if (pos_ + n > buf_.size()) {
      throw ValidationError("load_model: truncated file (needed " + std::to_string(pos_ + n) +
                            " bytes, have " + std::to_string(buf_.size()) + ")");
    }
    const char* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }

  Matrix matrix() {
    const std::uint64_t rows = u64();
    const std::uint64_t cols = u64();
    if (rows > (1u << 24) || cols > (1u << 24)) {
      throw ValidationError("load_model: implausible matrix dimensions");
    }
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = f64();
    return m;
  }

  std::size_t pos() const { return pos_; }
  const std::vector<char>& bytes() const { return buf_; }

 private:
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

void write_stack(Writer& w, const StackedSmnae& stack) {
  w.u32(static_cast<std::uint32_t>(stack.layers.size()));
  for (const auto& layer : stack.layers) {
    w.matrix(layer.w_enc);
    w.matrix(layer.w_dec);
  }
}

StackedSmnae read_stack(Reader& r) {
  StackedSmnae stack;
  const std::uint32_t count = r.u32();
  for (std::uint32_t k = 0; k < count; ++k) {
    SmnaeLayer layer;
    layer.w_enc = r.matrix();
    layer.w_dec = r.matrix();
    stack.layers.push_back(std::move(layer));
  }
  return stack;
}

}  // namespace

void save_model(const PipelineModel& model, const std::string& path) {
  model.validate();
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(model.format_version);
  w.u8(model.fusion == FusionRule::kSum ? 0 : 1);
  w.u64(model.z);
  write_stack(w, model.stage1);
  write_stack(w, model.stage2);
  write_stack(w, model.stage3);

  w.raw(kSvmTag, sizeof(kSvmTag));
  const SvmModel& svm = model.classifier;
  w.u64(svm.support_vectors.size());
  w.u64(svm.feature_dim());
  for (const auto& sv : svm.support_vectors)
    for (double v : sv) w.f64(v);
  for (double a : svm.alphas) w.f64(a);
  w.f64(svm.bias);
  w.f64(svm.gamma);
  w.f64(svm.c);
  w.f64(svm.platt_a);
  w.f64(svm.platt_b);
  w.u8(svm.platt_fitted ? 1 : 0);

  const std::uint32_t crc = crc32(w.bytes());
  Writer footer;
  footer.u32(crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("save_model: cannot open " + path + " for writing");
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  out.write(footer.bytes().data(), static_cast<std::streamsize>(footer.bytes().size()));
  if (!out) throw ValidationError("save_model: write to " + path + " failed");
}

PipelineModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("load_model: cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kMagic) + 4) {
    throw ValidationError("load_model: file too small to be a model: " + path);
  }

  // Verify the trailing checksum before parsing anything else.
  std::vector<char> body(bytes.begin(), bytes.end() - 4);
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= static_cast<std::uint32_t>(
                  static_cast<unsigned char>(bytes[bytes.size() - 4 + i]))
              << (8 * i);
  }
  if (crc32(body) != stored) {
    throw ValidationError("load_model: checksum mismatch, file is corrupt: " + path);
  }

  Reader r(std::move(body));
  const char* magic = r.take(sizeof(kMagic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError("load_model: bad magic bytes in " + path);
  }
  PipelineModel model;
  model.format_version = r.u32();
  if (model.format_version != 1) {
    throw ValidationError("load_model: unsupported format version " +
                          std::to_string(model.format_version));
  }
  model.fusion = r.u8() == 0 ? FusionRule::kSum : FusionRule::kMax;
  model.z = r.u64();
  model.stage1 = read_stack(r);
  model.stage2 = read_stack(r);
  model.stage3 = read_stack(r);

  const char* tag = r.take(sizeof(kSvmTag));
  if (std::memcmp(tag, kSvmTag, sizeof(kSvmTag)) != 0) {
    throw ValidationError("load_model: missing classifier section in " + path);
  }
  SvmModel& svm = model.classifier;
  const std::uint64_t n_sv = r.u64();
  const std::uint64_t dim = r.u64();
  svm.support_vectors.resize(n_sv);
  for (auto& sv : svm.support_vectors) {
    sv.resize(dim);
    for (auto& v : sv) v = r.f64();
  }
  svm.alphas.resize(n_sv);
  for (auto& a : svm.alphas) a = r.f64();
  svm.bias = r.f64();
  svm.gamma = r.f64();
  svm.c = r.f64();
  svm.platt_a = r.f64();
  svm.platt_b = r.f64();
  svm.platt_fitted = r.u8() != 0;

  model.validate();
  return model;
}

}  // namespace smnae
