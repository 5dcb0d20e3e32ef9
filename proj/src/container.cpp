#include "gazekit/container.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <fstream>

namespace gazekit::io {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}

struct Reader {
  const std::uint8_t* p;
  const std::uint8_t* end;

  void need(std::size_t n) const {
    if (static_cast<std::size_t>(end - p) < n)
      throw Error(ErrorCode::SchemaViolation, "container truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    p += 4;
    return v;
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    p += 2;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return *p++;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(p), n);
    p += n;
    return s;
  }
  void raw(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, p, n);
    p += n;
  }
};

}  // namespace

const TensorEntry& Container::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw Error(ErrorCode::SchemaViolation, "container entry missing: " + name);
  return it->second;
}

std::vector<std::string> Container::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

void Container::put(const std::string& name, const nn::Tensor<float>& t) {
  TensorEntry e;
  e.dtype = DType::F32;
  e.shape = t.shape;
  e.f32 = t.v;
  entries_[name] = std::move(e);
}

void Container::put(const std::string& name, const nn::Tensor<double>& t) {
  TensorEntry e;
  e.dtype = DType::F64;
  e.shape = t.shape;
  e.f64 = t.v;
  entries_[name] = std::move(e);
}

std::vector<std::uint8_t> Container::serialize() const {
  std::vector<std::uint8_t> out;
  put_bytes(out, kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  put_u32(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [k, v] : meta) {
    put_u16(out, static_cast<std::uint16_t>(k.size()));
    put_bytes(out, k.data(), k.size());
    put_u32(out, static_cast<std::uint32_t>(v.size()));
    put_bytes(out, v.data(), v.size());
  }
  for (const auto& [name, e] : entries_) {
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    put_bytes(out, name.data(), name.size());
    out.push_back(static_cast<std::uint8_t>(e.dtype));
    out.push_back(static_cast<std::uint8_t>(e.shape.size()));
    for (std::size_t d : e.shape) put_u32(out, static_cast<std::uint32_t>(d));
    if (e.dtype == DType::F32)
      put_bytes(out, e.f32.data(), e.f32.size() * sizeof(float));
    else
      put_bytes(out, e.f64.data(), e.f64.size() * sizeof(double));
  }
  return out;
}

void Container::save(const std::string& path) const {
  const auto bytes = serialize();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot open for write: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::IoError, "write failed: " + path);
}

Container Container::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  Reader r{bytes.data(), bytes.data() + bytes.size()};
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw Error(ErrorCode::SchemaViolation, "bad container magic: " + path);
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw Error(ErrorCode::SchemaViolation,
                "unsupported container version " + std::to_string(version));
  const std::uint32_t n_meta = r.u32();
  const std::uint32_t n_entries = r.u32();
  Container c;
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    const auto k = r.str(r.u16());
    const auto v = r.str(r.u32());
    c.meta[k] = v;
  }
  for (std::uint32_t i = 0; i < n_entries; ++i) {
    const auto name = r.str(r.u16());
    TensorEntry e;
    e.dtype = static_cast<DType>(r.u8());
    const std::uint8_t ndim = r.u8();
    e.shape.resize(ndim);
    for (int d = 0; d < ndim; ++d) e.shape[d] = r.u32();
    const std::size_t n = e.numel();
    if (e.dtype == DType::F32) {
      e.f32.resize(n);
      r.raw(e.f32.data(), n * sizeof(float));
    } else if (e.dtype == DType::F64) {
      e.f64.resize(n);
      r.raw(e.f64.data(), n * sizeof(double));
    } else {
      throw Error(ErrorCode::SchemaViolation, "unknown dtype in " + path);
    }
    c.entries_[name] = std::move(e);
  }
  return c;
}

std::string sha256_hex(const std::uint8_t* data, std::size_t len) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int dlen = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, data, len);
  EVP_DigestFinal_ex(ctx, digest, &dlen);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(dlen * 2);
  for (unsigned i = 0; i < dlen; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_hex(const std::string& text) {
  return sha256_hex(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
}

std::string sha256_file_hex(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return sha256_hex(bytes.data(), bytes.size());
}

}  // namespace gazekit::io
