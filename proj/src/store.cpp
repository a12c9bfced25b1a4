#include "store.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

namespace cflat {

namespace {

constexpr char kMagic[4] = {'C', 'F', 'L', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void write_le(std::ostream& out, T value) {
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>(static_cast<std::uint64_t>(value) >> (8 * i));
  out.write(buf, sizeof(T));
}

template <class T>
T read_le(std::istream& in, const char* what) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw StoreError(std::string("truncated store: ") + what);
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(buf[i]) << (8 * i));
  return value;
}

}  // namespace

std::vector<std::uint8_t> deflate_bytes(const std::vector<std::uint8_t>& in) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw StoreError("deflateInit2 failed");
  }
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(in.size())));
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw StoreError("deflate failed");
  out.resize(zs.total_out);
  return out;
}

std::vector<std::uint8_t> inflate_bytes(const std::uint8_t* data, std::size_t size) {
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) throw StoreError("inflateInit2 failed");
  std::vector<std::uint8_t> out(std::max<std::size_t>(size * 4, 4096));
  zs.next_in = const_cast<Bytef*>(data);
  zs.avail_in = static_cast<uInt>(size);
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    if (zs.total_out == out.size()) out.resize(out.size() * 2);
    zs.next_out = out.data() + zs.total_out;
    zs.avail_out = static_cast<uInt>(out.size() - zs.total_out);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw StoreError("corrupt DEFLATE chunk");
    }
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw StoreError("truncated DEFLATE chunk");
    }
  }
  out.resize(zs.total_out);
  inflateEnd(&zs);
  return out;
}

void save_store(const std::string& path, std::size_t n, const std::vector<LandmarkSummary>& summaries,
                bool compress) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, kVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(n));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(summaries.size()));
  for (const auto& s : summaries) write_le<std::uint32_t>(out, s.landmark());
  for (const auto& s : summaries) {
    if (s.num_destinations() != n) throw StoreError("summary size does not match vertex count");
    const auto payload = s.payload();
    std::vector<std::uint8_t> body;
    if (compress) body = deflate_bytes({payload.begin(), payload.end()});
    else body.assign(payload.begin(), payload.end());
    out.put(static_cast<char>(compress ? 1 : 0));
    write_le<std::uint64_t>(out, body.size());
    out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
  }
  if (!out) throw IoError("write failed: " + path);
}

Store::Store(std::size_t n, double period, std::vector<LandmarkSummary> summaries)
    : n_(n), period_(period), loaded_(std::move(summaries)) {
  for (const auto& s : loaded_) landmarks_.push_back(s.landmark());
}

std::shared_ptr<Store> Store::open(const std::string& path, double period) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw StoreError("not a CFLT store: " + path);
  const auto version = read_le<std::uint32_t>(in, "version");
  if (version != kVersion) throw StoreError("unsupported CFLT version " + std::to_string(version));
  auto store = std::make_shared<Store>();
  store->path_ = path;
  store->period_ = period;
  store->n_ = read_le<std::uint32_t>(in, "vertex count");
  const auto count = read_le<std::uint32_t>(in, "landmark count");
  for (std::uint32_t i = 0; i < count; ++i) store->landmarks_.push_back(read_le<std::uint32_t>(in, "landmark ids"));
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  std::uint64_t pos = 16 + 4ull * count;
  for (std::uint32_t i = 0; i < count; ++i) {
    in.seekg(static_cast<std::streamoff>(pos));
    Chunk c;
    c.flags = read_le<std::uint8_t>(in, "chunk flags");
    c.length = read_le<std::uint64_t>(in, "chunk length");
    c.offset = pos + 9;
    if (c.offset + c.length > file_size) {
      throw StoreError("truncated chunk for landmark " + std::to_string(store->landmarks_[i]));
    }
    pos = c.offset + c.length;
    store->chunks_.push_back(c);
  }
  store->loaded_.resize(count);
  store->once_ = std::make_unique<std::once_flag[]>(count);
  return store;
}

const LandmarkSummary& Store::summary(std::size_t i) const {
  if (i >= landmarks_.size()) throw std::out_of_range("landmark index out of range");
  if (chunks_.empty()) return loaded_[i];
  std::call_once(once_[i], [&]() {
    const Chunk& c = chunks_[i];
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw IoError("cannot reopen " + path_);
    in.seekg(static_cast<std::streamoff>(c.offset));
    std::vector<std::uint8_t> body(c.length);
    if (!in.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(c.length))) {
      throw StoreError("truncated chunk for landmark " + std::to_string(landmarks_[i]));
    }
    if (c.flags & 1) body = inflate_bytes(body.data(), body.size());
    loaded_[i] = LandmarkSummary(landmarks_[i], n_, period_, std::move(body));
  });
  return loaded_[i];
}

void Store::load_all() const {
  for (std::size_t i = 0; i < landmarks_.size(); ++i) summary(i);
}

SummaryStats summary_stats(const Store& store, std::size_t i) {
  const auto& s = store.summary(i);
  SummaryStats st;
  st.landmark = s.landmark();
  st.payload_bytes = s.payload().size();
  st.stored_bytes = store.chunk_bytes(i) ? store.chunk_bytes(i) : st.payload_bytes;
  for (VertexId v = 0; v < s.num_destinations(); ++v) {
    switch (s.kind(v)) {
      case RecordKind::kUnreachable: ++st.unreachable; break;
      case RecordKind::kUnique: ++st.unique; break;
      case RecordKind::kOwned: ++st.owned; st.breakpoints += s.count(v); break;
      case RecordKind::kShared: ++st.shared; st.breakpoints += s.count(v); break;
    }
  }
  return st;
}

}  // namespace cflat
