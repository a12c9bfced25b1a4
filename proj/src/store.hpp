#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ctrap.hpp"

namespace cflat {

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes a CFLT file. With compress set every chunk is a raw DEFLATE stream.
void save_store(const std::string& path, std::size_t n, const std::vector<LandmarkSummary>& summaries,
                bool compress);

/// Raw DEFLATE (RFC 1951) helpers used for chunks.
std::vector<std::uint8_t> deflate_bytes(const std::vector<std::uint8_t>& in);
std::vector<std::uint8_t> inflate_bytes(const std::uint8_t* data, std::size_t size);

/// Landmark summaries, loaded from disk one chunk at a time on first access.
/// Concurrent readers are safe.
class Store {
 public:
  Store() = default;
  /// In-memory store.
  Store(std::size_t n, double period, std::vector<LandmarkSummary> summaries);
  /// Reads the header and chunk table; the file has no period field, so
  /// the instance period is passed in for dequantization.
  static std::shared_ptr<Store> open(const std::string& path, double period);

  std::size_t num_vertices() const { return n_; }
  std::size_t num_landmarks() const { return landmarks_.size(); }
  double period() const { return period_; }
  const std::vector<VertexId>& landmarks() const { return landmarks_; }

  const LandmarkSummary& summary(std::size_t i) const;
  bool compressed(std::size_t i) const { return chunks_.empty() ? false : chunks_[i].flags & 1; }
  /// Chunk size as stored (0 for in-memory stores).
  std::uint64_t chunk_bytes(std::size_t i) const { return chunks_.empty() ? 0 : chunks_[i].length; }

  /// Forces every chunk into memory.
  void load_all() const;

 private:
  struct Chunk {
    std::uint8_t flags = 0;
    std::uint64_t offset = 0;  // file position of the chunk body
    std::uint64_t length = 0;
  };

  std::string path_;
  std::size_t n_ = 0;
  double period_ = kDay;
  std::vector<VertexId> landmarks_;
  std::vector<Chunk> chunks_;
  mutable std::vector<LandmarkSummary> loaded_;
  mutable std::unique_ptr<std::once_flag[]> once_;
};

struct SummaryStats {
  VertexId landmark = 0;
  std::uint64_t stored_bytes = 0;
  std::uint64_t payload_bytes = 0;
  std::size_t unreachable = 0, unique = 0, owned = 0, shared = 0;
  std::size_t breakpoints = 0;  // post-merge entries over multi-predecessor records

  /// shared / (owned + shared); 0 without multi-predecessor records.
  double share_ratio() const {
    return owned + shared == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(owned + shared);
  }
};

SummaryStats summary_stats(const Store& store, std::size_t i);

}  // namespace cflat
