#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graph.hpp"

namespace cflat {

enum class Policy { kRandom, kSparseRandom, kImportantRandom, kBoundary, kCells, kBetweenness, kCellBetweenness };

/// Two-letter tags as used on the command line: R, SR, IR, SK, KC, BC, KB.
Policy parse_policy(const std::string& tag);
std::string policy_tag(Policy p);

struct LandmarkSet {
  std::string tag;  // e.g. "SR" or "BC+R" for mixed sets
  std::size_t exclusion = 0;
  std::uint64_t seed = 0;
  std::vector<VertexId> ids;
};

/// Vertex-to-cell assignment with the vertices that touch another cell.
struct Partition {
  std::size_t cells = 0;
  std::vector<std::uint32_t> cell;
  std::vector<VertexId> boundary;
};

/// Voronoi regions of `cells` random active seeds under undirected free-flow
/// distance, ties to the smaller seed index. Vertices no seed reaches go to
/// cell 0.
Partition partition_naive(const Instance& g, std::size_t cells, std::uint64_t seed);

/// Betweenness estimate from `samples` random sources on the free-flow
/// metric (all sources when samples >= n).
std::vector<double> abc(const Instance& g, std::size_t samples, std::uint64_t seed);

class SelectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SelectOptions {
  Policy policy = Policy::kRandom;
  std::size_t size = 1;
  std::size_t exclusion = 0;  // free-flow ball size
  std::uint64_t seed = 1;
  std::optional<Partition> partition;  // SK/KC/KB; built-in partitioner otherwise
  std::size_t abc_samples = 256;
  std::size_t important_ball = 100;  // IR search radius in vertices
  std::vector<VertexId> preselected;  // treated as already chosen
};

/// Throws SelectionError when the policy runs out of candidates.
LandmarkSet select_landmarks(const Instance& g, const SelectOptions& opt);

void save_landmarks(const LandmarkSet& set, const std::string& path);
LandmarkSet load_landmarks(const std::string& path);

}  // namespace cflat
