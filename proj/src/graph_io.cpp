#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "gbnns/graph.hpp"

namespace gbnns {
namespace {

static_assert(std::endian::native == std::endian::little, "graph files are written little-endian");

constexpr std::array<char, 8> kMagic = {'G', 'B', 'N', 'S', 'G', 'R', 'P', 'H'};
constexpr std::uint32_t kVersion = 1;

enum Flags : std::uint8_t { kCapAtHalfPi = 1, kSymmetrize = 2 };

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  }

  template <typename T>
  void pod(T value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }

  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      out_.put(static_cast<char>((v & 0x7f) | 0x80));
      v >>= 7;
    }
    out_.put(static_cast<char>(v));
  }

  void bytes(std::string_view s) {
    varint(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  void lists(const AdjacencyLists& adj) {
    for (const auto& row : adj) {
      varint(row.size());
      for (NodeId u : row) varint(u);
    }
  }

  void finish() {
    out_.flush();
    if (!out_) throw Error(ErrorCode::IoFailure, "short write to " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  }

  template <typename T>
  T pod() {
    T value{};
    in_.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (in_.gcount() != sizeof(T)) throw Error(ErrorCode::TruncatedFile, "graph file ends early");
    return value;
  }

  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) throw Error(ErrorCode::TruncatedFile, "graph file ends early");
      v |= static_cast<std::uint64_t>(c & 0x7f) << shift;
      if (!(c & 0x80)) return v;
    }
    throw Error(ErrorCode::MalformedHeader, "varint too long");
  }

  std::string bytes() {
    const auto len = varint();
    if (len > (1u << 20)) throw Error(ErrorCode::MalformedHeader, "string field too long");
    std::string s(len, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(len));
    if (static_cast<std::uint64_t>(in_.gcount()) != len) throw Error(ErrorCode::TruncatedFile, "graph file ends early");
    return s;
  }

  AdjacencyLists lists(std::uint64_t n) {
    AdjacencyLists adj(n);
    for (auto& row : adj) {
      const auto count = varint();
      if (count > n) throw Error(ErrorCode::MalformedHeader, "neighbour count exceeds n");
      row.resize(count);
      for (auto& u : row) {
        const auto v = varint();
        if (v >= n) throw Error(ErrorCode::IndexMismatch, "neighbour index out of range");
        u = static_cast<NodeId>(v);
      }
    }
    return adj;
  }

 private:
  std::ifstream in_;
};

}  // namespace

void save_graph(const std::filesystem::path& path, const SearchGraph& g) {
  const auto& config = g.config();
  Writer w(path);
  for (char c : kMagic) w.pod(c);
  w.pod(kVersion);
  w.pod(static_cast<std::uint64_t>(g.size()));
  w.pod(static_cast<std::uint8_t>(config.kind));
  w.pod(static_cast<std::uint8_t>((config.cap_at_half_pi ? kCapAtHalfPi : 0) |
                                  (config.symmetrize ? kSymmetrize : 0)));
  w.pod(config.M);
  w.pod(static_cast<std::uint32_t>(config.k));
  w.pod(stable_hash(g.dataset_id()));
  w.pod(stable_hash(config.describe()));
  w.bytes(g.dataset_id());
  w.lists(g.local_lists());
  if (const LongEdges* edges = g.long_edge_set()) {
    w.pod(std::uint8_t{1});
    w.pod(static_cast<std::uint8_t>(edges->scheme));
    w.lists(edges->targets);
  } else {
    w.pod(std::uint8_t{0});
  }
  w.finish();
}

SearchGraph load_graph(const std::filesystem::path& path) {
  Reader r(path);
  std::array<char, 8> magic{};
  for (char& c : magic) c = r.pod<char>();
  if (magic != kMagic) throw Error(ErrorCode::MalformedHeader, path.string() + " is not a graph file");
  if (const auto version = r.pod<std::uint32_t>(); version != kVersion)
    throw Error(ErrorCode::MalformedHeader, "unsupported graph file version " + std::to_string(version));
  const auto n = r.pod<std::uint64_t>();
  const auto kind = r.pod<std::uint8_t>();
  if (kind > static_cast<std::uint8_t>(GraphKind::Knn)) throw Error(ErrorCode::MalformedHeader, "unknown graph kind");
  const auto flags = r.pod<std::uint8_t>();
  GraphConfig config;
  config.kind = static_cast<GraphKind>(kind);
  config.cap_at_half_pi = flags & kCapAtHalfPi;
  config.symmetrize = flags & kSymmetrize;
  config.M = r.pod<double>();
  config.k = static_cast<int>(r.pod<std::uint32_t>());
  const auto id_hash = r.pod<std::uint64_t>();
  const auto config_hash = r.pod<std::uint64_t>();
  std::string id = r.bytes();
  if (stable_hash(id) != id_hash || stable_hash(config.describe()) != config_hash)
    throw Error(ErrorCode::MalformedHeader, "graph header checksum mismatch in " + path.string());

  SearchGraph g(r.lists(n), config, std::move(id));
  if (r.pod<std::uint8_t>() != 0) {
    const auto scheme = r.pod<std::uint8_t>();
    if (scheme > static_cast<std::uint8_t>(LongEdgeScheme::RankPresampled))
      throw Error(ErrorCode::MalformedHeader, "unknown long-edge scheme tag");
    g.set_long_edges(LongEdges{static_cast<LongEdgeScheme>(scheme), r.lists(n)});
  }
  return g;
}

SearchGraph load_graph(const std::filesystem::path& path, const Dataset& expected) {
  SearchGraph g = load_graph(path);
  check_graph_matches(g, expected);
  return g;
}

}  // namespace gbnns
