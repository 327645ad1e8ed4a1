#include <algorithm>
#include <bit>
#include <cstdlib>

#include "fracperim/error.hpp"
#include "fracperim/functionals.hpp"
#include "fracperim/parallel.hpp"
#include "fracperim/summation.hpp"

namespace fracperim {

namespace {

struct PackedMask {
  int words = 0;
  int ext1 = 1;
  std::vector<std::uint64_t> bits;  // [line * words + word], line = y + ext1 * z
  Index lo{0, 0, 0};
  Index hi{-1, -1, -1};  // inclusive bounding box of set cells
  bool empty = true;

  const std::uint64_t* line(int y, int z) const {
    return bits.data() + static_cast<std::size_t>(y + ext1 * z) * words;
  }
};

PackedMask pack(const Grid& grid, std::span<const std::uint8_t> mask) {
  if (mask.size() != grid.size())
    throw Error(ErrorKind::invalid_argument, "cell mask size differs from the grid size");
  PackedMask p;
  p.words = (grid.extent(0) + 63) / 64;
  p.ext1 = grid.extent(1);
  p.bits.assign(static_cast<std::size_t>(grid.extent(1)) * grid.extent(2) * p.words, 0);
  p.lo = {grid.extent(0), grid.extent(1), grid.extent(2)};
  for_each_cell(grid, all_cells(grid), [&](const Index& idx, std::size_t lin) {
    if (!mask[lin]) return;
    const std::size_t line = static_cast<std::size_t>(idx[1] + p.ext1 * idx[2]);
    p.bits[line * p.words + idx[0] / 64] |= std::uint64_t{1} << (idx[0] % 64);
    for (int a = 0; a < kMaxDim; ++a) {
      p.lo[a] = std::min(p.lo[a], idx[a]);
      p.hi[a] = std::max(p.hi[a], idx[a]);
    }
    p.empty = false;
  });
  return p;
}

// out[x] = in[x + dx] for the bits of one line.
void shift_line(const std::uint64_t* in, std::uint64_t* out, int words, int dx) {
  auto word = [&](long w) -> std::uint64_t { return (w >= 0 && w < words) ? in[w] : 0; };
  if (dx >= 0) {
    const int q = dx / 64, r = dx % 64;
    for (int w = 0; w < words; ++w)
      out[w] = (word(w + q) >> r) | (r ? word(w + q + 1) << (64 - r) : 0);
  } else {
    const int e = -dx;
    const int q = e / 64, r = e % 64;
    for (int w = 0; w < words; ++w)
      out[w] = (word(w - q) << r) | (r ? word(w - q - 1) >> (64 - r) : 0);
  }
}

}  // namespace

std::size_t PairCounts::index(const Offset& d) const {
  const std::size_t nx = 2 * reach[0] + 1, ny = 2 * reach[1] + 1;
  return static_cast<std::size_t>(d[0] + reach[0]) +
         nx * (static_cast<std::size_t>(d[1] + reach[1]) + ny * static_cast<std::size_t>(d[2] + reach[2]));
}

std::int64_t PairCounts::total() const {
  std::int64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

PairCounts pair_counts(const Grid& grid, std::span<const std::uint8_t> a,
                       std::span<const std::uint8_t> b, int threads) {
  const PackedMask pa = pack(grid, a);
  const PackedMask pb = pack(grid, b);
  PairCounts out;
  if (pa.empty || pb.empty) {
    out.counts.assign(1, 0);
    return out;
  }
  Index dlo{}, dhi{};
  for (int i = 0; i < kMaxDim; ++i) {
    dlo[i] = pb.lo[i] - pa.hi[i];
    dhi[i] = pb.hi[i] - pa.lo[i];
    out.reach[i] = std::max(std::abs(dlo[i]), std::abs(dhi[i]));
  }
  out.counts.assign(static_cast<std::size_t>(2 * out.reach[0] + 1) * (2 * out.reach[1] + 1) *
                        (2 * out.reach[2] + 1),
                    0);

  const int words = pa.words;
  const int wlo = pa.lo[0] / 64, whi = pa.hi[0] / 64;
  const std::size_t chunks = static_cast<std::size_t>(dhi[0] - dlo[0] + 1);
  parallel_chunks(chunks, threads, [&](std::size_t chunk) {
    const int dx = dlo[0] + static_cast<int>(chunk);
    // B lines shifted so bit x holds B[x + dx]; only B's bounding box is needed.
    const int by0 = pb.lo[1], by1 = pb.hi[1], bz0 = pb.lo[2], bz1 = pb.hi[2];
    const int bny = by1 - by0 + 1;
    std::vector<std::uint64_t> shifted(static_cast<std::size_t>(bny) * (bz1 - bz0 + 1) * words);
    for (int z = bz0; z <= bz1; ++z)
      for (int y = by0; y <= by1; ++y)
        shift_line(pb.line(y, z),
                   shifted.data() + static_cast<std::size_t>((y - by0) + bny * (z - bz0)) * words,
                   words, dx);
    for (int dz = dlo[2]; dz <= dhi[2]; ++dz)
      for (int dy = dlo[1]; dy <= dhi[1]; ++dy) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        std::int64_t count = 0;
        const int z0 = std::max(pa.lo[2], bz0 - dz), z1 = std::min(pa.hi[2], bz1 - dz);
        const int y0 = std::max(pa.lo[1], by0 - dy), y1 = std::min(pa.hi[1], by1 - dy);
        for (int z = z0; z <= z1; ++z)
          for (int y = y0; y <= y1; ++y) {
            const std::uint64_t* la = pa.line(y, z);
            const std::uint64_t* lb =
                shifted.data() + static_cast<std::size_t>((y + dy - by0) + bny * (z + dz - bz0)) * words;
            for (int w = wlo; w <= whi; ++w) count += std::popcount(la[w] & lb[w]);
          }
        out.counts[out.index(Offset{dx, dy, dz})] = count;
      }
  });
  return out;
}

Interaction weigh(const PairCounts& counts, const WeightTable& table, int threads) {
  if (counts.counts.size() <= 1) return {};
  const DenseWeights w = table.dense(counts.reach, threads);
  // Offsets d and -d sit at mirrored linear positions and share a weight, so
  // their counts are merged first; L(A, B) and L(B, A) then agree bit for bit.
  constexpr std::size_t kChunk = std::size_t{1} << 14;
  const std::size_t n = counts.counts.size();
  const std::size_t half = n / 2;
  const std::size_t chunks = (half + kChunk - 1) / kChunk;
  std::vector<CompensatedSum> value(chunks), error(chunks);
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(half, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const std::int64_t k = counts.counts[i] + counts.counts[n - 1 - i];
      if (k == 0) continue;
      value[c].add(static_cast<double>(k) * w.value_at(i));
      error[c].add(static_cast<double>(k) * w.error_at(i));
    }
  });
  CompensatedSum v, e;
  for (std::size_t c = 0; c < chunks; ++c) {
    v += value[c];
    e += error[c];
  }
  return {v.value(), e.value()};
}

Interaction interaction(const Grid& grid, std::span<const std::uint8_t> a,
                        std::span<const std::uint8_t> b, const WeightTable& table, int threads) {
  return weigh(pair_counts(grid, a, b, threads), table, threads);
}

}  // namespace fracperim
