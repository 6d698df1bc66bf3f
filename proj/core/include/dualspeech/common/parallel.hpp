#pragma once

#include <cstddef>
#include <functional>

namespace dualspeech {

/// Runs body(chunk) for chunk in [0, chunks) on up to `threads` workers.
/// Work is split by chunk index, never by thread, so any per-chunk
/// accumulation followed by an in-order merge is independent of the thread
/// count. threads == 0 selects std::thread::hardware_concurrency().
void parallel_chunks(std::size_t chunks, std::size_t threads,
                     const std::function<void(std::size_t)>& body);

/// Half-open [begin, end) range of item indices owned by `chunk`.
struct ChunkRange {
  std::size_t begin;
  std::size_t end;
};

ChunkRange chunk_range(std::size_t items, std::size_t chunks, std::size_t chunk);

}  // namespace dualspeech
