#pragma once

#include <cstdint>
#include <functional>

namespace polytope {

// Process-wide cap on worker threads for the parallel scans below.
// Defaults to 1; the CLI raises it from --threads. Results are identical for
// any value: each task writes only its own output slot and seeded tasks
// derive sub-seeds from their index (see mix_seed).
void set_default_threads(int n);
int default_threads();

// Runs fn(0..n-1), splitting the range statically across workers.
// fn must only touch state owned by its index. Exceptions from workers are
// rethrown on the calling thread (first one wins).
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace polytope
