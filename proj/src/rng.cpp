#include "hcae/rng.hpp"

namespace hcae {

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index) {
  // FNV-1a over the stream tag gives domain separation between, e.g.,
  // per-subject and per-run streams that share an index space.
  std::uint64_t tag = 1469598103934665603ull;
  for (const char c : stream) {
    tag ^= static_cast<unsigned char>(c);
    tag *= 1099511628211ull;
  }
  return splitmix64(splitmix64(root ^ tag) ^ splitmix64(index + 1));
}

}  // namespace hcae
