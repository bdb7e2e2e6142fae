#include "rydgrover/random.hpp"

namespace rydgrover {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream, std::uint32_t domain) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), domain};
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id, Domain domain)
    : master_seed_(master_seed),
      stream_id_(stream_id),
      domain_(domain),
      engine_(make_engine(master_seed, stream_id, static_cast<std::uint32_t>(domain))) {}

double RngStream::uniform() {
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace rydgrover
