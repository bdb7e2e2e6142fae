#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rydgrover {

/// Independent random stream for one trajectory, derived deterministically
/// from (master seed, stream id, domain) through std::seed_seq. Both the
/// seeding algorithm and mt19937_64 are fully specified by the standard, so
/// streams are reproducible across platforms and independent of scheduling.
class RngStream {
public:
    static constexpr std::string_view kScheme = "mt19937_64<-seed_seq(seed,trajectory_id,domain)";

    enum class Domain : std::uint32_t { dynamics = 0, measurement = 1 };

    RngStream(std::uint64_t master_seed, std::uint64_t stream_id, Domain domain = Domain::dynamics);

    /// Uniform double in the open interval (0, 1), 53 random bits.
    double uniform();

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    Domain domain() const noexcept { return domain_; }

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    Domain domain_;
    std::mt19937_64 engine_;
};

}  // namespace rydgrover
