#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rydgrover/linalg.hpp"

namespace rydgrover::hilbert {

// Register atom levels: two qubit states, the Rydberg state and a loss sink.
enum class Level : std::uint8_t { q0 = 0, q1 = 1, ryd = 2, lost = 3 };

// Ancilla levels: ground and Rydberg.
enum class AncillaLevel : std::uint8_t { g = 0, R = 1 };

inline constexpr std::size_t kRegisterLevels = 4;
inline constexpr std::size_t kAncillaLevels = 2;
inline constexpr std::size_t kMaxRegisterAtoms = 5;

enum class Scheme { DirectBlockade, AncillaBlockade };

std::string_view to_string(Scheme scheme);
std::string_view to_string(Level level);

/// Marked element b_0 b_1 ... b_{k-1}; digit 0 is the most significant atom.
class Bitstring {
public:
    Bitstring() = default;
    explicit Bitstring(std::vector<std::uint8_t> digits);

    /// Parses a string of '0'/'1' characters.
    static Bitstring parse(std::string_view text);

    std::size_t size() const noexcept { return digits_.size(); }
    std::uint8_t operator[](std::size_t i) const { return digits_.at(i); }
    std::span<const std::uint8_t> digits() const noexcept { return digits_; }
    std::string str() const;

    bool operator==(const Bitstring&) const = default;

private:
    std::vector<std::uint8_t> digits_;
};

/// Shape of the tensor-product space: k four-level atoms and an optional
/// two-level ancilla appended as the least significant factor.
struct Layout {
    std::size_t k = 0;
    bool ancilla = false;

    std::size_t atom_count() const noexcept { return k + (ancilla ? 1 : 0); }
    std::size_t levels(std::size_t atom) const;
    std::size_t stride(std::size_t atom) const;
    std::size_t dim() const noexcept;
    std::size_t ancilla_index() const noexcept { return k; }
    bool is_ancilla(std::size_t atom) const noexcept { return ancilla && atom == k; }

    bool operator==(const Layout&) const = default;
};

struct RegisterConfig {
    std::size_t k = 0;
    Scheme scheme = Scheme::DirectBlockade;
    Bitstring marked;

    bool has_ancilla() const noexcept { return scheme == Scheme::AncillaBlockade; }
    Layout layout() const noexcept { return Layout{k, has_ancilla()}; }
    std::size_t dim() const noexcept { return layout().dim(); }

    /// Throws std::invalid_argument for k outside [1, kMaxRegisterAtoms] or a
    /// marked string of the wrong length.
    void validate() const;
};

/// Per-atom levels of one basis state.
struct BasisLabel {
    std::vector<Level> levels;
    std::optional<AncillaLevel> ancilla;
};

/// Index = mu_0 * 4^{k-1} + ... + mu_{k-1}, times 2 plus the ancilla level
/// when an ancilla is present.
std::size_t basis_index(std::span<const Level> levels, std::optional<AncillaLevel> ancilla,
                        const Layout& layout);
BasisLabel basis_label(std::size_t index, const Layout& layout);

/// Level digit of `atom` in basis state `index`.
inline std::size_t digit(std::size_t index, std::size_t atom, const Layout& layout) {
    return (index / layout.stride(atom)) % layout.levels(atom);
}

class StateVector {
public:
    StateVector(Layout layout, Vector amplitudes);

    const Layout& layout() const noexcept { return layout_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }
    const Vector& amplitudes() const noexcept { return amps_; }
    Vector& amplitudes() noexcept { return amps_; }

    double norm() const { return amps_.norm(); }
    void normalize();
    StateVector normalized() const;

private:
    Layout layout_;
    Vector amps_;
};

/// All register atoms in q0, ancilla in g.
StateVector initial_state(const RegisterConfig& config);

/// |to><from| on a single register atom.
Matrix register_op(Level to, Level from);
/// |to><from| on the ancilla.
Matrix ancilla_op(AncillaLevel to, AncillaLevel from);

/// Embeds a single-atom operator (4x4 for register atoms, 2x2 for the
/// ancilla at index k) into the full space as identity elsewhere.
SparseOp embed_single(const Matrix& op, std::size_t atom, const Layout& layout);

}  // namespace rydgrover::hilbert
