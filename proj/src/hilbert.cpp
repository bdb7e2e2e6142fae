#include "rydgrover/hilbert.hpp"

#include <stdexcept>

namespace rydgrover::hilbert {

std::string_view to_string(Scheme scheme) {
    return scheme == Scheme::DirectBlockade ? "direct" : "ancilla";
}

std::string_view to_string(Level level) {
    switch (level) {
    case Level::q0: return "q0";
    case Level::q1: return "q1";
    case Level::ryd: return "r";
    case Level::lost: return "o";
    }
    return "?";
}

Bitstring::Bitstring(std::vector<std::uint8_t> digits) : digits_(std::move(digits)) {
    for (auto d : digits_) {
        if (d > 1) throw std::invalid_argument("bitstring digits must be 0 or 1");
    }
}

Bitstring Bitstring::parse(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty bitstring");
    std::vector<std::uint8_t> digits;
    digits.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("bitstring '" + std::string(text) + "' contains non-binary digit");
        }
        digits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return Bitstring(std::move(digits));
}

std::string Bitstring::str() const {
    std::string s;
    s.reserve(digits_.size());
    for (auto d : digits_) s.push_back(static_cast<char>('0' + d));
    return s;
}

std::size_t Layout::levels(std::size_t atom) const {
    if (atom >= atom_count()) throw std::out_of_range("atom index out of range");
    return is_ancilla(atom) ? kAncillaLevels : kRegisterLevels;
}

std::size_t Layout::stride(std::size_t atom) const {
    if (atom >= atom_count()) throw std::out_of_range("atom index out of range");
    std::size_t s = 1;
    for (std::size_t a = atom + 1; a < atom_count(); ++a) s *= levels(a);
    return s;
}

std::size_t Layout::dim() const noexcept {
    std::size_t d = ancilla ? kAncillaLevels : 1;
    for (std::size_t j = 0; j < k; ++j) d *= kRegisterLevels;
    return d;
}

void RegisterConfig::validate() const {
    if (k < 1 || k > kMaxRegisterAtoms) {
        throw std::invalid_argument("register size k=" + std::to_string(k) + " outside supported range [1, " +
                                    std::to_string(kMaxRegisterAtoms) + "]");
    }
    if (marked.size() != k) {
        throw std::invalid_argument("marked element '" + marked.str() + "' must have exactly k=" +
                                    std::to_string(k) + " digits");
    }
}

std::size_t basis_index(std::span<const Level> levels, std::optional<AncillaLevel> ancilla,
                        const Layout& layout) {
    if (levels.size() != layout.k) throw std::invalid_argument("expected one level per register atom");
    if (ancilla.has_value() != layout.ancilla) {
        throw std::invalid_argument(layout.ancilla ? "ancilla level required" : "layout has no ancilla");
    }
    std::size_t index = 0;
    for (auto level : levels) {
        auto v = static_cast<std::size_t>(level);
        if (v >= kRegisterLevels) throw std::out_of_range("register level out of range");
        index = index * kRegisterLevels + v;
    }
    if (ancilla) {
        auto a = static_cast<std::size_t>(*ancilla);
        if (a >= kAncillaLevels) throw std::out_of_range("ancilla level out of range");
        index = index * kAncillaLevels + a;
    }
    return index;
}

BasisLabel basis_label(std::size_t index, const Layout& layout) {
    if (index >= layout.dim()) throw std::out_of_range("basis index out of range");
    BasisLabel label;
    label.levels.resize(layout.k);
    for (std::size_t j = 0; j < layout.k; ++j) label.levels[j] = static_cast<Level>(digit(index, j, layout));
    if (layout.ancilla) label.ancilla = static_cast<AncillaLevel>(index % kAncillaLevels);
    return label;
}

StateVector::StateVector(Layout layout, Vector amplitudes) : layout_(layout), amps_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amps_.size()) != layout_.dim()) {
        throw std::invalid_argument("amplitude vector does not match layout dimension");
    }
}

void StateVector::normalize() {
    const double n = amps_.norm();
    if (n == 0.0) throw std::domain_error("cannot normalize the zero vector");
    amps_ /= n;
}

StateVector StateVector::normalized() const {
    StateVector copy = *this;
    copy.normalize();
    return copy;
}

StateVector initial_state(const RegisterConfig& config) {
    config.validate();
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(config.dim()));
    amps(0) = 1.0;
    return StateVector(config.layout(), std::move(amps));
}

Matrix register_op(Level to, Level from) {
    Matrix m = Matrix::Zero(kRegisterLevels, kRegisterLevels);
    m(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = 1.0;
    return m;
}

Matrix ancilla_op(AncillaLevel to, AncillaLevel from) {
    Matrix m = Matrix::Zero(kAncillaLevels, kAncillaLevels);
    m(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = 1.0;
    return m;
}

SparseOp embed_single(const Matrix& op, std::size_t atom, const Layout& layout) {
    const std::size_t n = layout.levels(atom);
    if (static_cast<std::size_t>(op.rows()) != n || static_cast<std::size_t>(op.cols()) != n) {
        throw std::invalid_argument("operator size does not match atom kind");
    }
    const std::size_t dim = layout.dim();
    const std::size_t stride = layout.stride(atom);

    std::vector<Eigen::Triplet<Complex>> triplets;
    std::size_t nnz_local = 0;
    for (Eigen::Index r = 0; r < op.rows(); ++r)
        for (Eigen::Index c = 0; c < op.cols(); ++c)
            if (op(r, c) != Complex{}) ++nnz_local;
    triplets.reserve(dim / n * nnz_local);

    for (std::size_t col = 0; col < dim; ++col) {
        const std::size_t from = (col / stride) % n;
        for (std::size_t to = 0; to < n; ++to) {
            const Complex v = op(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from));
            if (v == Complex{}) continue;
            const std::size_t row = col + to * stride - from * stride;
            triplets.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
        }
    }
    SparseOp out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

}  // namespace rydgrover::hilbert
